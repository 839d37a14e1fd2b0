#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "pfmc/constraints.hpp"
#include "support/rand_terms.hpp"
#include "support/solver_oracle.hpp"

using namespace pfmc;

namespace {
const TermPtr a = mk_atom("a", AtomKind::Agent);
const TermPtr b = mk_atom("b", AtomKind::Agent);
const TermPtr k = mk_atom("k");
const TermPtr k1 = mk_atom("k1");
const TermPtr k2 = mk_atom("k2");
const TermPtr m = mk_atom("m");
const TermPtr s = mk_atom("s");
const TermPtr X = mk_var("X", 100);
const TermPtr Y = mk_var("Y", 101);

bool subst_eq(const Subst& l, const Subst& r) {
  auto lb = l.sorted_bindings();
  auto rb = r.sorted_bindings();
  if (lb.size() != rb.size()) return false;
  for (std::size_t i = 0; i < lb.size(); ++i)
    if (lb[i].first != rb[i].first || !term_eq(lb[i].second, rb[i].second))
      return false;
  return true;
}
}  // namespace

TEST_CASE("debug dump prints each constraint as knowledge |- goal", "[solver]") {
  ConstraintStore st;
  st = st.add_constraint({k, mk_sym_enc(k, s)}, s);
  REQUIRE(dump(st) == "[k, {|s|}k] |- s");
  st = st.add_constraint({k, mk_sym_enc(k, s), a}, X);
  REQUIRE(dump(st) == "[k, {|s|}k] |- s ; [k, {|s|}k, a] |- X_100");
}

TEST_CASE("an empty store is satisfiable with exactly the identity", "[solver]") {
  ConstraintStore st;
  REQUIRE(is_satisfiable(st));
  SolutionStream stream = solve(st);
  auto first = stream.next();
  REQUIRE(first.has_value());
  REQUIRE(first->empty());
  REQUIRE_FALSE(stream.next().has_value());
}

TEST_CASE("symmetric decryption succeeds without instantiation", "[solver]") {
  ConstraintStore st;
  st = st.add_constraint({k, mk_sym_enc(k, s)}, s);
  REQUIRE(is_satisfiable(st));
  auto sols = solve_all(st);
  REQUIRE(sols.size() == 1);
  REQUIRE(sols[0].empty());
}

TEST_CASE("a sealed body without its key is unsatisfiable", "[solver]") {
  ConstraintStore st;
  st = st.add_constraint({mk_sym_enc(k, s)}, s);
  REQUIRE_FALSE(is_satisfiable(st));
  SolutionStream stream = solve(st);
  REQUIRE_FALSE(stream.next().has_value());
  REQUIRE_FALSE(stream.next().has_value());
}

TEST_CASE("variable goals are terminal and stay free", "[solver]") {
  ConstraintStore st;
  st = st.add_constraint({a}, X);
  REQUIRE(is_satisfiable(st));
  auto sols = solve_all(st);
  REQUIRE(sols.size() == 1);
  REQUIRE(sols[0].empty());

  st = st.add_constraint({a, b}, Y);
  REQUIRE(is_satisfiable(st));  // only simple constraints
}

TEST_CASE("add_constraint appends and exposes the knowledge prefix", "[solver]") {
  ConstraintStore st;
  st = st.add_constraint({a}, X);
  REQUIRE(st.size() == 1);
  Constraint c = st.constraint(0);
  REQUIRE(c.knowledge.size() == 1);
  REQUIRE(term_eq(c.knowledge[0], a));
  REQUIRE(term_eq(c.goal, X));
  REQUIRE(st.knowledge().size() == 1);
}

TEST_CASE("knowledge that shrinks or diverges is an internal error", "[solver]") {
  ConstraintStore st;
  st = st.add_constraint({a, b}, X);
  REQUIRE_THROWS_AS(st.add_constraint({a}, Y), std::logic_error);
  REQUIRE_THROWS_AS(st.add_constraint({a, k}, Y), std::logic_error);
  REQUIRE_NOTHROW(st.add_constraint({a, b}, Y));
  REQUIRE_NOTHROW(st.add_constraint({a, b, k}, Y));
}

TEST_CASE("knowledge variables must originate in an earlier goal", "[solver]") {
  ConstraintStore st;
  REQUIRE_THROWS_AS(st.add_constraint({X}, a), std::logic_error);
  st = st.add_constraint({a}, X);
  REQUIRE_NOTHROW(st.add_constraint({a, mk_sym_enc(k, X)}, Y));
  REQUIRE_THROWS_AS(st.add_constraint({a, Y}, b), std::logic_error);
}

TEST_CASE("composition builds structured goals lazily", "[solver]") {
  ConstraintStore st;
  st = st.add_constraint({a, b}, mk_pair(X, b));
  auto sols = solve_all(st);
  REQUIRE(sols.size() == 1);
  REQUIRE(sols[0].empty());  // X left free, b taken from knowledge
}

TEST_CASE("unification instantiates goal variables against knowledge", "[solver]") {
  ConstraintStore st;
  st = st.add_constraint({mk_sym_enc(k, m)}, mk_sym_enc(X, m));
  auto sols = solve_all(st);
  REQUIRE(sols.size() == 1);
  REQUIRE(sols[0].size() == 1);
  REQUIRE(term_eq(*sols[0].find(100), k));
}

TEST_CASE("unify branches precede composition in the stream", "[solver]") {
  ConstraintStore st;
  st = st.add_constraint({mk_sym_enc(k, a), k, a}, mk_sym_enc(k, X));
  auto sols = solve_all(st);
  REQUIRE(sols.size() == 2);
  REQUIRE(sols[0].size() == 1);
  REQUIRE(term_eq(*sols[0].find(100), a));  // reuse the recorded ciphertext
  REQUIRE(sols[1].empty());                 // compose key and fresh body
}

TEST_CASE("key analysis forces an instantiation when only one key fits", "[solver]") {
  ConstraintStore st;
  std::vector<TermPtr> know{k1, k2, mk_apply("hash", {k1})};
  st = st.add_constraint(know, Y);
  know.push_back(mk_sym_enc(mk_apply("hash", {Y}), s));
  st = st.add_constraint(know, s);
  auto sols = solve_all(st);
  REQUIRE(sols.size() == 1);
  REQUIRE(term_eq(*sols[0].find(101), k1));
}

TEST_CASE("key analysis stays lazy when the attacker can build any key", "[solver]") {
  ConstraintStore st;
  std::vector<TermPtr> know{mk_atom("hash"), k1};
  st = st.add_constraint(know, Y);
  know.push_back(mk_sym_enc(mk_apply("hash", {Y}), s));
  st = st.add_constraint(know, s);
  auto sols = solve_all(st);
  REQUIRE(!sols.empty());
  REQUIRE(sols[0].empty());  // Y free: any choice yields a decryptable key
}

TEST_CASE("a key under a private function is unreachable", "[solver]") {
  ConstraintStore st;
  std::vector<TermPtr> know{k1, k2};
  st = st.add_constraint(know, Y);
  know.push_back(mk_sym_enc(mk_apply("hash", {Y}), s));
  st = st.add_constraint(know, s);
  REQUIRE_FALSE(is_satisfiable(st));
}

TEST_CASE("instantiated simple constraints are re-solved at their own prefix",
          "[solver]") {
  ConstraintStore st;
  st = st.add_constraint({k1}, X);
  st = st.add_constraint({k1, mk_apply("hash", {k2})}, mk_apply("hash", {X}));
  REQUIRE_FALSE(is_satisfiable(st));  // X must be k2, underivable where X was chosen

  ConstraintStore ok;
  ok = ok.add_constraint({k1, k2}, X);
  ok = ok.add_constraint({k1, k2, mk_apply("hash", {k2})}, mk_apply("hash", {X}));
  auto sols = solve_all(ok);
  REQUIRE(sols.size() == 1);
  REQUIRE(term_eq(*sols[0].find(100), k2));
}

TEST_CASE("substituted narrows or kills the store", "[solver]") {
  ConstraintStore st;
  st = st.add_constraint({k1, k2}, X);
  st = st.add_constraint({k1, k2, mk_sym_enc(X, s)}, s);
  REQUIRE(is_satisfiable(st));

  Subst good;
  good.bind(100, k2);
  auto narrowed = st.substituted(good);
  REQUIRE(narrowed.has_value());
  REQUIRE(is_satisfiable(*narrowed));
  REQUIRE(narrowed->accumulated().find(100) != nullptr);

  Subst bad;
  bad.bind(100, mk_atom("zz"));
  auto killed = st.substituted(bad);
  REQUIRE(killed.has_value());
  REQUIRE_FALSE(is_satisfiable(*killed));
}

TEST_CASE("every emitted solution passes the ground oracle", "[solver]") {
  testgen::Gen gen(2026);
  int checked = 0;
  for (int i = 0; i < 800; ++i) {
    ConstraintStore st = testgen::random_symbolic_store(gen);
    for (const auto& sigma : solve_all(st, 8)) {
      INFO("store: " << dump(st) << "  sigma: " << render_subst(sigma));
      REQUIRE(testgen::oracle_accepts(st, sigma));
      ++checked;
    }
  }
  REQUIRE(checked > 150);
}

TEST_CASE("ground satisfiability agrees with the oracle exactly", "[solver]") {
  testgen::Gen gen(7);
  int sat = 0, unsat = 0;
  for (int i = 0; i < 1200; ++i) {
    ConstraintStore st = testgen::random_ground_store(gen);
    bool expect = testgen::ground_oracle_satisfiable(st);
    INFO("store: " << dump(st));
    REQUIRE(is_satisfiable(st) == expect);
    (expect ? sat : unsat)++;
  }
  REQUIRE(sat > 100);
  REQUIRE(unsat > 100);
}

TEST_CASE("solution streams are deterministic", "[solver]") {
  testgen::Gen gen(99);
  for (int i = 0; i < 100; ++i) {
    ConstraintStore st = testgen::random_symbolic_store(gen);
    auto first = solve_all(st, 12);
    auto second = solve_all(st, 12);
    REQUIRE(first.size() == second.size());
    for (std::size_t j = 0; j < first.size(); ++j)
      REQUIRE(subst_eq(first[j], second[j]));
  }
}

TEST_CASE("intermediate reduction states stay well-formed", "[solver]") {
  testgen::Gen gen(4242);
  auto well_formed = [](const solver_detail::Node& n) {
    REQUIRE(n.mark.size() == n.know.size());
    std::uint32_t prev = 0;
    for (const auto& g : n.goals) {
      REQUIRE(g.klen >= prev);
      REQUIRE(g.klen <= n.know.size());
      prev = g.klen;
    }
    std::vector<std::uint32_t> history;
    for (const auto& [v, t] : n.sigma.sorted_bindings()) {
      history.push_back(v);
      collect_vars(t, history);
    }
    for (std::size_t p = 0; p < n.know.size(); ++p) {
      std::vector<std::uint32_t> vs;
      collect_vars(n.know[p], vs);
      for (auto v : vs) {
        bool ok = false;
        for (const auto& g : n.goals)
          if (g.klen <= p) {
            std::vector<std::uint32_t> gv;
            collect_vars(g.goal, gv);
            for (auto u : gv) ok = ok || u == v;
          }
        for (auto u : history) ok = ok || u == v;
        INFO("position " << p << " variable " << v);
        REQUIRE(ok);
      }
    }
  };
  for (int i = 0; i < 100; ++i) {
    ConstraintStore st = testgen::random_symbolic_store(gen);
    std::vector<solver_detail::Node> stack{solver_detail::build_root(st)};
    int visited = 0;
    while (!stack.empty() && visited < 500) {
      solver_detail::Node n = std::move(stack.back());
      stack.pop_back();
      well_formed(n);
      ++visited;
      std::size_t gi = solver_detail::first_open_goal(n);
      if (gi == solver_detail::kNoGoal) continue;
      for (auto& child : solver_detail::reduce(n, gi))
        stack.push_back(std::move(child));
    }
  }
}
