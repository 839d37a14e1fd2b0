// Session instantiation, the successor relation and goal checking, pinned
// against hand-computed shapes and two independent ground oracles: a
// single-step movability check (grounding a strand's pending receives over
// the analyzed attacker knowledge) and a whole-trace replay check (grounding
// a witness trace and re-deriving every delivered message with the closure
// engine).

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "pfmc/closure.hpp"
#include "pfmc/transition.hpp"
#include "support/corpus.hpp"
#include "support/replay.hpp"

namespace {

using namespace pfmc;
using testsup::load;
using testsup::shape;
using testsup::find_initial;
using testsup::WalkStats;
using testsup::dfs;
using testsup::trace_realizable;

// Single-step oracle: some grounding of the pending receive block's variables
// over the analyzed initial knowledge (plus one fresh public constant) makes
// every delivered wire derivable. Grounding over analyzed subterms is a
// sound witness search, so oracle-movable must imply solver-movable.
bool oracle_movable(const TermList& k0, const Strand& sd) {
  TermList wires;
  for (const auto& stp : sd.steps) {
    if (stp.kind != StepKind::Recv) break;
    wires.push_back(stp.wire);
  }
  if (wires.empty()) return true;  // leading send
  TermList know = k0;
  know.push_back(mk_atom("gc0"));
  TermSet closed = analyze_saturate(know);
  TermList cands(closed.begin(), closed.end());
  std::vector<std::uint32_t> vs;
  for (const auto& w : wires) collect_vars(w, vs);
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  std::vector<std::size_t> odo(vs.size(), 0);
  while (true) {
    Subst gamma;
    for (std::size_t i = 0; i < vs.size(); ++i) gamma.bind(vs[i], cands[odo[i]]);
    bool ok = true;
    for (const auto& w : wires) ok = ok && derivable(know, gamma.apply(w));
    if (ok) return true;
    std::size_t i = 0;
    for (; i < odo.size(); ++i) {
      if (++odo[i] < cands.size()) break;
      odo[i] = 0;
    }
    if (i == odo.size()) return false;
  }
}

TermPtr agent(const std::string& n) { return mk_atom(n, AtomKind::Agent); }

// Solving replaces pair entries by their components, so a parent knowledge
// entry survives into the child either verbatim or as its split closure.
bool covered(const TermList& know, const TermPtr& t) {
  if (contains(know, t)) return true;
  if (t->kind == TermKind::Pair)
    return covered(know, t->args[0]) && covered(know, t->args[1]);
  return false;
}

}  // namespace

TEST_CASE("canonical session assignment counts", "[transition]") {
  CHECK(load("kerberos_basic.AnB", 1).initial_states.size() == 2);
  CHECK(load("kerberos_basic.AnB", 2).initial_states.size() == 4);
  CHECK(load("sso_flawed.AnB", 2).initial_states.size() == 12);
  CHECK(load("sso_standard.AnB", 2).initial_states.size() == 12);
  CHECK(load("tls.AnB", 2).initial_states.size() == 24);

  Scenario sc = load("sso_flawed.AnB", 1);
  CHECK(sc.initial_states.size() == 3);
  CHECK(sc.root.synthetic_root);
  CHECK(successors(sc.root).empty());
  CHECK(!check_goals(sc.root, sc));
  for (const auto& st : sc.initial_states) {
    CHECK(st.depth == 0);
    CHECK(st.trace.empty());
    CHECK(!st.strands.empty());
    CHECK(store_eq(st.store, sc.root.store));
  }
  CHECK_THROWS_AS(instantiate_sessions(sc.spec, 0), ProtocolError);
}

TEST_CASE("reserved agent names are rejected", "[transition]") {
  ProtocolSpec spec = parse_anb(
      "Protocol: Clash\n"
      "Types: Agent A,i; Number N\n"
      "Knowledge: A: A,i; i: A,i\n"
      "Actions:\n"
      "A -> i: N\n"
      "Goals:\n"
      "N secret between A,i\n");
  CHECK_THROWS_AS(instantiate_sessions(spec, 1), ProtocolError);
}

TEST_CASE("attacker initial knowledge", "[transition]") {
  auto pk = [](const TermPtr& a) { return mk_apply("pk", {a}); };

  SECTION("kerberos") {
    Scenario sc = load("kerberos_basic.AnB", 1);
    const TermList& k0 = sc.root.knowledge();
    CHECK(k0.size() == 22);
    CHECK(contains(k0, mk_apply("sk", {agent("i"), agent("a")})));
    CHECK(contains(k0, agent("h1")));
    CHECK(contains(k0, mk_atom("hash")));
    CHECK(contains(k0, mk_atom("tag", AtomKind::Number)));
    CHECK(contains(k0, mk_apply("%chk", {agent("g"), agent("i")})));
    CHECK(!contains(k0, mk_apply("sk", {agent("h1"), agent("a")})));
    CHECK(!contains(k0, mk_apply("sk", {agent("a"), agent("g")})));
    CHECK(!contains(k0, mk_atom("sk")));
    CHECK(!contains(k0, mk_apply("%chk", {agent("a"), agent("g")})));
    CHECK(!contains(k0, mk_atom("%chk")));
  }

  SECTION("sso") {
    Scenario sc = load("sso_flawed.AnB", 2);
    const TermList& k0 = sc.root.knowledge();
    CHECK(k0.size() == 14);
    CHECK(contains(k0, pk(agent("idp"))));
    CHECK(contains(k0, mk_inv(mk_apply("%chpub", {agent("i")}))));
    CHECK(!contains(k0, mk_inv(pk(agent("idp")))));
    CHECK(!contains(k0, pk(agent("h1"))));
    CHECK(!contains(k0, mk_atom("pk")));
  }

  SECTION("tls") {
    Scenario sc = load("tls.AnB", 2);
    const TermList& k0 = sc.root.knowledge();
    TermPtr i = agent("i");
    CHECK(k0.size() == 21);
    CHECK(contains(k0, pk(i)));
    CHECK(contains(k0, pk(agent("s"))));
    CHECK(contains(k0, mk_inv(pk(i))));
    CHECK(contains(k0, mk_asym_enc(mk_inv(pk(agent("s"))), mk_pair(i, pk(i)))));
    CHECK(!contains(k0, pk(agent("h1"))));
    CHECK(!contains(k0, mk_inv(pk(agent("s")))));
    CHECK(!contains(k0, mk_atom("pk")));
  }
}

TEST_CASE("kerberos single-session successor shape", "[transition]") {
  Scenario sc = load("kerberos_basic.AnB", 1);

  const SymbolicState& honest = find_initial(sc, "C1=h1 a1=a g1=g s1=s");
  REQUIRE(honest.strands.size() == 4);
  std::size_t sends = 0;
  for (const auto& sd : honest.strands)
    for (const auto& stp : sd.steps)
      if (stp.kind == StepKind::Send) ++sends;
  CHECK(sends == 6);

  auto kids = successors(honest);
  REQUIRE(kids.size() == 2);  // C's opening send; a spoofable by the attacker

  const SymbolicState& via_c = kids[0];
  REQUIRE(via_c.trace.size() == 1);
  CHECK(via_c.depth == 1);
  CHECK(via_c.trace[0].role == "C");
  CHECK(via_c.trace[0].consumed.empty());
  REQUIRE(via_c.trace[0].produced);
  CHECK(term_eq(via_c.trace[0].produced,
                mk_message({agent("h1"), agent("g"), mk_atom("N1#1", AtomKind::Number)})));
  CHECK(via_c.knowledge().size() == honest.knowledge().size() + 1);
  CHECK(term_eq(via_c.knowledge().back(), via_c.trace[0].produced));
  CHECK(via_c.strands.size() == 4);  // C still has later steps

  const SymbolicState& via_a = kids[1];
  REQUIRE(via_a.trace.size() == 1);
  CHECK(via_a.trace[0].role == "a");
  CHECK(via_a.trace[0].consumed.size() == 1);
  REQUIRE(via_a.trace[0].produced);
  CHECK(via_a.strands.size() == 3);  // a's two steps are both consumed
  std::vector<std::uint32_t> frees;
  collect_vars(via_a.trace[0].produced, frees);
  CHECK(!frees.empty());  // the spoofed nonce stays a free attacker choice

  const SymbolicState& compromised = find_initial(sc, "a1=a g1=g s1=s");
  CHECK(successors(compromised).size() == 1);  // only a is reachable
}

TEST_CASE("kerberos single session explores safely to completion", "[transition]") {
  Scenario sc = load("kerberos_basic.AnB", 1);
  const SymbolicState& honest = find_initial(sc, "C1=h1 a1=a g1=g s1=s");

  WalkStats ws;
  std::size_t complete = 0;
  std::size_t depth_mismatch = 0;
  std::size_t knowledge_regressions = 0;
  std::size_t unrealizable = 0;
  auto atk = dfs(sc, honest, 7, 20000, ws, [&](const SymbolicState& st) {
    if (st.depth != st.trace.size()) ++depth_mismatch;
    if (st.strands.empty()) ++complete;
    if (!trace_realizable(sc, st, Subst{})) ++unrealizable;
    for (const auto& kid : successors(st)) {
      if (kid.knowledge().size() < st.knowledge().size()) {
        ++knowledge_regressions;
        continue;
      }
      const Subst& acc = kid.store.accumulated();
      for (const auto& e : st.knowledge())
        if (!covered(kid.knowledge(), acc.apply(e))) ++knowledge_regressions;
    }
  });
  CHECK(!atk);
  CHECK(!ws.capped);
  CHECK(complete > 0);
  CHECK(depth_mismatch == 0);
  CHECK(knowledge_regressions == 0);
  CHECK(unrealizable == 0);
}

TEST_CASE("sso initial movability matches the ground oracle", "[transition]") {
  Scenario sc = load("sso_flawed.AnB", 1);
  const SymbolicState& st = find_initial(sc, "C1=h1 idp1=idp SP1=h2");

  std::vector<std::string> moved;
  for (const auto& kid : successors(st)) moved.push_back(kid.trace[0].role);
  std::sort(moved.begin(), moved.end());
  // C opens; SP's first receive is attacker-composable; idp's is not, since
  // the request channel key names two honest agents.
  CHECK(moved == std::vector<std::string>{"C", "SP"});

  for (const auto& sd : st.strands) {
    bool solver_movable =
        std::find(moved.begin(), moved.end(), sd.role) != moved.end();
    if (oracle_movable(st.knowledge(), sd)) CHECK(solver_movable);
  }
}

TEST_CASE("flawed single sign-on admits the relayed-assertion attack", "[transition]") {
  Scenario sc = load("sso_flawed.AnB", 2);
  const SymbolicState& st =
      find_initial(sc, "C1=h1 idp1=idp SP1=h2 C2=h1 idp2=idp");

  WalkStats ws;
  auto atk = dfs(sc, st, 6, 300000, ws, [](const SymbolicState&) {});
  REQUIRE(atk.has_value());
  CHECK(atk->kind == Goal::Authentication);
  CHECK(atk->goal_index == 0);  // SP authenticates C on URI
  CHECK(atk->witness.depth <= 6);
  CHECK(trace_realizable(sc, atk->witness, atk->witness_subst));
  std::string trace = render_trace(atk->witness, atk->witness_subst);
  CHECK(trace.find("idp") != std::string::npos);
  CHECK(trace.find("SP") != std::string::npos);
}

TEST_CASE("standard single sign-on resists the same exploration", "[transition]") {
  Scenario sc = load("sso_standard.AnB", 2);
  const SymbolicState& st =
      find_initial(sc, "C1=h1 idp1=idp SP1=h2 C2=h1 idp2=idp");

  WalkStats ws;
  auto atk = dfs(sc, st, 6, 300000, ws, [](const SymbolicState&) {});
  CHECK(!atk);
  CHECK(!ws.capped);
}

TEST_CASE("goal checking on leaky toy protocols", "[transition]") {
  SECTION("plaintext nonce violates secrecy immediately") {
    Scenario sc = instantiate_sessions(parse_anb("Protocol: ToyLeak\n"
                                                 "Types: Agent A,B; Number N\n"
                                                 "Knowledge: A: A,B; B: A,B\n"
                                                 "Actions:\n"
                                                 "A -> B: N\n"
                                                 "Goals:\n"
                                                 "N secret between A,B\n"),
                                       1);
    CHECK(sc.initial_states.size() == 4);
    const SymbolicState& st = find_initial(sc, "A1=h1 B1=h2");
    auto kids = successors(st);
    REQUIRE(kids.size() == 2);  // A sends in clear; B accepts anything
    for (const auto& kid : kids) {
      auto atk = check_goals(kid, sc);
      REQUIRE(atk.has_value());
      CHECK(atk->kind == Goal::Secrecy);
      CHECK(atk->goal_index == 0);
    }
  }

  SECTION("plaintext nonce fails agreement immediately") {
    Scenario sc = instantiate_sessions(parse_anb("Protocol: ToyAuth\n"
                                                 "Types: Agent A,B; Number N\n"
                                                 "Knowledge: A: A,B; B: A,B\n"
                                                 "Actions:\n"
                                                 "A -> B: N\n"
                                                 "Goals:\n"
                                                 "B authenticates A on N\n"),
                                       1);
    const SymbolicState& st = find_initial(sc, "A1=h1 B1=h2");
    auto kids = successors(st);
    REQUIRE(kids.size() == 2);
    CHECK(kids[1].trace[0].role == "B");
    auto direct = check_goals(kids[1], sc);  // B commits on a spoofed value
    REQUIRE(direct.has_value());
    CHECK(direct->kind == Goal::Authentication);
    CHECK(direct->witness.depth == 1);
    CHECK(trace_realizable(sc, direct->witness, direct->witness_subst));

    WalkStats ws;
    auto atk = dfs(sc, st, 2, 1000, ws, [](const SymbolicState&) {});
    REQUIRE(atk.has_value());
    CHECK(atk->kind == Goal::Authentication);
    CHECK(atk->witness.depth <= 2);

    // A commit whose claimed peer is the attacker is vacuous.
    const SymbolicState& alone = find_initial(sc, "B1=h1");
    WalkStats ws2;
    CHECK(!dfs(sc, alone, 2, 1000, ws2, [](const SymbolicState&) {}));
  }
}

TEST_CASE("goal checking on pre-shared-key toy protocols", "[transition]") {
  auto safe_everywhere = [](const std::string& src, std::uint32_t depth) {
    Scenario sc = instantiate_sessions(parse_anb(src), 1);
    REQUIRE(sc.initial_states.size() == 4);
    for (const auto& st : sc.initial_states) {
      WalkStats ws;
      auto atk = dfs(sc, st, depth, 5000, ws, [](const SymbolicState&) {});
      CHECK(!atk);
      CHECK(!ws.capped);
    }
  };

  SECTION("encrypted nonce stays secret") {
    safe_everywhere(
        "Protocol: ToySec\n"
        "Types: Agent A,B; Number N; Function sk\n"
        "Knowledge: A: A,B,sk(A,B); B: A,B,sk(A,B)\n"
        "Actions:\n"
        "A -> B: {| N |}sk(A,B)\n"
        "Goals:\n"
        "N secret between A,B\n",
        2);
  }

  SECTION("authenticated nonce reaches agreement") {
    safe_everywhere(
        "Protocol: ToyAuth2\n"
        "Types: Agent A,B; Number N; Function sk\n"
        "Knowledge: A: A,B,sk(A,B); B: A,B,sk(A,B)\n"
        "Actions:\n"
        "A -> B: {| A,N |}sk(A,B)\n"
        "Goals:\n"
        "B authenticates A on N\n",
        2);
  }
}

TEST_CASE("a later key leak re-opens stored ciphertext", "[transition]") {
  Scenario sc = instantiate_sessions(parse_anb("Protocol: ToyStore\n"
                                               "Types: Agent A,B; Number N; Function sk\n"
                                               "Knowledge: A: A,B,sk(A,B); B: A,B,sk(A,B)\n"
                                               "Actions:\n"
                                               "A -> B: {| N |}sk(A,B)\n"
                                               "B -> A: sk(A,B)\n"
                                               "Goals:\n"
                                               "N secret between A,B\n"),
                                     1);
  const SymbolicState& st = find_initial(sc, "A1=h1 B1=h2");

  auto first = successors(st);
  REQUIRE(first.size() == 1);  // only A can move: B's key is not yet public
  CHECK(first[0].trace[0].role == "A");
  CHECK(!check_goals(first[0], sc));  // ciphertext alone leaks nothing

  WalkStats ws;
  auto atk = dfs(sc, first[0], 3, 1000, ws, [](const SymbolicState&) {});
  REQUIRE(atk.has_value());
  CHECK(atk->kind == Goal::Secrecy);
  CHECK(atk->witness.depth == 2);  // B's key disclosure re-opens the ciphertext
  CHECK(trace_realizable(sc, atk->witness, atk->witness_subst));
}

TEST_CASE("reachable stores stay oracle-sound", "[transition]") {
  Scenario sc = load("sso_flawed.AnB", 1);
  const SymbolicState& st = find_initial(sc, "C1=h1 idp1=idp SP1=h2");
  WalkStats ws;
  std::size_t unrealizable = 0;
  dfs(sc, st, 4, 4000, ws, [&](const SymbolicState& s) {
    if (!trace_realizable(sc, s, Subst{})) ++unrealizable;
  });
  CHECK(!ws.capped);
  CHECK(unrealizable == 0);
}
