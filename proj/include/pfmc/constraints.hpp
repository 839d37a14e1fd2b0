#pragma once

// Lazy-intruder deducibility constraints. A store holds an ordered list of
// "knowledge |- goal" constraints over one monotonically growing knowledge
// list, plus the substitution accumulated by earlier solving. solve() reduces
// a store to solved forms (every goal a variable) and emits one substitution
// per successful reduction path, lazily and in deterministic order.
//
// Reduction rules: pairs in knowledge are split eagerly (pairing is
// invertible); encrypted knowledge whose decryption key is composable without
// instantiation is opened eagerly at the earliest prefix that justifies the
// key; encrypted knowledge whose key needs instantiation case-splits into
// analyze (key sub-constraint at that prefix, body exposed) vs skip;
// otherwise the first non-variable goal is unified against knowledge entries
// newest-first, then composed from its immediate parts. Variable goals are
// terminal: they impose no instantiation until some other constraint does.

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pfmc/closure.hpp"
#include "pfmc/term.hpp"

namespace pfmc {

// View of one deducibility constraint: the goal must be synthesized from the
// knowledge the attacker had when the constrained message was consumed.
struct Constraint {
  std::span<const TermPtr> knowledge;
  TermPtr goal;
};

class ConstraintStore {
 public:
  ConstraintStore() = default;

  std::size_t size() const { return goals_.size(); }
  bool empty() const { return goals_.empty(); }

  Constraint constraint(std::size_t i) const {
    return {std::span<const TermPtr>(know_.data(), goals_[i].second),
            goals_[i].first};
  }

  // Knowledge list of the last constraint (all earlier ones are prefixes).
  const std::vector<TermPtr>& knowledge() const { return know_; }
  const Subst& accumulated() const { return accumulated_; }

  // Appends one constraint. `knowledge` must extend the current list, and
  // variables in the new suffix must originate in an earlier goal; violations
  // signal a transition-system bug.
  ConstraintStore add_constraint(const std::vector<TermPtr>& knowledge,
                                 const TermPtr& goal) const {
    if (knowledge.size() < know_.size())
      throw std::logic_error("constraint knowledge shrank below predecessor");
    for (std::size_t i = 0; i < know_.size(); ++i)
      if (!term_eq(know_[i], knowledge[i]))
        throw std::logic_error("constraint knowledge does not extend predecessor");
    ConstraintStore out = *this;
    for (std::size_t i = know_.size(); i < knowledge.size(); ++i)
      out.append_knowledge(knowledge[i]);
    out.goals_.emplace_back(accumulated_.apply(goal),
                            static_cast<std::uint32_t>(out.know_.size()));
    return out;
  }

  // Appends one observed message; visible only to constraints added later.
  ConstraintStore with_knowledge(const TermPtr& t) const {
    ConstraintStore out = *this;
    out.append_knowledge(t);
    return out;
  }

  // Appends a constraint over the full current knowledge list.
  ConstraintStore with_goal(const TermPtr& goal) const {
    ConstraintStore out = *this;
    out.goals_.emplace_back(accumulated_.apply(goal),
                            static_cast<std::uint32_t>(out.know_.size()));
    return out;
  }

  // Applies `s` to every constraint and composes it into the accumulated
  // substitution. Empty when the composition is inconsistent.
  std::optional<ConstraintStore> substituted(const Subst& s) const {
    if (s.empty()) return *this;
    auto acc = compose(s, accumulated_);
    if (!acc) return std::nullopt;
    ConstraintStore out;
    out.know_ = s.apply_all(know_);
    out.goals_.reserve(goals_.size());
    for (const auto& [g, klen] : goals_) out.goals_.emplace_back(s.apply(g), klen);
    out.accumulated_ = std::move(*acc);
    return out;
  }

  // Structural equality of constraints and knowledge; the accumulated
  // substitution is derived history and deliberately excluded.
  friend bool store_eq(const ConstraintStore& a, const ConstraintStore& b) {
    if (a.know_.size() != b.know_.size() || a.goals_.size() != b.goals_.size())
      return false;
    for (std::size_t i = 0; i < a.know_.size(); ++i)
      if (!term_eq(a.know_[i], b.know_[i])) return false;
    for (std::size_t i = 0; i < a.goals_.size(); ++i)
      if (a.goals_[i].second != b.goals_[i].second ||
          !term_eq(a.goals_[i].first, b.goals_[i].first))
        return false;
    return true;
  }

 private:
  friend class SolutionStream;

  // Knowledge variables must originate in an earlier goal, or the prefix
  // semantics of later constraints would be meaningless.
  void append_knowledge(const TermPtr& entry) {
    TermPtr t = accumulated_.apply(entry);
    std::vector<std::uint32_t> vs;
    collect_vars(t, vs);
    if (!vs.empty()) {
      std::vector<std::uint32_t> originated;
      for (const auto& [g, klen] : goals_) {
        (void)klen;
        collect_vars(g, originated);
      }
      for (auto v : vs) {
        bool ok = false;
        for (auto u : originated) ok = ok || u == v;
        if (!ok)
          throw std::logic_error(
              "knowledge variable does not originate in an earlier goal");
      }
    }
    know_.push_back(std::move(t));
  }

  std::vector<TermPtr> know_;
  std::vector<std::pair<TermPtr, std::uint32_t>> goals_;  // (goal, prefix len)
  Subst accumulated_;
};

inline std::string dump(const ConstraintStore& st) {
  std::string out;
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (i) out += " ; ";
    Constraint c = st.constraint(i);
    out += "[";
    for (std::size_t j = 0; j < c.knowledge.size(); ++j) {
      if (j) out += ", ";
      out += render(c.knowledge[j]);
    }
    out += "] |- ";
    out += render(c.goal);
  }
  return out;
}

namespace solver_detail {

// Prefix lengths order every justification: a knowledge entry at index p is
// visible to a constraint iff its prefix length exceeds p, and analysis
// bodies are inserted at the earliest prefix whose key derivation justifies
// them, so no body can ever feed the derivation of its own key.
constexpr std::uint32_t kUndecided = 0xffffffffu;

struct SGoal {
  TermPtr goal;
  std::uint32_t klen;
};

struct Node {
  std::vector<TermPtr> know;
  // Per knowledge entry: the smallest prefix length whose analysis decision
  // (eager open, analyze, or skip) covers it; kUndecided if none yet.
  std::vector<std::uint32_t> mark;
  std::vector<SGoal> goals;
  Subst sigma;
};

// Inserts `t` so that exactly the constraints whose prefix length was >= pos
// can see it; skipped when `t` is already visible below pos.
inline void insert_knowledge(Node& n, std::uint32_t pos, const TermPtr& t) {
  for (std::uint32_t i = 0; i < pos; ++i)
    if (term_eq(n.know[i], t)) return;
  n.know.insert(n.know.begin() + pos, t);
  n.mark.insert(n.mark.begin() + pos, kUndecided);
  for (auto& g : n.goals)
    if (g.klen >= pos) ++g.klen;
  // Marks strictly above the insertion point shift with their entries; a mark
  // at exactly pos keeps covering the same constraints (their prefixes were
  // bumped past it), so moving it would reopen same-level decisions forever.
  for (auto& m : n.mark)
    if (m != kUndecided && m > pos) ++m;
}

inline TermPtr decryption_key(const TermPtr& t) {
  if (t->kind == TermKind::SymEnc) return t->args[0];
  if (t->kind == TermKind::AsymEnc) return mk_inv(t->args[0]);
  return nullptr;
}

// Pair splitting and eager ground-key analysis, to fixpoint. Ground keys need
// no case split: wherever the key is composable the key sub-constraint would
// be trivially satisfiable, so the body is added outright at the earliest
// such prefix (matching per-prefix saturation of the ground oracle).
inline void normalize(Node& n) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t j = 0; j < n.know.size(); ++j) {
      if (n.know[j]->kind != TermKind::Pair) continue;
      TermPtr a = n.know[j]->args[0];
      TermPtr b = n.know[j]->args[1];
      n.know[j] = a;
      n.mark[j] = kUndecided;
      insert_knowledge(n, static_cast<std::uint32_t>(j + 1), b);
      changed = true;
      --j;
    }
    // One shared prefix set serves every pending ground key: grow it a prefix
    // at a time, record for each key the first length that synthesizes it,
    // then apply the decisions in entry order against this layout. An entry
    // whose mark already sits at its floor j+1 can never improve.
    std::vector<std::pair<std::size_t, TermPtr>> pending;
    for (std::size_t j = 0; j < n.know.size(); ++j) {
      if (n.mark[j] <= static_cast<std::uint32_t>(j + 1)) continue;
      TermPtr key = decryption_key(n.know[j]);
      if (key && key->ground) pending.emplace_back(j, std::move(key));
    }
    if (pending.empty()) continue;
    std::vector<std::uint32_t> lmin(pending.size(), kUndecided);
    std::size_t unsettled = pending.size();
    TermSet have;
    for (std::size_t l = 0; l <= n.know.size() && unsettled > 0; ++l) {
      for (std::size_t pi = 0; pi < pending.size(); ++pi) {
        if (lmin[pi] != kUndecided) continue;
        if (!synth_from(have, pending[pi].second)) continue;
        lmin[pi] = static_cast<std::uint32_t>(l);
        --unsettled;
      }
      if (l < n.know.size()) have.insert(n.know[l]);
    }
    for (std::size_t pi = 0; pi < pending.size(); ++pi) {
      if (lmin[pi] == kUndecided) continue;
      std::size_t j = pending[pi].first;
      std::uint32_t q = std::max(static_cast<std::uint32_t>(j + 1), lmin[pi]);
      if (q >= n.mark[j]) continue;
      // A body already sitting at q (from solving an earlier store revision)
      // needs no re-insert: prefix bumps preserve the relative order of goal
      // prefixes and entry positions, so no goal that could justify the body
      // from below q can ever have caught up to position q.
      bool present =
          q < n.know.size() && term_eq(n.know[q], n.know[j]->args[1]);
      if (!present) insert_knowledge(n, q, n.know[j]->args[1]);
      // Record the decision after inserting: the body lands at q and the
      // shift pass must not move this entry's own mark.
      n.mark[j] = q;
      changed = true;
      // The insertion moved entries, so later cached lengths are stale;
      // restart the sweep. Earlier settled entries re-skip via their marks.
      if (!present) break;
    }
  }
}

inline bool apply_subst(Node& n, const Subst& s) {
  if (s.empty()) return true;  // identity: the node is already normalized
  auto ns = compose(s, n.sigma);
  if (!ns) return false;
  n.sigma = std::move(*ns);
  for (auto& t : n.know) t = s.apply(t);
  for (auto& g : n.goals) g.goal = s.apply(g.goal);
  normalize(n);
  return true;
}

inline Node build_root(const ConstraintStore& store) {
  Node root;
  root.know = store.knowledge();
  root.mark.assign(root.know.size(), kUndecided);
  root.goals.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    Constraint c = store.constraint(i);
    root.goals.push_back({c.goal, static_cast<std::uint32_t>(c.knowledge.size())});
  }
  normalize(root);
  return root;
}

constexpr std::size_t kNoGoal = static_cast<std::size_t>(-1);

inline std::size_t first_open_goal(const Node& n) {
  for (std::size_t i = 0; i < n.goals.size(); ++i)
    if (n.goals[i].goal->kind != TermKind::Var) return i;
  return kNoGoal;
}

// One reduction step on goal `gi`; returns the ordered branch alternatives
// (empty when the goal is stuck and the branch dies).
inline std::vector<Node> reduce(const Node& n, std::size_t gi) {
  std::vector<Node> out;
  const TermPtr g = n.goals[gi].goal;
  const std::uint32_t kl = n.goals[gi].klen;

  // Case-split analysis, newest entry first. Only fires when the decision can
  // depend on instantiation; fully ground prefixes were settled by normalize.
  for (std::uint32_t j = kl; j-- > 0;) {
    TermPtr key = decryption_key(n.know[j]);
    if (!key || kl >= n.mark[j]) continue;
    bool inst_dependent = !key->ground;
    for (std::uint32_t p = 0; p < kl && !inst_dependent; ++p)
      inst_dependent = !n.know[p]->ground;
    if (!inst_dependent) continue;
    // A body already exposed within this goal's prefix makes the split
    // vacuous: analyze and skip would explore the same solutions.
    bool body_visible = false;
    for (std::uint32_t p = 0; p < kl && !body_visible; ++p)
      body_visible = term_eq(n.know[p], n.know[j]->args[1]);
    if (body_visible) continue;
    Node analyze = n;
    insert_knowledge(analyze, kl, n.know[j]->args[1]);
    analyze.mark[j] = kl;
    analyze.goals.insert(analyze.goals.begin() + gi, SGoal{key, kl});
    normalize(analyze);
    Node skip = n;
    skip.mark[j] = kl;
    out.push_back(std::move(analyze));
    out.push_back(std::move(skip));
    return out;
  }

  // R-unify against non-variable knowledge, newest first. Variable entries
  // are redundant targets: anything they stand for was derivable from the
  // smaller knowledge where they originated, hence from this one.
  for (std::uint32_t j = kl; j-- > 0;) {
    if (n.know[j]->kind == TermKind::Var) continue;
    auto mgu = unify(g, n.know[j]);
    if (!mgu) continue;
    Node c = n;
    c.goals.erase(c.goals.begin() + gi);
    if (!apply_subst(c, *mgu)) continue;
    out.push_back(std::move(c));
  }

  // R-compose from immediate parts. Atoms and inverse keys are never
  // composable; applications additionally need the bare function symbol.
  TermList parts;
  switch (g->kind) {
    case TermKind::Pair:
    case TermKind::SymEnc:
    case TermKind::AsymEnc:
      parts = {g->args[0], g->args[1]};
      break;
    case TermKind::Apply:
      parts.push_back(mk_atom(g->name));
      for (const auto& a : g->args) parts.push_back(a);
      break;
    default:
      break;
  }
  if (!parts.empty()) {
    Node c = n;
    c.goals.erase(c.goals.begin() + gi);
    for (std::size_t i = parts.size(); i-- > 0;)
      c.goals.insert(c.goals.begin() + gi, SGoal{parts[i], kl});
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace solver_detail

// One solved form of a store: the substitution that reached it (relative to
// the stream's base store) plus the reduced store itself, whose knowledge
// carries the decomposition products and whose goals are all variables.
// Re-solving a reduced store never re-branches the decisions baked into it.
struct SolvedForm {
  Subst sigma;
  ConstraintStore store;
};

// Lazy, deterministic stream of solution substitutions: depth-first over the
// reduction alternatives, emitting each solved form's accumulated bindings.
// May repeat a substitution when distinct reduction paths agree.
class SolutionStream {
 public:
  // `cancel` (optional) aborts the enumeration cooperatively: once it reads
  // true, the stream reports exhaustion and `cancelled()` distinguishes the
  // abort from genuine unsatisfiability.
  explicit SolutionStream(const ConstraintStore& store,
                          const std::atomic<bool>* cancel = nullptr)
      : base_acc_(store.accumulated()), cancel_(cancel) {
    stack_.push_back(solver_detail::build_root(store));
  }

  bool cancelled() const { return cancelled_; }

  std::optional<Subst> next() {
    auto n = next_node();
    if (!n) return std::nullopt;
    return std::move(n->sigma);
  }

  std::optional<SolvedForm> next_solved() {
    auto n = next_node();
    if (!n) return std::nullopt;
    SolvedForm out;
    out.store.know_ = std::move(n->know);
    out.store.goals_.reserve(n->goals.size());
    for (const auto& g : n->goals) out.store.goals_.emplace_back(g.goal, g.klen);
    auto acc = compose(n->sigma, base_acc_);
    out.store.accumulated_ = acc ? std::move(*acc) : base_acc_;
    out.sigma = std::move(n->sigma);
    return out;
  }

 private:
  std::optional<solver_detail::Node> next_node() {
    while (!stack_.empty()) {
      if (cancel_ && cancel_->load(std::memory_order_relaxed)) {
        cancelled_ = true;
        stack_.clear();
        return std::nullopt;
      }
      solver_detail::Node n = std::move(stack_.back());
      stack_.pop_back();
      std::size_t gi = solver_detail::first_open_goal(n);
      if (gi == solver_detail::kNoGoal) return n;
      auto branches = solver_detail::reduce(n, gi);
      for (std::size_t i = branches.size(); i-- > 0;)
        stack_.push_back(std::move(branches[i]));
    }
    return std::nullopt;
  }

  std::vector<solver_detail::Node> stack_;
  Subst base_acc_;
  const std::atomic<bool>* cancel_ = nullptr;
  bool cancelled_ = false;
};

inline SolutionStream solve(const ConstraintStore& store) {
  return SolutionStream(store);
}

inline bool is_satisfiable(const ConstraintStore& store) {
  return SolutionStream(store).next().has_value();
}

inline std::vector<Subst> solve_all(const ConstraintStore& store,
                                    std::size_t limit = static_cast<std::size_t>(-1)) {
  std::vector<Subst> out;
  SolutionStream s(store);
  while (out.size() < limit) {
    auto sigma = s.next();
    if (!sigma) break;
    out.push_back(std::move(*sigma));
  }
  return out;
}

}  // namespace pfmc
