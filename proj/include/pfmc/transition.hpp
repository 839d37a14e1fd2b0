#pragma once

// Symbolic protocol states and the adversary-centric successor relation.
// A transition picks one honest strand, delivers its pending receives as
// deducibility constraints over the current attacker knowledge, publishes its
// next send into that knowledge, and branches once per solved form of the
// extended constraint store. States carry reduced stores (every goal a
// variable), so re-solving never re-branches decisions taken by earlier
// transitions. Goal predicates decide whether a state is an attack.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pfmc/anb.hpp"
#include "pfmc/constraints.hpp"
#include "pfmc/strands.hpp"

namespace pfmc {

struct TransitionRecord {
  std::string role;
  int session = 0;
  TermPtr actor;
  TermList consumed;  // delivered wire messages, in step order
  TermPtr produced;   // emitted wire; null when the block was a trailing
                      // run of receives at the strand's end
  std::vector<EventFact> events_added;
};

struct SymbolicState {
  bool synthetic_root = false;  // scenario root whose children are the
                                // session-assignment initial states
  std::vector<Strand> strands;  // honest strands; consumed steps are dropped,
                                // finished strands are removed
  ConstraintStore store;        // reduced: every goal a variable
  std::vector<EventFact> events;
  std::vector<TransitionRecord> trace;
  std::uint32_t depth = 0;  // == trace.size()

  // Attacker knowledge: observed wires interleaved with the decomposition
  // products solving justified. Every constraint's knowledge is a prefix.
  const TermList& knowledge() const { return store.knowledge(); }
};

inline EventFact subst_event(const Subst& s, const EventFact& e) {
  EventFact out = e;
  if (out.actor) out.actor = s.apply(out.actor);
  if (out.peer) out.peer = s.apply(out.peer);
  if (out.payload) out.payload = s.apply(out.payload);
  out.parties = s.apply_all(out.parties);
  return out;
}

inline Step subst_step(const Subst& s, const Step& st) {
  Step out = st;
  out.payload = s.apply(out.payload);
  out.wire = s.apply(out.wire);
  for (auto& e : out.events) e = subst_event(s, e);
  return out;
}

inline bool event_eq(const EventFact& a, const EventFact& b) {
  auto te = [](const TermPtr& x, const TermPtr& y) {
    return (!x && !y) || (x && y && term_eq(x, y));
  };
  if (a.kind != b.kind || a.goal_index != b.goal_index || !te(a.actor, b.actor) ||
      !te(a.peer, b.peer) || !te(a.payload, b.payload) ||
      a.parties.size() != b.parties.size())
    return false;
  for (std::size_t i = 0; i < a.parties.size(); ++i)
    if (!term_eq(a.parties[i], b.parties[i])) return false;
  return true;
}

inline bool strand_eq(const Strand& a, const Strand& b) {
  if (a.role != b.role || a.session != b.session || !term_eq(a.agent, b.agent) ||
      a.steps.size() != b.steps.size())
    return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    const Step& x = a.steps[i];
    const Step& y = b.steps[i];
    if (x.kind != y.kind || x.action_index != y.action_index ||
        !term_eq(x.wire, y.wire) || !term_eq(x.payload, y.payload) ||
        x.events.size() != y.events.size())
      return false;
    for (std::size_t j = 0; j < x.events.size(); ++j)
      if (!event_eq(x.events[j], y.events[j])) return false;
  }
  return true;
}

// Structural identity, used to deduplicate successors that distinct solver
// branches mapped to the same state. Traces are excluded: equal states under
// the same parent necessarily recorded equal transitions.
inline bool state_eq(const SymbolicState& a, const SymbolicState& b) {
  if (a.synthetic_root != b.synthetic_root ||
      a.strands.size() != b.strands.size() || a.events.size() != b.events.size())
    return false;
  for (std::size_t i = 0; i < a.strands.size(); ++i)
    if (!strand_eq(a.strands[i], b.strands[i])) return false;
  for (std::size_t i = 0; i < a.events.size(); ++i)
    if (!event_eq(a.events[i], b.events[i])) return false;
  return store_eq(a.store, b.store);
}

// One successor per (strand, maximal block of pending receives up to and
// including the next send or the strand's end, solved form of the store
// extended by the receives' constraints). Unsatisfiable blocks are dropped.
// Deterministic order: strand index ascending, then solver stream order.
// A non-null `cancel` aborts cooperatively: `aborted` is set and the partial
// result must be discarded.
inline std::vector<SymbolicState> successors(const SymbolicState& st,
                                             const std::atomic<bool>* cancel,
                                             bool& aborted) {
  aborted = false;
  std::vector<SymbolicState> out;
  if (st.synthetic_root) return out;
  for (std::size_t si = 0; si < st.strands.size(); ++si) {
    const Strand& sd = st.strands[si];
    std::size_t nrecv = 0;
    while (nrecv < sd.steps.size() && sd.steps[nrecv].kind == StepKind::Recv)
      ++nrecv;
    const bool has_send = nrecv < sd.steps.size();
    const std::size_t block = has_send ? nrecv + 1 : nrecv;

    auto emit = [&](const Subst& sigma, ConstraintStore solved) {
      SymbolicState nx;
      nx.store = has_send
                     ? solved.with_knowledge(sigma.apply(sd.steps[nrecv].wire))
                     : std::move(solved);
      nx.strands.reserve(st.strands.size());
      for (std::size_t t = 0; t < st.strands.size(); ++t) {
        const Strand& old = st.strands[t];
        const std::size_t from = t == si ? block : 0;
        if (from >= old.steps.size()) continue;  // finished strands drop out
        Strand ns;
        ns.role = old.role;
        ns.session = old.session;
        ns.agent = sigma.apply(old.agent);
        ns.steps.reserve(old.steps.size() - from);
        for (std::size_t k = from; k < old.steps.size(); ++k)
          ns.steps.push_back(subst_step(sigma, old.steps[k]));
        nx.strands.push_back(std::move(ns));
      }
      nx.events.reserve(st.events.size());
      for (const auto& e : st.events) nx.events.push_back(subst_event(sigma, e));
      TransitionRecord rec;
      rec.role = sd.role;
      rec.session = sd.session;
      rec.actor = sigma.apply(sd.agent);
      for (std::size_t k = 0; k < nrecv; ++k)
        rec.consumed.push_back(sigma.apply(sd.steps[k].wire));
      if (has_send) rec.produced = sigma.apply(sd.steps[nrecv].wire);
      for (std::size_t k = 0; k < block; ++k)
        for (const auto& e : sd.steps[k].events) {
          EventFact ne = subst_event(sigma, e);
          rec.events_added.push_back(ne);
          nx.events.push_back(std::move(ne));
        }
      nx.trace = st.trace;
      nx.trace.push_back(std::move(rec));
      nx.depth = st.depth + 1;
      for (const auto& prev : out)
        if (state_eq(prev, nx)) return;
      out.push_back(std::move(nx));
    };

    if (nrecv == 0) {
      emit(Subst{}, st.store);
    } else {
      ConstraintStore base = st.store;
      for (std::size_t k = 0; k < nrecv; ++k)
        base = base.with_goal(sd.steps[k].wire);
      SolutionStream stream(base, cancel);
      while (auto sf = stream.next_solved())
        emit(sf->sigma, std::move(sf->store));
      if (stream.cancelled()) {
        aborted = true;
        return out;
      }
    }
  }
  return out;
}

inline std::vector<SymbolicState> successors(const SymbolicState& st) {
  bool aborted = false;
  return successors(st, nullptr, aborted);
}

// A bounded scenario: canonical session assignments of roles to agents, each
// yielding one initial state, grouped under a synthetic root so a whole run
// is a single lazy tree (assignment states have depth 0).
struct Scenario {
  ProtocolSpec spec;
  TermPtr intruder;
  TermList honest_agents;   // agent constants the intruder never controls
  TermList agent_universe;  // honest agents then the intruder
  SymbolicState root;
  std::vector<SymbolicState> initial_states;
};

namespace transition_detail {

inline AtomKind atom_kind_for(DeclKind k) {
  switch (k) {
    case DeclKind::Agent:
      return AtomKind::Agent;
    case DeclKind::Number:
      return AtomKind::Number;
    default:
      return AtomKind::Constant;
  }
}

inline std::string session_name(const std::string& base, int s) {
  return base + "#" + std::to_string(s);
}

inline bool contains_name(const std::vector<std::string>& xs,
                          const std::string& n) {
  for (const auto& x : xs)
    if (x == n) return true;
  return false;
}

inline bool contains_index(const std::vector<std::uint32_t>& xs,
                           std::uint32_t v) {
  for (auto x : xs)
    if (x == v) return true;
  return false;
}

// All variables mentioned by the events of a strand template (a goal may
// name a peer the role itself never exchanges).
inline std::vector<std::uint32_t> event_vars(const Strand& tpl) {
  std::vector<std::uint32_t> vs;
  for (const auto& stp : tpl.steps)
    for (const auto& e : stp.events) {
      if (e.actor) collect_vars(e.actor, vs);
      if (e.peer) collect_vars(e.peer, vs);
      if (e.payload) collect_vars(e.payload, vs);
      for (const auto& p : e.parties) collect_vars(p, vs);
    }
  return vs;
}

}  // namespace transition_detail

// Instantiates `n_sessions` parallel sessions. Variable roles range over two
// honest agent constants and the intruder; lowercase roles are fixed honest
// constants. Assignments violating a `where` inequality or leaving no honest
// strand are dropped, and assignments equal up to a permutation of the honest
// constants or of the sessions are collapsed to one canonical representative.
// Intruder-played strands are removed; their knowledge (and every variable
// role's knowledge, peers ranging over all agents) seeds the attacker.
inline Scenario instantiate_sessions(const ProtocolSpec& spec, int n_sessions) {
  using transition_detail::atom_kind_for;
  using transition_detail::session_name;
  if (n_sessions < 1) throw ProtocolError("session count must be positive");
  Scenario sc;
  sc.spec = spec;
  auto templates = roles_to_strands(spec);

  std::vector<std::string> acting;  // declaration order
  for (const auto& r : spec.roles)
    if (templates.count(r)) acting.push_back(r);
  std::vector<std::string> var_roles;  // every uppercase Agent declaration
  for (const auto& [name, kind] : spec.decls)
    if (kind == DeclKind::Agent && spec.is_var(name)) var_roles.push_back(name);

  TermPtr h1 = mk_atom("h1", AtomKind::Agent);
  TermPtr h2 = mk_atom("h2", AtomKind::Agent);
  TermPtr intr = mk_atom("i", AtomKind::Agent);
  sc.intruder = intr;
  sc.honest_agents = {h1, h2};
  for (const auto& [name, kind] : spec.decls)
    if (kind == DeclKind::Agent && !spec.is_var(name)) {
      if (name == "h1" || name == "h2" || name == "i")
        throw ProtocolError("agent name '" + name +
                            "' is reserved for session instantiation");
      sc.honest_agents.push_back(mk_atom(name, AtomKind::Agent));
    }
  sc.agent_universe = sc.honest_agents;
  sc.agent_universe.push_back(intr);
  const TermList pool = {h1, h2, intr};  // assignment values for variable roles

  std::map<std::uint32_t, std::string> var_name;
  for (const auto& [nm, ix] : spec.var_index) var_name[ix] = nm;

  // Per-(session, role) renaming of fresh and receive-bound variables; shared
  // by every assignment so solver variable indices stay deterministic.
  std::uint32_t next_index = 0;
  for (const auto& [nm, ix] : spec.var_index)
    next_index = std::max(next_index, ix + 1);
  std::map<std::string, RoleVars> role_vars;
  for (const auto& r : acting) role_vars[r] = classify_role_vars(spec, r);
  std::vector<std::map<std::string, Subst>> skeleton(
      static_cast<std::size_t>(n_sessions) + 1);
  for (int s = 1; s <= n_sessions; ++s)
    for (const auto& r : acting) {
      const RoleVars& rv = role_vars[r];
      Subst sub;
      for (auto v : rv.fresh) {
        const std::string& nm = var_name.at(v);
        if (nm == r) continue;  // the role's own identity is assigned, not fresh
        sub.bind(v, mk_atom(session_name(nm, s),
                            atom_kind_for(spec.decl_kind.at(nm))));
      }
      for (auto v : rv.bound) {
        if (var_name.at(v) == r) continue;
        sub.bind(v, mk_var(session_name(var_name.at(v), s), next_index++));
      }
      for (auto v : transition_detail::event_vars(templates.at(r))) {
        if (sub.find(v) || transition_detail::contains_index(rv.params, v) ||
            var_name.at(v) == r)
          continue;
        sub.bind(v, mk_var(session_name(var_name.at(v), s), next_index++));
      }
      skeleton[static_cast<std::size_t>(s)][r] = std::move(sub);
    }

  // Attacker initial knowledge: public agent names, the intruder's channel
  // material, and every variable role's knowledge played by the intruder with
  // its peers ranging over all agents. Independent of the assignment.
  TermList k0;
  auto grant = [&](const TermPtr& t) {
    if (!contains(k0, t)) k0.push_back(t);
  };
  for (const auto& a : sc.agent_universe) grant(a);
  grant(mk_atom("%chpub"));
  grant(mk_inv(mk_apply("%chpub", {intr})));
  for (const auto& a : sc.agent_universe) {
    grant(mk_apply("%chk", {intr, a}));
    grant(mk_apply("%chk", {a, intr}));
  }
  for (const auto& r : var_roles) {
    auto it = spec.knowledge.find(r);
    if (it == spec.knowledge.end()) continue;
    std::vector<std::uint32_t> others;  // variables of the knowledge terms
    for (const auto& t : it->second) collect_vars(t, others);
    std::vector<std::uint32_t> free_vars;
    for (auto v : others)
      if (var_name.at(v) != r && !transition_detail::contains_index(free_vars, v))
        free_vars.push_back(v);
    std::vector<std::size_t> odo(free_vars.size(), 0);
    while (true) {
      Subst sub;
      sub.bind(spec.var_index.at(r), intr);
      for (std::size_t k = 0; k < free_vars.size(); ++k) {
        const std::string& nm = var_name.at(free_vars[k]);
        sub.bind(free_vars[k], spec.is_role_var(nm)
                                   ? sc.agent_universe[odo[k]]
                                   : mk_atom(session_name(nm, 0),
                                             atom_kind_for(spec.decl_kind.at(nm))));
      }
      for (const auto& t : it->second) grant(sub.apply(t));
      std::size_t k = 0;
      for (; k < odo.size(); ++k) {
        if (++odo[k] < sc.agent_universe.size()) break;
        odo[k] = 0;
      }
      if (k == odo.size()) break;
    }
  }
  ConstraintStore k0_store;
  for (const auto& t : k0) k0_store = k0_store.with_knowledge(t);

  sc.root.synthetic_root = true;
  sc.root.store = k0_store;

  // Enumerate assignment tuples: one pool choice per (session, variable role).
  const std::size_t width = var_roles.size();
  using Tuple = std::vector<std::vector<int>>;  // [session][role pos]
  std::vector<Tuple> canonical;
  Tuple cur(static_cast<std::size_t>(n_sessions), std::vector<int>(width, 0));
  bool fixed_acting = false;
  for (const auto& r : acting)
    if (!spec.is_var(r)) fixed_acting = true;

  auto resolve = [&](const std::string& name, const std::vector<int>& row)
      -> TermPtr {
    for (std::size_t k = 0; k < width; ++k)
      if (var_roles[k] == name) return pool[static_cast<std::size_t>(row[k])];
    auto it = spec.decl_kind.find(name);
    if (it != spec.decl_kind.end() && it->second == DeclKind::Agent &&
        !spec.is_var(name))
      return mk_atom(name, AtomKind::Agent);
    return nullptr;
  };
  auto admissible = [&](const Tuple& t) {
    for (const auto& row : t)
      for (const auto& [x, y] : spec.inequalities) {
        TermPtr rx = resolve(x, row);
        TermPtr ry = resolve(y, row);
        if (rx && ry && term_eq(rx, ry)) return false;
      }
    if (fixed_acting) return true;
    for (const auto& row : t)
      for (int v : row)
        if (v != 2) return true;  // some honest strand survives
    return false;
  };
  auto is_canonical = [&](const Tuple& t) {
    std::vector<std::size_t> order(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) order[k] = k;
    do {
      for (int swap01 = 0; swap01 < 2; ++swap01) {
        Tuple v(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) {
          v[k] = t[order[k]];
          if (swap01)
            for (int& x : v[k]) x = x == 0 ? 1 : (x == 1 ? 0 : 2);
        }
        if (v < t) return false;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    return true;
  };

  while (true) {
    if (width == 0 && !canonical.empty()) break;
    if (admissible(cur) && is_canonical(cur)) canonical.push_back(cur);
    if (width == 0) break;
    std::size_t s = 0, k = 0;
    bool done = true;
    for (s = 0; s < cur.size() && done; ++s)
      for (k = 0; k < width && done; ++k) {
        if (++cur[s][k] < static_cast<int>(pool.size())) done = false;
        else cur[s][k] = 0;
      }
    if (done) break;
  }

  for (const auto& tup : canonical) {
    SymbolicState init;
    init.store = k0_store;
    for (int s = 1; s <= n_sessions; ++s) {
      const auto& row = tup[static_cast<std::size_t>(s - 1)];
      for (const auto& r : acting) {
        TermPtr agent;
        if (spec.is_var(r)) {
          agent = resolve(r, row);
          if (term_eq(agent, intr)) continue;  // the attacker plays this slot
        } else {
          agent = mk_atom(r, AtomKind::Agent);
        }
        Subst sub = skeleton[static_cast<std::size_t>(s)].at(r);
        if (spec.is_var(r)) sub.bind(spec.var_index.at(r), agent);
        for (auto v : role_vars[r].params) {
          const std::string& nm = var_name.at(v);
          if (nm == r) continue;
          sub.bind(v, spec.is_role_var(nm)
                          ? resolve(nm, row)
                          : mk_atom(session_name(nm, s),
                                    atom_kind_for(spec.decl_kind.at(nm))));
        }
        Strand sd = templates.at(r);
        sd.agent = agent;
        sd.session = s;
        for (auto& stp : sd.steps) stp = subst_step(sub, stp);
        init.strands.push_back(std::move(sd));
      }
    }
    sc.initial_states.push_back(std::move(init));
  }
  return sc;
}

struct Attack {
  Goal::Kind kind;
  int goal_index = 0;
  SymbolicState witness;
  Subst witness_subst;  // satisfies the witness store extended per the goal
};

namespace transition_detail {

// Product of honest-agent choices for a list of agent views: a ground honest
// view passes through, a variable view is bound to each honest agent in turn,
// anything else (the intruder, a composite) kills the combination.
inline std::vector<Subst> honest_bindings(const TermList& views,
                                          const TermList& honest,
                                          const TermPtr& intruder) {
  std::vector<Subst> out{Subst{}};
  for (const auto& v : views) {
    std::vector<Subst> next;
    for (const auto& s : out) {
      TermPtr cur = s.apply(v);
      if (cur->kind == TermKind::Atom) {
        if (!term_eq(cur, intruder) && contains(honest, cur)) next.push_back(s);
      } else if (cur->kind == TermKind::Var) {
        for (const auto& h : honest) {
          Subst ns = s;
          ns.bind(cur->var_index, h);
          next.push_back(std::move(ns));
        }
      }
    }
    out = std::move(next);
    if (out.empty()) break;
  }
  return out;
}

}  // namespace transition_detail

// First violated goal in declaration order, if any.
//
// Secrecy(m, parties) is violated iff some claim whose stated parties can all
// be honest agents leaves the store satisfiable once "knowledge |- payload"
// is added. Authentication(A, B, m) (non-injective agreement) is violated iff
// some commit with an honest peer admits a solved form under which no running
// event's (actor, peer, payload) is syntactically equal to the commit's: the
// solved form's remaining variables can each be grounded by fresh attacker
// constants, so any running matching only under a proper unifier is avoided.
inline std::optional<Attack> check_goals(const SymbolicState& st,
                                         const Scenario& sc,
                                         const std::atomic<bool>* cancel,
                                         bool& aborted) {
  aborted = false;
  if (st.synthetic_root || st.events.empty()) return std::nullopt;
  for (int gi = 0; gi < static_cast<int>(sc.spec.goals.size()); ++gi) {
    const Goal& g = sc.spec.goals[gi];
    std::vector<const EventFact*> running;
    for (const auto& e : st.events)
      if (e.goal_index == gi && e.kind == EventFact::Running)
        running.push_back(&e);
    for (const auto& e : st.events) {
      if (e.goal_index != gi) continue;
      if (e.kind == EventFact::SecretClaim) {
        for (const auto& sh : transition_detail::honest_bindings(
                 e.parties, sc.honest_agents, sc.intruder)) {
          auto sub = st.store.substituted(sh);
          if (!sub) continue;
          SolutionStream ss(sub->with_goal(sh.apply(e.payload)), cancel);
          if (auto sol = ss.next()) {
            Attack atk;
            atk.kind = g.kind;
            atk.goal_index = gi;
            atk.witness = st;
            auto w = compose(*sol, sh);
            atk.witness_subst = w ? std::move(*w) : sh;
            return atk;
          }
          if (ss.cancelled()) {
            aborted = true;
            return std::nullopt;
          }
        }
      } else if (e.kind == EventFact::Commit) {
        for (const auto& sh : transition_detail::honest_bindings(
                 {e.peer}, sc.honest_agents, sc.intruder)) {
          auto sub = st.store.substituted(sh);
          if (!sub) continue;
          auto matches = [&](const Subst& s2) {
            for (const EventFact* r : running)
              if (term_eq(s2.apply(sh.apply(e.actor)),
                          s2.apply(sh.apply(r->peer))) &&
                  term_eq(s2.apply(sh.apply(e.peer)),
                          s2.apply(sh.apply(r->actor))) &&
                  term_eq(s2.apply(sh.apply(e.payload)),
                          s2.apply(sh.apply(r->payload))))
                return true;
            return false;
          };
          if (matches(Subst{})) continue;  // equal now, equal under any grounding
          SolutionStream ss(*sub, cancel);
          while (auto sf = ss.next_solved()) {
            if (matches(sf->sigma)) continue;
            Attack atk;
            atk.kind = g.kind;
            atk.goal_index = gi;
            atk.witness = st;
            auto w = compose(sf->sigma, sh);
            atk.witness_subst = w ? std::move(*w) : sh;
            return atk;
          }
          if (ss.cancelled()) {
            aborted = true;
            return std::nullopt;
          }
        }
      }
    }
  }
  return std::nullopt;
}

inline std::optional<Attack> check_goals(const SymbolicState& st,
                                         const Scenario& sc) {
  bool aborted = false;
  return check_goals(st, sc, nullptr, aborted);
}

inline std::string render_goal(const Goal& g) {
  switch (g.kind) {
    case Goal::Authentication:
      return g.a + " authenticates " + g.b + " on " + render_bare(g.payload);
    case Goal::SecureChannel:
      return g.a + " *->* " + g.b + ": " + render_bare(g.payload);
    case Goal::Secrecy: {
      std::string out = render_bare(g.payload) + " secret between ";
      for (std::size_t i = 0; i < g.parties.size(); ++i)
        out += (i ? "," : "") + g.parties[i];
      return out;
    }
  }
  return "?";
}

// Numbered transitions with the witness instantiation applied. The total view
// composes the witness bindings over the store's accumulated substitution, so
// records written before later instantiations render fully instantiated.
inline std::string render_trace(const SymbolicState& st, const Subst& witness) {
  Subst total = witness;
  if (auto c = compose(witness, st.store.accumulated())) total = std::move(*c);
  std::string out;
  for (std::size_t i = 0; i < st.trace.size(); ++i) {
    const TransitionRecord& r = st.trace[i];
    if (i) out += "\n";
    out += std::to_string(i + 1) + ". " + r.role + "#" +
           std::to_string(r.session) + "(" + render(total.apply(r.actor)) + ")";
    for (const auto& c : r.consumed)
      out += "\n     <- " + render(total.apply(c));
    if (r.produced) out += "\n     -> " + render(total.apply(r.produced));
  }
  return out;
}

}  // namespace pfmc
