#pragma once

// Ground derivation closure for the Dolev-Yao attacker: analysis saturation
// (fixpoint decomposition) followed by top-down synthesis checks. This is the
// independent oracle the symbolic constraint solver is differential-tested
// against, so it stays deliberately simple and enumeration-based.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "pfmc/term.hpp"

namespace pfmc {

using TermSet = std::unordered_set<TermPtr, TermPtrHash, TermPtrEq>;

// Composition-only check: goal buildable from `have` by pairing, encrypting
// and applying public functions. Function symbols are usable only when the
// bare symbol atom itself is available. Inv is never composable.
inline bool synth_from(const TermSet& have, const TermPtr& goal) {
  if (have.count(goal)) return true;
  switch (goal->kind) {
    case TermKind::Pair:
    case TermKind::SymEnc:
    case TermKind::AsymEnc:
      return synth_from(have, goal->args[0]) && synth_from(have, goal->args[1]);
    case TermKind::Apply: {
      if (!have.count(mk_atom(goal->name))) return false;
      for (const auto& a : goal->args)
        if (!synth_from(have, a)) return false;
      return true;
    }
    default:
      return false;
  }
}

// Decompose to fixpoint: pairs always split; an encryption opens when its
// read key is synthesizable from what is already derivable. AsymEnc(k,m)
// opens with Inv(k); mk_inv normalization makes signatures {m}inv(k) open
// with the bare key k.
inline TermSet analyze_saturate(const TermList& knowledge) {
  TermSet s;
  for (const auto& t : knowledge) s.insert(t);
  bool changed = true;
  while (changed) {
    changed = false;
    TermList to_add;
    for (const auto& t : s) {
      switch (t->kind) {
        case TermKind::Pair:
          if (!s.count(t->args[0])) to_add.push_back(t->args[0]);
          if (!s.count(t->args[1])) to_add.push_back(t->args[1]);
          break;
        case TermKind::SymEnc:
          if (!s.count(t->args[1]) && synth_from(s, t->args[0]))
            to_add.push_back(t->args[1]);
          break;
        case TermKind::AsymEnc:
          if (!s.count(t->args[1]) && synth_from(s, mk_inv(t->args[0])))
            to_add.push_back(t->args[1]);
          break;
        default:
          break;
      }
    }
    for (auto& t : to_add)
      if (s.insert(std::move(t)).second) changed = true;
  }
  return s;
}

// Exact ground derivability: the analysis fixpoint makes the subsequent
// composition-only check complete for the free algebra.
inline bool derivable(const TermList& knowledge, const TermPtr& goal) {
  TermSet s = analyze_saturate(knowledge);
  return synth_from(s, goal);
}

// Enumerated closure with `depth` rounds of bounded composition on top of the
// analysis fixpoint. Apply generation uses arities observed anywhere in the
// initial knowledge. Size-capped; meant for small oracle inputs only.
inline TermSet ground_closure(const TermList& knowledge, unsigned depth,
                              std::size_t cap = 100000) {
  std::map<std::string, std::set<std::size_t>> arities;
  {
    TermList stack(knowledge.begin(), knowledge.end());
    TermSet seen;
    while (!stack.empty()) {
      TermPtr t = stack.back();
      stack.pop_back();
      if (!seen.insert(t).second) continue;
      if (t->kind == TermKind::Apply) arities[t->name].insert(t->args.size());
      for (const auto& a : t->args) stack.push_back(a);
    }
  }

  TermSet s = analyze_saturate(knowledge);
  for (unsigned round = 0; round < depth && s.size() < cap; ++round) {
    TermList base(s.begin(), s.end());
    std::sort(base.begin(), base.end(),
              [](const TermPtr& a, const TermPtr& b) { return term_cmp(*a, *b) < 0; });
    TermList add;
    auto push = [&](TermPtr t) {
      if (!s.count(t)) add.push_back(std::move(t));
    };
    for (const auto& a : base) {
      if (s.size() + add.size() >= cap) break;
      for (const auto& b : base) {
        if (s.size() + add.size() >= cap) break;
        push(mk_pair(a, b));
        push(mk_sym_enc(a, b));
        push(mk_asym_enc(a, b));
      }
      if (a->kind == TermKind::Atom) {
        auto it = arities.find(a->name);
        if (it != arities.end()) {
          for (std::size_t n : it->second) {
            if (n == 1) {
              for (const auto& x : base) push(mk_apply(a->name, {x}));
            } else if (n == 2) {
              for (const auto& x : base)
                for (const auto& y : base) {
                  if (s.size() + add.size() >= cap) break;
                  push(mk_apply(a->name, {x, y}));
                }
            }
          }
        }
      }
    }
    bool grew = false;
    for (auto& t : add)
      if (s.insert(std::move(t)).second) grew = true;
    if (!grew) break;
  }
  return s;
}

}  // namespace pfmc
