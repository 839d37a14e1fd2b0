#pragma once

// Free-algebra message terms: atoms, variables, pairs, symmetric/asymmetric
// encryption, key inversion and function application. Terms are immutable,
// hash-caching, and shared freely between workers.

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <algorithm>
#include <utility>
#include <vector>

#include "pfmc/memtrack.hpp"

namespace pfmc {

enum class TermKind : std::uint8_t { Atom, Var, Pair, SymEnc, AsymEnc, Inv, Apply };
enum class AtomKind : std::uint8_t { Agent, Number, Constant };

class Term;
using TermPtr = std::shared_ptr<const Term>;
using TermList = std::vector<TermPtr>;

class Term : public std::enable_shared_from_this<Term> {
 public:
  TermKind kind;
  AtomKind atom_kind = AtomKind::Constant;  // Atom only
  std::uint32_t var_index = 0;              // Var only
  std::string name;                         // Atom / Var display / Apply symbol
  TermList args;                            // Pair: [l,r]; *Enc: [key,body]; Inv: [k]; Apply
  std::size_t hash = 0;
  // Coarse superset of the variables below: bit v%64 set for each var v.
  // Lets substitution skip whole subtrees that cannot meet its domain.
  std::uint64_t var_mask = 0;
  std::uint16_t depth = 1;  // structural depth, leaves count 1
  bool ground = true;

  Term(TermKind k, AtomKind ak, std::uint32_t vi, std::string n, TermList a)
      : kind(k), atom_kind(ak), var_index(vi), name(std::move(n)), args(std::move(a)) {
    ground = kind != TermKind::Var;
    if (kind == TermKind::Var) var_mask = 1ull << (vi & 63);
    std::size_t h = static_cast<std::size_t>(kind) * 0x9e3779b97f4a7c15ull;
    if (kind == TermKind::Atom) h ^= static_cast<std::size_t>(atom_kind) + 0x517cc1b7;
    if (kind == TermKind::Var)
      h ^= (static_cast<std::size_t>(var_index) + 1) * 0xff51afd7ed558ccdull;
    for (char c : name) h = h * 131 + static_cast<unsigned char>(c);
    for (const auto& t : args) {
      h = h * 0x100000001b3ull ^ t->hash;
      if (!t->ground) ground = false;
      var_mask |= t->var_mask;
      if (t->depth + 1 > depth) depth = static_cast<std::uint16_t>(t->depth + 1);
    }
    hash = h;
    MemTracker::add(footprint());
  }
  ~Term() { MemTracker::sub(footprint()); }
  Term(const Term&) = delete;
  Term& operator=(const Term&) = delete;

  std::int64_t footprint() const {
    return static_cast<std::int64_t>(sizeof(Term) + name.capacity() +
                                     args.capacity() * sizeof(TermPtr));
  }
};

inline TermPtr mk_atom(std::string name, AtomKind k = AtomKind::Constant) {
  return std::make_shared<Term>(TermKind::Atom, k, 0, std::move(name), TermList{});
}
inline TermPtr mk_var(std::string display, std::uint32_t index) {
  return std::make_shared<Term>(TermKind::Var, AtomKind::Constant, index,
                                std::move(display), TermList{});
}
inline TermPtr mk_pair(TermPtr l, TermPtr r) {
  return std::make_shared<Term>(TermKind::Pair, AtomKind::Constant, 0, "",
                                TermList{std::move(l), std::move(r)});
}
inline TermPtr mk_sym_enc(TermPtr key, TermPtr body) {
  return std::make_shared<Term>(TermKind::SymEnc, AtomKind::Constant, 0, "",
                                TermList{std::move(key), std::move(body)});
}
inline TermPtr mk_asym_enc(TermPtr key, TermPtr body) {
  return std::make_shared<Term>(TermKind::AsymEnc, AtomKind::Constant, 0, "",
                                TermList{std::move(key), std::move(body)});
}
// Inv(Inv(k)) normalizes to k at construction so equality stays structural.
inline TermPtr mk_inv(TermPtr k) {
  if (k->kind == TermKind::Inv) return k->args[0];
  return std::make_shared<Term>(TermKind::Inv, AtomKind::Constant, 0, "",
                                TermList{std::move(k)});
}
inline TermPtr mk_apply(std::string fn, TermList args) {
  return std::make_shared<Term>(TermKind::Apply, AtomKind::Constant, 0, std::move(fn),
                                std::move(args));
}

// Right-nested pair of a message list; singleton lists stay bare.
inline TermPtr mk_message(const TermList& parts) {
  if (parts.empty()) return mk_atom("nil");
  TermPtr acc = parts.back();
  for (std::size_t i = parts.size() - 1; i-- > 0;) acc = mk_pair(parts[i], acc);
  return acc;
}

inline bool term_eq(const Term& a, const Term& b) {
  if (&a == &b) return true;
  if (a.hash != b.hash || a.kind != b.kind) return false;
  switch (a.kind) {
    case TermKind::Atom:
      return a.atom_kind == b.atom_kind && a.name == b.name;
    case TermKind::Var:
      return a.var_index == b.var_index;
    case TermKind::Apply:
      if (a.name != b.name || a.args.size() != b.args.size()) return false;
      break;
    default:
      if (a.args.size() != b.args.size()) return false;
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!term_eq(*a.args[i], *b.args[i])) return false;
  return true;
}
inline bool term_eq(const TermPtr& a, const TermPtr& b) { return term_eq(*a, *b); }

// Total deterministic order; used only for canonical tie-breaking.
inline int term_cmp(const Term& a, const Term& b) {
  if (&a == &b) return 0;
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  switch (a.kind) {
    case TermKind::Atom: {
      if (int c = a.name.compare(b.name)) return c < 0 ? -1 : 1;
      if (a.atom_kind != b.atom_kind) return a.atom_kind < b.atom_kind ? -1 : 1;
      return 0;
    }
    case TermKind::Var:
      if (a.var_index != b.var_index) return a.var_index < b.var_index ? -1 : 1;
      return 0;
    default: {
      if (a.kind == TermKind::Apply)
        if (int c = a.name.compare(b.name)) return c < 0 ? -1 : 1;
      if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
      for (std::size_t i = 0; i < a.args.size(); ++i)
        if (int c = term_cmp(*a.args[i], *b.args[i])) return c;
      return 0;
    }
  }
}

struct TermPtrHash {
  std::size_t operator()(const TermPtr& t) const { return t->hash; }
};
struct TermPtrEq {
  bool operator()(const TermPtr& a, const TermPtr& b) const { return term_eq(a, b); }
};

inline bool contains(const TermList& hay, const TermPtr& needle) {
  for (const auto& t : hay)
    if (term_eq(t, needle)) return true;
  return false;
}

inline void collect_vars(const TermPtr& t, std::vector<std::uint32_t>& out) {
  if (t->ground) return;
  if (t->kind == TermKind::Var) {
    out.push_back(t->var_index);
    return;
  }
  for (const auto& a : t->args) collect_vars(a, out);
}

inline bool subterm_of(const TermPtr& sub, const TermPtr& t) {
  if (term_eq(sub, t)) return true;
  for (const auto& a : t->args)
    if (subterm_of(sub, a)) return true;
  return false;
}

inline bool occurs_in(std::uint32_t v, const Term& t) {
  if (t.ground) return false;
  if (t.kind == TermKind::Var) return t.var_index == v;
  for (const auto& a : t.args)
    if (occurs_in(v, *a)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Substitution: idempotent variable bindings with occurs-check invariant.

class Subst {
 public:
  Subst() = default;

  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }

  const TermPtr* find(std::uint32_t v) const {
    auto it = lower_bound(v);
    return it != map_.end() && it->first == v ? &it->second : nullptr;
  }

  // Binding must not introduce a cycle: enforced by callers via occurs check.
  void bind(std::uint32_t v, TermPtr t) {
    auto it = lower_bound(v);
    if (it != map_.end() && it->first == v)
      it->second = std::move(t);
    else
      map_.emplace(it, v, std::move(t));
  }

  TermPtr apply(const TermPtr& t) const {
    if (map_.empty() || t->ground) return t;
    if (t->kind == TermKind::Var) {
      if (const TermPtr* b = find(t->var_index)) return *b;
      return t;
    }
    TermList nargs;
    nargs.reserve(t->args.size());
    bool changed = false;
    for (const auto& a : t->args) {
      TermPtr na = apply(a);
      if (na.get() != a.get()) changed = true;
      nargs.push_back(std::move(na));
    }
    if (!changed) return t;
    switch (t->kind) {
      case TermKind::Pair: return mk_pair(nargs[0], nargs[1]);
      case TermKind::SymEnc: return mk_sym_enc(nargs[0], nargs[1]);
      case TermKind::AsymEnc: return mk_asym_enc(nargs[0], nargs[1]);
      case TermKind::Inv: return mk_inv(nargs[0]);
      case TermKind::Apply: return mk_apply(t->name, std::move(nargs));
      default: return t;
    }
  }
  TermPtr operator()(const TermPtr& t) const { return apply(t); }

  TermList apply_all(const TermList& ts) const {
    if (map_.empty()) return ts;
    TermList out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.push_back(apply(t));
    return out;
  }

  // Bindings are kept sorted by variable index, so this is free.
  const std::vector<std::pair<std::uint32_t, TermPtr>>& sorted_bindings() const {
    return map_;
  }

  bool idempotent() const {
    for (const auto& [v, t] : map_) {
      (void)v;
      std::vector<std::uint32_t> vs;
      collect_vars(t, vs);
      for (auto u : vs)
        if (find(u)) return false;
    }
    return true;
  }

 private:
  std::vector<std::pair<std::uint32_t, TermPtr>>::const_iterator lower_bound(
      std::uint32_t v) const {
    return std::lower_bound(
        map_.begin(), map_.end(), v,
        [](const auto& e, std::uint32_t x) { return e.first < x; });
  }
  std::vector<std::pair<std::uint32_t, TermPtr>>::iterator lower_bound(
      std::uint32_t v) {
    return std::lower_bound(
        map_.begin(), map_.end(), v,
        [](const auto& e, std::uint32_t x) { return e.first < x; });
  }

  std::vector<std::pair<std::uint32_t, TermPtr>> map_;
};

// apply(compose(outer, inner), t) == apply(outer, apply(inner, t)).
inline std::optional<Subst> compose(const Subst& outer, const Subst& inner) {
  Subst out;
  for (const auto& [v, t] : inner.sorted_bindings()) {
    TermPtr nt = outer.apply(t);
    if (occurs_in(v, *nt) && !(nt->kind == TermKind::Var && nt->var_index == v))
      return std::nullopt;  // composition would violate the occurs invariant
    if (nt->kind == TermKind::Var && nt->var_index == v) continue;
    out.bind(v, std::move(nt));
  }
  for (const auto& [v, t] : outer.sorted_bindings())
    if (!out.find(v) && !inner.find(v)) out.bind(v, t);
  return out;
}

// ---------------------------------------------------------------------------
// Syntactic unification with occurs check. Returns an idempotent MGU.

namespace detail {

// Unifier working state. Every term the loop touches is owned transitively
// by the two input roots, so the todo stack and bindings hold raw pointers;
// shared ownership reappears only when the final substitution is resolved.
using BindList = std::vector<std::pair<std::uint32_t, const Term*>>;

inline const Term* bind_find(const BindList& b, std::uint32_t v) {
  for (const auto& e : b)
    if (e.first == v) return e.second;
  return nullptr;
}

inline const Term* walk(const Term* t, const BindList& b) {
  while (t->kind == TermKind::Var) {
    const Term* bound = bind_find(b, t->var_index);
    if (!bound) return t;
    t = bound;
  }
  return t;
}

inline bool occurs_walked(std::uint32_t v, const Term* t, const BindList& b) {
  const Term* w = walk(t, b);
  if (w->kind == TermKind::Var) return w->var_index == v;
  for (const auto& a : w->args)
    if (occurs_walked(v, a.get(), b)) return true;
  return false;
}

inline TermPtr resolve(const Term* t, const BindList& b) {
  const Term* w = walk(t, b);
  if (w->ground || w->kind == TermKind::Var) return w->shared_from_this();
  TermList nargs;
  nargs.reserve(w->args.size());
  bool changed = false;
  for (const auto& a : w->args) {
    TermPtr na = resolve(a.get(), b);
    if (na.get() != a.get()) changed = true;
    nargs.push_back(std::move(na));
  }
  if (!changed) return w->shared_from_this();
  switch (w->kind) {
    case TermKind::Pair: return mk_pair(nargs[0], nargs[1]);
    case TermKind::SymEnc: return mk_sym_enc(nargs[0], nargs[1]);
    case TermKind::AsymEnc: return mk_asym_enc(nargs[0], nargs[1]);
    case TermKind::Inv: return mk_inv(nargs[0]);
    case TermKind::Apply: return mk_apply(w->name, std::move(nargs));
    default: return w->shared_from_this();
  }
}

}  // namespace detail

inline std::optional<Subst> unify(const TermPtr& s, const TermPtr& t) {
  detail::BindList b;
  b.reserve(8);
  std::vector<std::pair<const Term*, const Term*>> todo;
  todo.reserve(16);
  todo.emplace_back(s.get(), t.get());
  while (!todo.empty()) {
    auto [x, y] = todo.back();
    todo.pop_back();
    x = detail::walk(x, b);
    y = detail::walk(y, b);
    if (x->kind == TermKind::Var && y->kind == TermKind::Var &&
        x->var_index == y->var_index)
      continue;
    if (x->kind == TermKind::Var) {
      if (detail::occurs_walked(x->var_index, y, b)) return std::nullopt;
      b.emplace_back(x->var_index, y);
      continue;
    }
    if (y->kind == TermKind::Var) {
      if (detail::occurs_walked(y->var_index, x, b)) return std::nullopt;
      b.emplace_back(y->var_index, x);
      continue;
    }
    if (x->kind != y->kind) return std::nullopt;
    switch (x->kind) {
      case TermKind::Atom:
        if (x->atom_kind != y->atom_kind || x->name != y->name) return std::nullopt;
        break;
      case TermKind::Apply:
        if (x->name != y->name || x->args.size() != y->args.size()) return std::nullopt;
        [[fallthrough]];
      default:
        for (std::size_t i = 0; i < x->args.size(); ++i)
          todo.emplace_back(x->args[i].get(), y->args[i].get());
        break;
    }
  }
  Subst out;
  for (const auto& [v, t0] : b) out.bind(v, detail::resolve(t0, b));
  return out;
}

// ---------------------------------------------------------------------------
// Rendering in AnB surface syntax: {m}k asymmetric, {|m|}k symmetric, comma
// pairs. Variables print as display-name_index.

inline std::string render(const TermPtr& t);

namespace detail {

inline std::string render_key(const TermPtr& k) {
  if (k->kind == TermKind::Pair || k->kind == TermKind::SymEnc ||
      k->kind == TermKind::AsymEnc)
    return "(" + render(k) + ")";
  return render(k);
}

inline std::string render_pair_elem(const TermPtr& t) {
  if (t->kind == TermKind::Pair) return "(" + render(t) + ")";
  return render(t);
}

}  // namespace detail

inline std::string render(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Atom: return t->name;
    case TermKind::Var: return t->name + "_" + std::to_string(t->var_index);
    case TermKind::Pair: {
      // right-nested chains flatten to comma lists
      std::string out = detail::render_pair_elem(t->args[0]);
      TermPtr cur = t->args[1];
      while (cur->kind == TermKind::Pair) {
        out += "," + detail::render_pair_elem(cur->args[0]);
        cur = cur->args[1];
      }
      out += "," + detail::render_pair_elem(cur);
      return out;
    }
    case TermKind::SymEnc:
      return "{|" + render(t->args[1]) + "|}" + detail::render_key(t->args[0]);
    case TermKind::AsymEnc:
      return "{" + render(t->args[1]) + "}" + detail::render_key(t->args[0]);
    case TermKind::Inv: return "inv(" + render(t->args[0]) + ")";
    case TermKind::Apply: {
      std::string out = t->name + "(";
      for (std::size_t i = 0; i < t->args.size(); ++i) {
        if (i) out += ",";
        out += detail::render_pair_elem(t->args[i]);
      }
      return out + ")";
    }
  }
  return "?";
}

inline std::string render_subst(const Subst& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [v, t] : s.sorted_bindings()) {
    if (!first) out += ", ";
    first = false;
    out += "v" + std::to_string(v) + " -> " + render(t);
  }
  return out + "}";
}

// Monotone per-run variable freshness; contention-safe.
class VarGen {
 public:
  std::uint32_t next() { return counter_.fetch_add(1, std::memory_order_relaxed); }
  explicit VarGen(std::uint32_t start = 0) : counter_(start) {}

 private:
  std::atomic<std::uint32_t> counter_;
};

}  // namespace pfmc
