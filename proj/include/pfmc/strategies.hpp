#pragma once

// Memory-bounded parallel evaluation strategies over the lazy search tree.
// Every strategy is transparent: it must return the same verdict as the
// sequential reference search for every configuration, and in deterministic
// mode (the default) the identical attack, because speculative results are
// memoized per node and the coordinating traversal consumes them in
// depth-first preorder. Fast mode (opt-in) takes the first attack found
// anywhere instead; verdict equality still holds.
//
// Speculative tasks run on a bounded work-stealing pool and communicate only
// through per-node memo cells and atomic counters. A task whose result the
// coordinator computed first (or that was dropped on submission overflow, or
// cut off by the stop flag) counts as fizzled; a task that published its
// result counts as converted.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pfmc/search_tree.hpp"
#include "pfmc/worker_pool.hpp"

namespace pfmc {

enum class StrategyKind {
  Sequential,
  ParTreeBuffer,    // speculative rounds of fixed depth, buffered boundary
  EnhancedBuffer,   // eager child spine + buffered subtree speculation
  ChunkSubtrees,    // fuel split per level, whole-subtree task at fuel 1
  HybridSubtrees,   // buffered levels while fuel lasts, then subtree handoff
  AnnotatedHybrid,  // hybrid with fuel shares clamped by subtree node counts
};

inline const char* strategy_name(StrategyKind k) {
  switch (k) {
    case StrategyKind::Sequential: return "seq";
    case StrategyKind::ParTreeBuffer: return "buffer";
    case StrategyKind::EnhancedBuffer: return "ebuffer";
    case StrategyKind::ChunkSubtrees: return "chunk";
    case StrategyKind::HybridSubtrees: return "hybrid";
    case StrategyKind::AnnotatedHybrid: return "ahybrid";
  }
  return "?";
}

inline std::optional<StrategyKind> strategy_from_name(const std::string& s) {
  if (s == "seq") return StrategyKind::Sequential;
  if (s == "buffer") return StrategyKind::ParTreeBuffer;
  if (s == "ebuffer") return StrategyKind::EnhancedBuffer;
  if (s == "chunk") return StrategyKind::ChunkSubtrees;
  if (s == "hybrid") return StrategyKind::HybridSubtrees;
  if (s == "ahybrid") return StrategyKind::AnnotatedHybrid;
  return std::nullopt;
}

struct StrategyConfig {
  StrategyKind kind = StrategyKind::Sequential;
  std::uint32_t par_depth = 3;  // buffer kind: depth of a speculative round
  std::uint32_t buffer = 50;    // buffered kinds: outstanding-task window
  std::uint64_t fuel = 1024;    // fuel kinds: total task budget
  std::uint32_t workers = 1;    // execution streams incl. the coordinator
  bool deterministic = true;    // preorder verdict; false: first attack wins
};

namespace strategy_detail {

using search_detail::Node;
using NodePtr = std::shared_ptr<Node>;

struct RunCtx {
  const Scenario* sc = nullptr;
  std::uint32_t bound = 0;
  std::uint32_t buffer = 50;
  bool deterministic = true;
  WorkerPool* pool = nullptr;  // null: sparks are dropped (always fizzle)

  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> spawned{0};
  std::atomic<std::uint64_t> converted{0};
  std::atomic<std::uint64_t> fizzled{0};
  std::atomic<std::uint64_t> inflight{0};
  std::atomic<std::uint64_t> peak_inflight{0};
  std::atomic<std::uint64_t> violations{0};
  std::atomic<std::uint64_t> checked{0};  // unique goal checks across threads

  std::mutex fast_m;
  std::optional<Attack> fast_attack;

  void note_spawn() {
    spawned.fetch_add(1, std::memory_order_relaxed);
    std::uint64_t now = inflight.fetch_add(1, std::memory_order_relaxed) + 1;
    std::uint64_t peak = peak_inflight.load(std::memory_order_relaxed);
    while (now > peak && !peak_inflight.compare_exchange_weak(
                             peak, now, std::memory_order_relaxed)) {
    }
  }
  void finish(bool useful) {
    inflight.fetch_sub(1, std::memory_order_relaxed);
    (useful ? converted : fizzled).fetch_add(1, std::memory_order_relaxed);
  }
  void record_fast(const Attack& atk) {
    std::lock_guard<std::mutex> lock(fast_m);
    if (!fast_attack) fast_attack = atk;
    stop.store(true, std::memory_order_release);
  }
};

// Outcome of a subtree walk; done == false means the walk aborted on the
// stop flag, so the partial result must not be memoized or trusted.
struct SubEval {
  bool done = true;
  std::optional<Attack> attack;
};

// Goal-checks the node through the shared memo: 1 attack, 0 clean, -1 the
// walk was cancelled mid-check (the stop flag reaches into the solver).
inline int visit(RunCtx& cx, const NodePtr& n) {
  auto fresh = n->try_ensure_goal(*cx.sc, &cx.stop);
  if (!fresh) return -1;
  if (*fresh) cx.checked.fetch_add(1, std::memory_order_relaxed);
  return n->goal_result().has_value() ? 1 : 0;
}

// Plain preorder walk within the bound, consuming node memos and releasing
// consumed children. Task body for whole-subtree sparks and the inline
// fallback whenever the coordinator overtakes speculation.
inline SubEval walk_plain(RunCtx& cx, const NodePtr& n) {
  if (n->subtree_done()) return {true, n->subtree_result()};
  int v = visit(cx, n);
  if (v < 0) return {false, std::nullopt};
  if (v > 0) return {true, n->goal_result()};
  if (n->state.depth >= cx.bound) return {true, std::nullopt};
  auto kids = n->try_force_children(*cx.sc, &cx.stop);
  if (!kids) return {false, std::nullopt};
  SubEval out{true, std::nullopt};
  for (const auto& kid : *kids) {
    if (cx.stop.load(std::memory_order_relaxed)) return {false, std::nullopt};
    SubEval r = walk_plain(cx, kid);
    if (!r.done) return r;
    if (r.attack) {
      out = std::move(r);
      break;
    }
  }
  n->release_children();
  return out;
}

// Spawns one task that evaluates the whole subtree under `kid` and publishes
// the preorder-first attack (or its absence) at the subtree root.
inline void spawn_subtree(RunCtx& cx, NodePtr kid) {
  cx.note_spawn();
  auto body = [&cx, kid] {
    if (cx.stop.load(std::memory_order_relaxed) || kid->subtree_done()) {
      cx.finish(false);
      return;
    }
    SubEval r = walk_plain(cx, kid);
    if (!r.done) {
      cx.finish(false);
      return;
    }
    if (!cx.deterministic && r.attack) cx.record_fast(*r.attack);
    cx.finish(kid->publish_subtree(std::move(r.attack)));
  };
  if (!cx.pool || !cx.pool->submit(std::move(body))) cx.finish(false);
}

// ---- enhanced buffer ----
//
// At every node: force the child spine eagerly, then keep at most `buffer`
// outstanding speculative subtree tasks sliding ahead of consumption. The
// strategy recurses, so inline descent speculates again one level down.

inline SubEval walk_ebuffer(RunCtx& cx, const NodePtr& n);

inline void spawn_ebuffer_child(RunCtx& cx, NodePtr kid,
                                std::shared_ptr<std::atomic<std::uint64_t>> out) {
  cx.note_spawn();
  std::uint64_t now = out->fetch_add(1, std::memory_order_relaxed) + 1;
  if (now > cx.buffer) cx.violations.fetch_add(1, std::memory_order_relaxed);
  auto body = [&cx, kid, out] {
    if (cx.stop.load(std::memory_order_relaxed) || kid->subtree_done()) {
      out->fetch_sub(1, std::memory_order_relaxed);
      cx.finish(false);
      return;
    }
    SubEval r = walk_ebuffer(cx, kid);
    out->fetch_sub(1, std::memory_order_relaxed);
    if (!r.done) {
      cx.finish(false);
      return;
    }
    if (!cx.deterministic && r.attack) cx.record_fast(*r.attack);
    cx.finish(kid->publish_subtree(std::move(r.attack)));
  };
  if (!cx.pool || !cx.pool->submit(std::move(body))) {
    out->fetch_sub(1, std::memory_order_relaxed);
    cx.finish(false);
  }
}

inline SubEval walk_ebuffer(RunCtx& cx, const NodePtr& n) {
  if (n->subtree_done()) return {true, n->subtree_result()};
  int v = visit(cx, n);
  if (v < 0) return {false, std::nullopt};
  if (v > 0) return {true, n->goal_result()};
  if (n->state.depth >= cx.bound) return {true, std::nullopt};
  auto kids = n->try_force_children(*cx.sc, &cx.stop);  // eager spine
  if (!kids) return {false, std::nullopt};
  auto outstanding = std::make_shared<std::atomic<std::uint64_t>>(0);
  std::size_t next_spawn = 1;  // the coordinator handles kids[0] itself
  SubEval out{true, std::nullopt};
  for (std::size_t i = 0; i < kids->size(); ++i) {
    if (cx.stop.load(std::memory_order_relaxed)) return {false, std::nullopt};
    if (next_spawn < i + 1) next_spawn = i + 1;
    while (next_spawn < kids->size() &&
           outstanding->load(std::memory_order_relaxed) < cx.buffer)
      spawn_ebuffer_child(cx, (*kids)[next_spawn++], outstanding);
    SubEval r = (*kids)[i]->subtree_done()
                    ? SubEval{true, (*kids)[i]->subtree_result()}
                    : walk_ebuffer(cx, (*kids)[i]);
    if (!r.done) return r;
    if (r.attack) {
      out = std::move(r);
      break;
    }
  }
  n->release_children();
  return out;
}

// ---- speculative rounds with a buffered boundary (par-tree-buffer) ----
//
// A round expands and goal-checks everything within `par_depth` below its
// root; the nodes cut off at the boundary become future round roots, queued
// with at most `buffer` rounds outstanding, refilled on each completion.
// The coordinator's demand on a node no round has claimed starts one there.

struct PtbState {
  std::mutex m;
  std::deque<NodePtr> pending;
  std::uint64_t outstanding = 0;
  std::uint32_t par_depth = 3;
};

inline void ptb_spawn_round(RunCtx& cx, const std::shared_ptr<PtbState>& st,
                            NodePtr root);

inline void ptb_top_up(RunCtx& cx, const std::shared_ptr<PtbState>& st) {
  std::vector<NodePtr> to_spawn;
  {
    std::lock_guard<std::mutex> lock(st->m);
    while (st->outstanding < cx.buffer && !st->pending.empty()) {
      to_spawn.push_back(std::move(st->pending.front()));
      st->pending.pop_front();
      ++st->outstanding;
      if (st->outstanding > cx.buffer)
        cx.violations.fetch_add(1, std::memory_order_relaxed);
    }
  }
  for (auto& n : to_spawn) ptb_spawn_round(cx, st, std::move(n));
}

inline void ptb_spawn_round(RunCtx& cx, const std::shared_ptr<PtbState>& st,
                            NodePtr root) {
  cx.note_spawn();
  auto body = [&cx, st, root] {
    std::uint64_t fresh = 0;
    std::vector<NodePtr> boundary;
    if (!cx.stop.load(std::memory_order_relaxed)) {
      std::vector<std::pair<NodePtr, std::uint32_t>> stack{{root, 0}};
      while (!stack.empty() && !cx.stop.load(std::memory_order_relaxed)) {
        auto [n, rel] = std::move(stack.back());
        stack.pop_back();
        auto checked = n->try_ensure_goal(*cx.sc, &cx.stop);
        if (!checked) break;  // cancelled mid-check: abandon the round
        if (*checked) {
          ++fresh;
          cx.checked.fetch_add(1, std::memory_order_relaxed);
        }
        if (n->goal_result()) continue;  // no speculation below an attack
        if (n->state.depth >= cx.bound) continue;
        if (rel >= st->par_depth) {
          boundary.push_back(std::move(n));
          continue;
        }
        auto kids = n->try_force_children(*cx.sc, &cx.stop);
        if (!kids) break;
        for (auto& kid : *kids) stack.emplace_back(std::move(kid), rel + 1);
      }
      if (!cx.deterministic) {
        // Fast mode may take any speculative attack as the verdict.
        const auto& atk = root->goal_result();
        if (root->goal_checked() && atk) cx.record_fast(*atk);
      }
    }
    {
      std::lock_guard<std::mutex> lock(st->m);
      --st->outstanding;
      for (auto& b : boundary) {
        std::uint8_t unclaimed = 0;
        if (b->round_claimed.compare_exchange_strong(unclaimed, 1))
          st->pending.push_back(std::move(b));
      }
    }
    cx.finish(fresh > 0);
    ptb_top_up(cx, st);
  };
  if (!cx.pool || !cx.pool->submit(std::move(body))) {
    std::lock_guard<std::mutex> lock(st->m);
    --st->outstanding;
    cx.finish(false);
  }
}

inline SubEval walk_ptb(RunCtx& cx, const std::shared_ptr<PtbState>& st,
                        const NodePtr& n) {
  if (cx.pool && !n->goal_checked()) {
    std::uint8_t unclaimed = 0;
    if (n->round_claimed.compare_exchange_strong(unclaimed, 1)) {
      {
        std::lock_guard<std::mutex> lock(st->m);
        st->pending.push_back(n);
      }
      ptb_top_up(cx, st);
    }
  }
  int v = visit(cx, n);
  if (v < 0) return {false, std::nullopt};
  if (v > 0) return {true, n->goal_result()};
  if (n->state.depth >= cx.bound) return {true, std::nullopt};
  auto kids = n->try_force_children(*cx.sc, &cx.stop);
  if (!kids) return {false, std::nullopt};
  SubEval out{true, std::nullopt};
  for (const auto& kid : *kids) {
    if (cx.stop.load(std::memory_order_relaxed)) return {false, std::nullopt};
    SubEval r = walk_ptb(cx, st, kid);
    if (!r.done) return r;
    if (r.attack) {
      out = std::move(r);
      break;
    }
  }
  n->release_children();
  return out;
}

// ---- fuel-chunked subtrees ----
//
// The node keeps one unit and divides the rest evenly over its children
// (earlier children take the remainder). A child whose share is exactly one
// becomes a whole-subtree task; larger shares recurse inline; zero shares
// run sequentially.

inline std::vector<std::uint64_t> fuel_shares(std::uint64_t fuel,
                                              std::size_t children) {
  std::vector<std::uint64_t> shares(children, 0);
  if (children == 0 || fuel <= 1) return shares;
  std::uint64_t extra = fuel - 1;
  for (std::size_t i = 0; i < children; ++i)
    shares[i] = extra / children + (i < extra % children ? 1 : 0);
  return shares;
}

inline SubEval walk_chunk(RunCtx& cx, const NodePtr& n, std::uint64_t fuel) {
  if (n->subtree_done()) return {true, n->subtree_result()};
  int v = visit(cx, n);
  if (v < 0) return {false, std::nullopt};
  if (v > 0) return {true, n->goal_result()};
  if (n->state.depth >= cx.bound) return {true, std::nullopt};
  auto forced = n->try_force_children(*cx.sc, &cx.stop);
  if (!forced) return {false, std::nullopt};
  auto& kids = *forced;
  auto shares = fuel_shares(fuel, kids.size());
  for (std::size_t i = 0; i < kids.size(); ++i)
    if (shares[i] == 1) spawn_subtree(cx, kids[i]);
  SubEval out{true, std::nullopt};
  for (std::size_t i = 0; i < kids.size(); ++i) {
    if (cx.stop.load(std::memory_order_relaxed)) return {false, std::nullopt};
    SubEval r = kids[i]->subtree_done()
                    ? SubEval{true, kids[i]->subtree_result()}
                    : shares[i] > 1 ? walk_chunk(cx, kids[i], shares[i])
                                    : walk_plain(cx, kids[i]);
    if (!r.done) return r;
    if (r.attack) {
      out = std::move(r);
      break;
    }
  }
  n->release_children();
  return out;
}

// ---- hybrid: buffered levels + whole-subtree handoff ----
//
// While a child's fuel share covers at least a full buffer, the buffered
// per-level speculation continues inside a recursive task; smaller shares
// hand the entire child subtree to a single task. The annotated variant
// clamps each share to the child's known subtree size plus one, so fuel
// never flows into subtrees too small to use it.

inline SubEval walk_hybrid(RunCtx& cx, const NodePtr& n, std::uint64_t budget,
                           bool annotated);

inline void spawn_hybrid_child(RunCtx& cx, NodePtr kid, std::uint64_t share,
                               bool annotated,
                               std::shared_ptr<std::atomic<std::uint64_t>> out) {
  cx.note_spawn();
  std::uint64_t now = out->fetch_add(1, std::memory_order_relaxed) + 1;
  if (now > cx.buffer) cx.violations.fetch_add(1, std::memory_order_relaxed);
  auto body = [&cx, kid, share, annotated, out] {
    if (cx.stop.load(std::memory_order_relaxed) || kid->subtree_done()) {
      out->fetch_sub(1, std::memory_order_relaxed);
      cx.finish(false);
      return;
    }
    SubEval r = share >= cx.buffer ? walk_hybrid(cx, kid, share - 1, annotated)
                                   : walk_plain(cx, kid);
    out->fetch_sub(1, std::memory_order_relaxed);
    if (!r.done) {
      cx.finish(false);
      return;
    }
    if (!cx.deterministic && r.attack) cx.record_fast(*r.attack);
    cx.finish(kid->publish_subtree(std::move(r.attack)));
  };
  if (!cx.pool || !cx.pool->submit(std::move(body))) {
    out->fetch_sub(1, std::memory_order_relaxed);
    cx.finish(false);
  }
}

inline SubEval walk_hybrid(RunCtx& cx, const NodePtr& n, std::uint64_t budget,
                           bool annotated) {
  if (n->subtree_done()) return {true, n->subtree_result()};
  int v = visit(cx, n);
  if (v < 0) return {false, std::nullopt};
  if (v > 0) return {true, n->goal_result()};
  if (n->state.depth >= cx.bound) return {true, std::nullopt};
  auto forced = n->try_force_children(*cx.sc, &cx.stop);
  if (!forced) return {false, std::nullopt};
  auto& kids = *forced;
  auto shares = fuel_shares(budget, kids.size());
  if (annotated)
    for (std::size_t i = 0; i < kids.size(); ++i) {
      std::int64_t ann = kids[i]->ann_count.load(std::memory_order_relaxed);
      if (ann >= 0)
        shares[i] = std::min<std::uint64_t>(
            shares[i], static_cast<std::uint64_t>(ann) + 1);
    }
  auto outstanding = std::make_shared<std::atomic<std::uint64_t>>(0);
  std::vector<char> tasked(kids.size(), 0);
  std::size_t next_spawn = 1;  // the coordinator spends kids[0]'s share
  SubEval out{true, std::nullopt};
  for (std::size_t i = 0; i < kids.size(); ++i) {
    if (cx.stop.load(std::memory_order_relaxed)) return {false, std::nullopt};
    if (next_spawn < i + 1) next_spawn = i + 1;
    while (next_spawn < kids.size() &&
           outstanding->load(std::memory_order_relaxed) < cx.buffer) {
      std::size_t j = next_spawn++;
      if (shares[j] >= 1) {
        tasked[j] = 1;
        spawn_hybrid_child(cx, kids[j], shares[j], annotated, outstanding);
      }
    }
    // A child's share belongs to its task once spawned; the inline fallback
    // then spends nothing, keeping total spawns within the fuel.
    SubEval r = kids[i]->subtree_done()
                    ? SubEval{true, kids[i]->subtree_result()}
                : tasked[i] || shares[i] < cx.buffer
                    ? walk_plain(cx, kids[i])
                    : walk_hybrid(cx, kids[i], shares[i] - 1, annotated);
    if (!r.done) return r;
    if (r.attack) {
      out = std::move(r);
      break;
    }
  }
  n->release_children();
  return out;
}

}  // namespace strategy_detail

// Forces the bounded tree and stores in every node the number of descendants
// within the bound (a leaf or bound-cut node stores zero). The expansion is
// retained, so annotation trades memory for informed fuel splits.
struct AnnotatedTree {
  SearchTree tree;
  std::uint32_t bound = 0;
};

namespace strategy_detail {
inline std::int64_t annotate_node(const Scenario& sc, const NodePtr& n,
                                  std::uint32_t bound) {
  std::int64_t total = 0;
  if (n->state.depth < bound)
    for (const auto& kid : n->force_children(sc))
      total += 1 + annotate_node(sc, kid, bound);
  n->ann_count.store(total, std::memory_order_relaxed);
  return total;
}
}  // namespace strategy_detail

inline AnnotatedTree annotate_tree(const SearchTree& t,
                                   std::uint32_t max_depth) {
  std::uint32_t bound = std::min(t.bound(), max_depth);
  strategy_detail::annotate_node(t.scenario(), t.root(), bound);
  return {t, bound};
}

namespace strategy_detail {

// Shared run harness: sets up the context and pool, runs the coordinator
// walk for `kind`, tears down speculation, and assembles the result.
inline VerificationResult run_parallel(const SearchTree& tree,
                                       std::uint32_t max_depth,
                                       const StrategyConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t created0 =
      search_detail::nodes_created_counter().load(std::memory_order_relaxed);
  const std::uint64_t expanded0 =
      search_detail::expansions_counter().load(std::memory_order_relaxed);
  const std::int64_t mem_base = MemTracker::begin_window();

  RunCtx cx;
  cx.sc = &tree.scenario();
  cx.bound = std::min(tree.bound(), max_depth);
  cx.buffer = cfg.buffer == 0 ? 1 : cfg.buffer;
  cx.deterministic = cfg.deterministic;
  std::unique_ptr<WorkerPool> pool;
  if (cfg.workers > 1) {
    pool = std::make_unique<WorkerPool>(cfg.workers - 1);
    cx.pool = pool.get();
  }

  SubEval r{true, std::nullopt};
  switch (cfg.kind) {
    case StrategyKind::Sequential:
      r = walk_plain(cx, tree.root());
      break;
    case StrategyKind::ParTreeBuffer: {
      auto st = std::make_shared<PtbState>();
      st->par_depth = cfg.par_depth == 0 ? 1 : cfg.par_depth;
      r = walk_ptb(cx, st, tree.root());
      break;
    }
    case StrategyKind::EnhancedBuffer:
      r = walk_ebuffer(cx, tree.root());
      break;
    case StrategyKind::ChunkSubtrees:
      r = walk_chunk(cx, tree.root(), cfg.fuel);
      break;
    case StrategyKind::HybridSubtrees:
    case StrategyKind::AnnotatedHybrid: {
      bool annotated = cfg.kind == StrategyKind::AnnotatedHybrid;
      if (cfg.fuel < cx.buffer) {
        // Not enough fuel for buffered levels: one task takes the whole
        // tree and the coordinator evaluates toward the same memo.
        if (cfg.fuel >= 1) spawn_subtree(cx, tree.root());
        r = walk_plain(cx, tree.root());
      } else {
        r = walk_hybrid(cx, tree.root(), cfg.fuel, annotated);
      }
      break;
    }
  }

  cx.stop.store(true, std::memory_order_release);
  std::vector<double> pool_busy;
  if (pool) {
    pool->shutdown();
    pool_busy = pool->busy_seconds();
  }

  VerificationResult res;
  if (r.done && r.attack) {
    res.verdict = VerificationResult::Verdict::AttackFound;
    res.attack = std::move(r.attack);
  } else if (!cfg.deterministic) {
    std::lock_guard<std::mutex> lock(cx.fast_m);
    if (cx.fast_attack) {
      res.verdict = VerificationResult::Verdict::AttackFound;
      res.attack = std::move(cx.fast_attack);
    }
  }

  res.stats.tasks_spawned = cx.spawned.load();
  res.stats.tasks_converted = cx.converted.load();
  res.stats.tasks_fizzled = cx.fizzled.load();
  res.stats.max_inflight = cx.peak_inflight.load();
  res.stats.bound_violations = cx.violations.load();
  res.stats.nodes_expanded =
      search_detail::expansions_counter().load(std::memory_order_relaxed) -
      expanded0;
  const std::uint64_t created =
      search_detail::nodes_created_counter().load(std::memory_order_relaxed) -
      created0;
  const std::uint64_t visited = cx.checked.load();
  res.stats.nodes_pruned_unvisited =
      created + 1 > visited ? created + 1 - visited : 0;
  res.stats.peak_tracked_bytes =
      static_cast<std::uint64_t>(MemTracker::window_peak(mem_base));
  res.stats.wall_elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  res.stats.per_worker_busy.push_back(res.stats.wall_elapsed);
  for (double b : pool_busy) res.stats.per_worker_busy.push_back(b);
  return res;
}

}  // namespace strategy_detail

inline VerificationResult eval_par_tree_buffer(const SearchTree& tree,
                                               std::uint32_t max_depth,
                                               const StrategyConfig& cfg) {
  StrategyConfig c = cfg;
  c.kind = StrategyKind::ParTreeBuffer;
  return strategy_detail::run_parallel(tree, max_depth, c);
}

inline VerificationResult eval_enhanced_buffer(const SearchTree& tree,
                                               std::uint32_t max_depth,
                                               const StrategyConfig& cfg) {
  StrategyConfig c = cfg;
  c.kind = StrategyKind::EnhancedBuffer;
  return strategy_detail::run_parallel(tree, max_depth, c);
}

inline VerificationResult eval_chunk_subtrees(const SearchTree& tree,
                                              std::uint32_t max_depth,
                                              const StrategyConfig& cfg) {
  StrategyConfig c = cfg;
  c.kind = StrategyKind::ChunkSubtrees;
  return strategy_detail::run_parallel(tree, max_depth, c);
}

inline VerificationResult eval_hybrid_subtrees(const SearchTree& tree,
                                               std::uint32_t max_depth,
                                               const StrategyConfig& cfg) {
  StrategyConfig c = cfg;
  c.kind = StrategyKind::HybridSubtrees;
  return strategy_detail::run_parallel(tree, max_depth, c);
}

// Precondition: atree.bound >= max_depth (the annotation must cover the
// whole searched region).
inline VerificationResult eval_annotated_hybrid(const AnnotatedTree& atree,
                                                std::uint32_t max_depth,
                                                const StrategyConfig& cfg) {
  StrategyConfig c = cfg;
  c.kind = StrategyKind::AnnotatedHybrid;
  return strategy_detail::run_parallel(atree.tree, max_depth, c);
}

// Test-only reference: forces the entire bounded tree up front (retaining
// it), sparks one goal-check task per node, then takes the preorder verdict.
// Exists to expose the memory blow-up the buffered strategies avoid; use on
// small instances only.
inline VerificationResult eval_naive_tree(const SearchTree& tree,
                                          std::uint32_t max_depth,
                                          const StrategyConfig& cfg) {
  using namespace strategy_detail;
  const auto t0 = std::chrono::steady_clock::now();
  const std::int64_t mem_base = MemTracker::begin_window();

  RunCtx cx;
  cx.sc = &tree.scenario();
  cx.bound = std::min(tree.bound(), max_depth);
  cx.deterministic = cfg.deterministic;
  std::unique_ptr<WorkerPool> pool;
  if (cfg.workers > 1) {
    pool = std::make_unique<WorkerPool>(cfg.workers - 1);
    cx.pool = pool.get();
  }

  // Whole-tree forcing, no release anywhere; one spark per node.
  std::vector<NodePtr> preorder;
  std::vector<NodePtr> stack{tree.root()};
  while (!stack.empty()) {
    NodePtr n = std::move(stack.back());
    stack.pop_back();
    preorder.push_back(n);
    if (n->state.depth >= cx.bound) continue;
    auto kids = n->force_children(*cx.sc);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it)
      stack.push_back(*it);
  }
  for (const auto& n : preorder) {
    cx.note_spawn();
    auto body = [&cx, n] {
      if (cx.stop.load(std::memory_order_relaxed) || n->goal_checked()) {
        cx.finish(false);
        return;
      }
      auto fresh = n->try_ensure_goal(*cx.sc, &cx.stop);
      if (fresh && *fresh) cx.checked.fetch_add(1, std::memory_order_relaxed);
      cx.finish(fresh.value_or(false));
    };
    if (!cx.pool || !cx.pool->submit(std::move(body))) cx.finish(false);
  }

  VerificationResult res;
  for (const auto& n : preorder) {
    if (visit(cx, n) > 0) {
      res.verdict = VerificationResult::Verdict::AttackFound;
      res.attack = n->goal_result();
      break;
    }
  }

  cx.stop.store(true, std::memory_order_release);
  std::vector<double> pool_busy;
  if (pool) {
    pool->shutdown();
    pool_busy = pool->busy_seconds();
  }

  res.stats.tasks_spawned = cx.spawned.load();
  res.stats.tasks_converted = cx.converted.load();
  res.stats.tasks_fizzled = cx.fizzled.load();
  res.stats.max_inflight = cx.peak_inflight.load();
  res.stats.nodes_expanded = preorder.size();
  res.stats.peak_tracked_bytes =
      static_cast<std::uint64_t>(MemTracker::window_peak(mem_base));
  res.stats.wall_elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  res.stats.per_worker_busy.push_back(res.stats.wall_elapsed);
  for (double b : pool_busy) res.stats.per_worker_busy.push_back(b);
  return res;
}

// Dispatch on the configured kind; Sequential delegates to the reference
// search so its statistics stay the regression baseline.
inline VerificationResult run_strategy(const SearchTree& tree,
                                       std::uint32_t max_depth,
                                       const StrategyConfig& cfg) {
  if (cfg.kind == StrategyKind::Sequential)
    return search_sequential(tree, max_depth);
  if (cfg.kind == StrategyKind::AnnotatedHybrid) {
    AnnotatedTree at = annotate_tree(tree, max_depth);
    return eval_annotated_hybrid(at, max_depth, cfg);
  }
  return strategy_detail::run_parallel(tree, max_depth, cfg);
}

}  // namespace pfmc
