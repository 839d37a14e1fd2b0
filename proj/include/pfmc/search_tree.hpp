#pragma once

// Lazily expanded search tree over symbolic states. Children are computed on
// demand from the successor relation, memoized under a per-node lock so
// concurrent forcing performs exactly one expansion, and releasable once a
// traversal has consumed a subtree so the live set stays near the current
// search path. Depth pruning cuts children at a state-depth bound without
// forcing anything. The sequential depth-first search defined here is the
// reference semantics every parallel strategy must reproduce.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "pfmc/transition.hpp"

namespace pfmc {

// Run instrumentation shared by the sequential search and every parallel
// strategy. Counters describe speculative tasks (zero for sequential runs),
// traversal work, and the engine-tracked memory high-water mark.
struct RunStats {
  std::uint64_t tasks_spawned = 0;
  std::uint64_t tasks_converted = 0;  // completed useful speculative work
  std::uint64_t tasks_fizzled = 0;    // overtaken by the demanding traversal
  std::uint64_t max_inflight = 0;
  double wall_elapsed = 0.0;
  std::vector<double> per_worker_busy;  // [0] is the coordinating thread
  std::uint64_t nodes_expanded = 0;
  std::uint64_t nodes_pruned_unvisited = 0;
  std::uint64_t peak_tracked_bytes = 0;
  std::uint64_t bound_violations = 0;  // instrumented buffer/fuel assertions
};

struct VerificationResult {
  enum class Verdict { AttackFound, NoAttackWithinDepth };
  Verdict verdict = Verdict::NoAttackWithinDepth;
  std::optional<Attack> attack;  // present iff verdict == AttackFound
  RunStats stats;
};

namespace search_detail {

inline std::atomic<std::uint64_t>& nodes_created_counter() {
  static std::atomic<std::uint64_t> v{0};
  return v;
}
inline std::atomic<std::uint64_t>& expansions_counter() {
  static std::atomic<std::uint64_t> v{0};
  return v;
}

// Per-node container overhead; the terms a state references report their own
// footprint from the Term constructor, so only structure costs are added here.
inline std::uint64_t node_overhead_bytes(const SymbolicState& st) {
  std::uint64_t slots = st.store.knowledge().size() + st.store.size() +
                        st.events.size() + st.trace.size();
  for (const auto& sd : st.strands) slots += 2 + sd.steps.size();
  return 256 + 48 * slots;
}

class Node {
 public:
  explicit Node(SymbolicState st)
      : state(std::move(st)), tracked_bytes_(node_overhead_bytes(state)) {
    nodes_created_counter().fetch_add(1, std::memory_order_relaxed);
    MemTracker::add(tracked_bytes_);
  }
  ~Node() { MemTracker::sub(static_cast<std::int64_t>(tracked_bytes_)); }
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  const SymbolicState state;

  // Idempotent under concurrent calls: the first caller expands, everyone
  // else observes the memoized list. Returns shared ownership so a released
  // node cannot invalidate a traversal's view.
  std::vector<std::shared_ptr<Node>> force_children(const Scenario& sc) {
    std::lock_guard<std::mutex> lock(m_);
    if (!forced_) {
      auto states =
          state.synthetic_root ? sc.initial_states : successors(state);
      kids_.reserve(states.size());
      for (auto& s : states) kids_.push_back(std::make_shared<Node>(std::move(s)));
      forced_ = true;
      expansions_counter().fetch_add(1, std::memory_order_relaxed);
    }
    return kids_;
  }

  // Cancellable variant for speculative tasks: computes outside the lock (a
  // stalled expansion never blocks other threads) and returns nullopt on
  // abort without touching the memo. Races coalesce to the first list.
  std::optional<std::vector<std::shared_ptr<Node>>> try_force_children(
      const Scenario& sc, const std::atomic<bool>* cancel) {
    {
      std::lock_guard<std::mutex> lock(m_);
      if (forced_) return kids_;
    }
    bool aborted = false;
    auto states = state.synthetic_root ? sc.initial_states
                                       : successors(state, cancel, aborted);
    if (aborted) return std::nullopt;
    std::vector<std::shared_ptr<Node>> fresh;
    fresh.reserve(states.size());
    for (auto& s : states) fresh.push_back(std::make_shared<Node>(std::move(s)));
    std::lock_guard<std::mutex> lock(m_);
    if (!forced_) {
      kids_ = std::move(fresh);
      forced_ = true;
      expansions_counter().fetch_add(1, std::memory_order_relaxed);
    }
    return kids_;
  }

  bool children_forced() {
    std::lock_guard<std::mutex> lock(m_);
    return forced_;
  }

  // Drops the memoized children once a traversal has fully consumed this
  // subtree; a later forcing deterministically recreates equal states.
  void release_children() {
    std::lock_guard<std::mutex> lock(m_);
    kids_.clear();
    kids_.shrink_to_fit();
    forced_ = false;
  }

  // Memoized per-node goal check, shared between speculative tasks and the
  // demanding traversal. Never blocks: racing callers compute independently
  // (the function is pure), first store wins. Returns true when this call
  // performed the check rather than hitting the memo.
  bool ensure_goal(const Scenario& sc) {
    if (goal_state_.load(std::memory_order_acquire) == 2) return false;
    auto atk = check_goals(state, sc);
    std::lock_guard<std::mutex> lock(m_);
    if (goal_state_.load(std::memory_order_relaxed) == 2) return false;
    goal_attack_ = std::move(atk);
    goal_state_.store(2, std::memory_order_release);
    return true;
  }
  // Valid only after ensure_goal returned (or goal_checked() is true).
  const std::optional<Attack>& goal_result() const { return goal_attack_; }
  bool goal_checked() const {
    return goal_state_.load(std::memory_order_acquire) == 2;
  }

  // Cancellable goal check: nullopt on abort (memo untouched), otherwise
  // whether this call computed the memo.
  std::optional<bool> try_ensure_goal(const Scenario& sc,
                                      const std::atomic<bool>* cancel) {
    if (goal_state_.load(std::memory_order_acquire) == 2) return false;
    bool aborted = false;
    auto atk = check_goals(state, sc, cancel, aborted);
    if (aborted) return std::nullopt;
    std::lock_guard<std::mutex> lock(m_);
    if (goal_state_.load(std::memory_order_relaxed) == 2) return false;
    goal_attack_ = std::move(atk);
    goal_state_.store(2, std::memory_order_release);
    return true;
  }

  // Subtree-result memo used by the parallel strategies: the DFS-preorder
  // first attack within the depth bound, or nullopt.
  bool subtree_done() const {
    return sub_state_.load(std::memory_order_acquire) == 2;
  }
  // Returns false if another evaluation already published a result.
  bool publish_subtree(std::optional<Attack> result) {
    std::lock_guard<std::mutex> lock(m_);
    if (sub_state_.load(std::memory_order_relaxed) == 2) return false;
    sub_attack_ = std::move(result);
    sub_state_.store(2, std::memory_order_release);
    return true;
  }
  const std::optional<Attack>& subtree_result() const { return sub_attack_; }

  // Descendant count within the annotation bound; -1 until annotated.
  std::atomic<std::int64_t> ann_count{-1};
  // Claimed as the root of a speculative expansion round (one round each).
  std::atomic<std::uint8_t> round_claimed{0};

 private:
  std::mutex m_;
  bool forced_ = false;
  std::vector<std::shared_ptr<Node>> kids_;
  std::atomic<std::uint8_t> goal_state_{0};
  std::optional<Attack> goal_attack_;
  std::atomic<std::uint8_t> sub_state_{0};
  std::optional<Attack> sub_attack_;
  const std::uint64_t tracked_bytes_;
};

}  // namespace search_detail

// Value handle: a root node, the scenario supplying expansion and goals, and
// a depth bound. Copies share the underlying memoized nodes.
class SearchTree {
 public:
  static constexpr std::uint32_t kNoBound = 0xffffffffu;

  SearchTree() = default;
  SearchTree(const Scenario& sc, const SymbolicState& root_state,
             std::uint32_t bound = kNoBound)
      : root_(std::make_shared<search_detail::Node>(root_state)),
        scenario_(&sc),
        bound_(bound) {}

  const std::shared_ptr<search_detail::Node>& root() const { return root_; }
  const Scenario& scenario() const { return *scenario_; }
  std::uint32_t bound() const { return bound_; }
  const SymbolicState& state() const { return root_->state; }

  friend SearchTree prune(const SearchTree& t, std::uint32_t max_depth) {
    SearchTree out = t;
    out.bound_ = std::min(out.bound_, max_depth);
    return out;
  }

 private:
  std::shared_ptr<search_detail::Node> root_;
  const Scenario* scenario_ = nullptr;
  std::uint32_t bound_ = kNoBound;
};

// The scenario root's children are its canonical initial states; any other
// state roots the subtree below it. No successor computation happens here.
inline SearchTree build_tree(const Scenario& sc) {
  return SearchTree(sc, sc.root);
}
inline SearchTree build_tree(const Scenario& sc, const SymbolicState& initial) {
  return SearchTree(sc, initial);
}

// Depth-first, left-to-right traversal of prune(tree, max_depth): goal-checks
// every node in preorder and stops at the first attack. Fully deterministic;
// node counts are run-to-run identical. Consumed subtrees are released so the
// live set tracks the search path rather than the whole tree.
inline VerificationResult search_sequential(
    const SearchTree& tree, std::uint32_t max_depth = SearchTree::kNoBound) {
  using search_detail::Node;
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t created0 =
      search_detail::nodes_created_counter().load(std::memory_order_relaxed);
  const std::int64_t mem_base = MemTracker::begin_window();

  const Scenario& sc = tree.scenario();
  const std::uint32_t bound = std::min(tree.bound(), max_depth);
  VerificationResult res;
  std::uint64_t visited = 0;
  std::uint64_t expanded = 0;

  struct Frame {
    std::shared_ptr<Node> node;
    std::vector<std::shared_ptr<Node>> kids;
    std::size_t next = 0;
  };
  std::vector<Frame> stack;

  auto visit = [&](const std::shared_ptr<Node>& n) {
    ++visited;
    if (auto atk = check_goals(n->state, sc)) {
      res.verdict = VerificationResult::Verdict::AttackFound;
      res.attack = std::move(atk);
      return true;
    }
    return false;
  };
  auto enter = [&](std::shared_ptr<Node> n) {
    if (n->state.depth >= bound) return;  // pruned: no children below here
    Frame f;
    f.kids = n->force_children(sc);
    ++expanded;
    f.node = std::move(n);
    stack.push_back(std::move(f));
  };

  if (!visit(tree.root())) {
    enter(tree.root());
    while (!stack.empty() && !res.attack) {
      Frame& top = stack.back();
      if (top.next < top.kids.size()) {
        std::shared_ptr<Node> child = top.kids[top.next];
        top.kids[top.next].reset();  // our view drops the child as consumed
        ++top.next;
        if (visit(child)) break;
        enter(std::move(child));
      } else {
        top.node->release_children();
        stack.pop_back();
      }
    }
  }

  // Counter deltas assume a freshly built (or fully released) tree; a rerun
  // over retained memos can only lower the delta, so clamp at zero.
  const std::uint64_t created =
      search_detail::nodes_created_counter().load(std::memory_order_relaxed) -
      created0;
  res.stats.nodes_expanded = expanded;
  res.stats.nodes_pruned_unvisited =
      created + 1 > visited ? created + 1 - visited : 0;
  res.stats.peak_tracked_bytes =
      static_cast<std::uint64_t>(MemTracker::window_peak(mem_base));
  res.stats.wall_elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  res.stats.per_worker_busy = {res.stats.wall_elapsed};
  return res;
}

}  // namespace pfmc
