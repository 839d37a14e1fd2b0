// Parallel strategy layer: transparency of every strategy against the
// sequential reference (verdicts always, attack traces byte-identical in
// deterministic mode), fuel arithmetic and spawn bounds, buffer-window
// instrumentation, annotation counts against a direct enumeration oracle,
// and the accounting invariants on task counters.

#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "pfmc/strategies.hpp"
#include "support/replay.hpp"

namespace {

using namespace pfmc;
using testsup::load;
using testsup::trace_realizable;

std::string trace_text(const VerificationResult& r) {
  if (!r.attack) return "";
  return render_trace(r.attack->witness, r.attack->witness_subst);
}

void check_counter_invariants(const RunStats& s) {
  CHECK(s.tasks_converted + s.tasks_fizzled == s.tasks_spawned);
  CHECK(s.max_inflight <= s.tasks_spawned);
  CHECK(s.bound_violations == 0);
}

const StrategyKind kParallelKinds[] = {
    StrategyKind::ParTreeBuffer, StrategyKind::EnhancedBuffer,
    StrategyKind::ChunkSubtrees, StrategyKind::HybridSubtrees,
    StrategyKind::AnnotatedHybrid};

}  // namespace

TEST_CASE("fuel shares split evenly with earlier remainder", "[strategies]") {
  using strategy_detail::fuel_shares;
  CHECK(fuel_shares(10, 3) == std::vector<std::uint64_t>{3, 3, 3});
  CHECK(fuel_shares(9, 3) == std::vector<std::uint64_t>{3, 3, 2});
  CHECK(fuel_shares(7, 4) == std::vector<std::uint64_t>{2, 2, 1, 1});
  CHECK(fuel_shares(1, 3) == std::vector<std::uint64_t>{0, 0, 0});
  CHECK(fuel_shares(0, 2) == std::vector<std::uint64_t>{0, 0});
  CHECK(fuel_shares(5, 1) == std::vector<std::uint64_t>{4});
  CHECK(fuel_shares(4, 0).empty());
}

TEST_CASE("annotation counts descendants within the bound", "[strategies]") {
  Scenario sc = load("sso_flawed.AnB", 1);

  // A zero bound leaves the root childless: zero descendants.
  AnnotatedTree a0 = annotate_tree(build_tree(sc), 0);
  CHECK(a0.tree.root()->ann_count.load() == 0);

  // Against direct enumeration: the root's count at bound d is the total
  // number of states with trace length <= d over all initial assignments.
  for (std::uint32_t d : {1u, 2u, 3u}) {
    std::size_t enumerated = 0;
    for (const auto& init : sc.initial_states) {
      testsup::WalkStats ws;
      testsup::dfs(sc, init, d, 1u << 20, ws, [](const SymbolicState&) {});
      enumerated += ws.visited;
    }
    AnnotatedTree at = annotate_tree(build_tree(sc), d);
    INFO("bound " << d);
    CHECK(at.tree.root()->ann_count.load() ==
          static_cast<std::int64_t>(enumerated));
    CHECK(at.bound == d);
  }
}

TEST_CASE("every strategy reproduces the sequential verdict", "[strategies]") {
  struct Instance {
    const char* file;
    int sessions;
    std::uint32_t depth;
  };
  const Instance instances[] = {
      {"sso_flawed.AnB", 2, 6},  // attack: traces must match byte for byte
      {"sso_standard.AnB", 1, 4},
      {"kerberos_basic.AnB", 1, 7},
  };
  for (const auto& inst : instances) {
    Scenario sc = load(inst.file, inst.sessions);
    VerificationResult ref = search_sequential(build_tree(sc), inst.depth);
    for (StrategyKind kind : kParallelKinds) {
      for (std::uint32_t workers : {1u, 2u, 4u}) {
        StrategyConfig cfg;
        cfg.kind = kind;
        cfg.workers = workers;
        cfg.buffer = 4;
        cfg.fuel = 64;
        cfg.par_depth = 2;
        VerificationResult got =
            run_strategy(build_tree(sc), inst.depth, cfg);
        INFO(inst.file << " sessions=" << inst.sessions << " depth="
                       << inst.depth << " kind=" << strategy_name(kind)
                       << " workers=" << workers);
        CHECK(got.verdict == ref.verdict);
        CHECK(got.attack.has_value() == ref.attack.has_value());
        CHECK(trace_text(got) == trace_text(ref));  // deterministic mode
        check_counter_invariants(got.stats);
      }
    }
  }
}

TEST_CASE("fast mode keeps the verdict and yields a real attack",
          "[strategies]") {
  Scenario sc = load("sso_flawed.AnB", 2);
  VerificationResult ref = search_sequential(build_tree(sc), 6);
  REQUIRE(ref.verdict == VerificationResult::Verdict::AttackFound);
  for (StrategyKind kind : kParallelKinds) {
    StrategyConfig cfg;
    cfg.kind = kind;
    cfg.workers = 4;
    cfg.buffer = 4;
    cfg.fuel = 64;
    cfg.deterministic = false;
    VerificationResult got = run_strategy(build_tree(sc), 6, cfg);
    INFO("kind=" << strategy_name(kind));
    CHECK(got.verdict == ref.verdict);
    REQUIRE(got.attack.has_value());
    CHECK(trace_realizable(sc, got.attack->witness, got.attack->witness_subst));
    check_counter_invariants(got.stats);
  }

  // A safe instance stays safe under fast mode.
  Scenario safe = load("kerberos_basic.AnB", 1);
  StrategyConfig cfg;
  cfg.kind = StrategyKind::EnhancedBuffer;
  cfg.workers = 4;
  cfg.buffer = 4;
  cfg.deterministic = false;
  VerificationResult got = run_strategy(build_tree(safe), 7, cfg);
  CHECK(got.verdict == VerificationResult::Verdict::NoAttackWithinDepth);
  CHECK(!got.attack);
}

TEST_CASE("chunk spawns at most fuel tasks", "[strategies]") {
  Scenario sc = load("kerberos_basic.AnB", 1);
  for (std::uint64_t fuel : {0ull, 1ull, 2ull, 5ull, 16ull, 1024ull}) {
    StrategyConfig cfg;
    cfg.kind = StrategyKind::ChunkSubtrees;
    cfg.workers = 4;
    cfg.fuel = fuel;
    VerificationResult got = run_strategy(build_tree(sc), 7, cfg);
    INFO("fuel=" << fuel);
    CHECK(got.verdict == VerificationResult::Verdict::NoAttackWithinDepth);
    CHECK(got.stats.tasks_spawned <= fuel);
    if (fuel <= 1) CHECK(got.stats.tasks_spawned == 0);
    check_counter_invariants(got.stats);
  }
}

TEST_CASE("hybrid respects fuel and hands off small budgets", "[strategies]") {
  Scenario sc = load("kerberos_basic.AnB", 1);

  // Fuel below the buffer: exactly one whole-tree task.
  StrategyConfig small;
  small.kind = StrategyKind::HybridSubtrees;
  small.workers = 4;
  small.buffer = 50;
  small.fuel = 10;
  VerificationResult r1 = run_strategy(build_tree(sc), 7, small);
  CHECK(r1.verdict == VerificationResult::Verdict::NoAttackWithinDepth);
  CHECK(r1.stats.tasks_spawned == 1);
  check_counter_invariants(r1.stats);

  for (StrategyKind kind :
       {StrategyKind::HybridSubtrees, StrategyKind::AnnotatedHybrid}) {
    StrategyConfig cfg;
    cfg.kind = kind;
    cfg.workers = 4;
    cfg.buffer = 2;
    cfg.fuel = 64;
    VerificationResult got = run_strategy(build_tree(sc), 7, cfg);
    INFO("kind=" << strategy_name(kind));
    CHECK(got.stats.tasks_spawned <= cfg.fuel);
    check_counter_invariants(got.stats);
  }
}

TEST_CASE("annotated hybrid starves tiny subtrees of fuel", "[strategies]") {
  // With the annotation in place, a child of an n-node subtree never
  // receives more than n+1 fuel, so tiny kerberos subtrees cap the spawn
  // count well below the raw fuel budget.
  Scenario sc = load("kerberos_basic.AnB", 1);
  AnnotatedTree at = annotate_tree(build_tree(sc), 7);
  std::int64_t total = at.tree.root()->ann_count.load();
  REQUIRE(total > 0);
  StrategyConfig cfg;
  cfg.kind = StrategyKind::AnnotatedHybrid;
  cfg.workers = 4;
  cfg.buffer = 2;
  cfg.fuel = 100000;  // far more fuel than nodes
  VerificationResult got = eval_annotated_hybrid(at, 7, cfg);
  CHECK(got.verdict == VerificationResult::Verdict::NoAttackWithinDepth);
  // No subtree can absorb more fuel than its node count allows.
  CHECK(got.stats.tasks_spawned <=
        static_cast<std::uint64_t>(total) + 1);
  check_counter_invariants(got.stats);
}

TEST_CASE("naive whole-tree forcing retains more memory than ebuffer",
          "[strategies]") {
  Scenario sc = load("sso_standard.AnB", 1);
  StrategyConfig cfg;
  cfg.workers = 2;
  cfg.buffer = 4;

  VerificationResult naive = eval_naive_tree(build_tree(sc), 4, cfg);
  VerificationResult ebuf = eval_enhanced_buffer(build_tree(sc), 4, cfg);
  CHECK(naive.verdict == ebuf.verdict);
  CHECK(naive.stats.tasks_spawned == naive.stats.nodes_expanded);
  CHECK(ebuf.stats.peak_tracked_bytes < naive.stats.peak_tracked_bytes);
  check_counter_invariants(naive.stats);
}

TEST_CASE("workers=1 spawns sparks that all fizzle", "[strategies]") {
  Scenario sc = load("kerberos_basic.AnB", 1);
  StrategyConfig cfg;
  cfg.kind = StrategyKind::ChunkSubtrees;
  cfg.workers = 1;
  cfg.fuel = 64;
  VerificationResult got = run_strategy(build_tree(sc), 7, cfg);
  CHECK(got.verdict == VerificationResult::Verdict::NoAttackWithinDepth);
  CHECK(got.stats.tasks_converted == 0);  // no execution threads exist
  CHECK(got.stats.tasks_fizzled == got.stats.tasks_spawned);
  check_counter_invariants(got.stats);
}
