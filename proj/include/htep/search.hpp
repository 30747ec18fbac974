#pragma once

#include <cstdint>
#include <optional>

#include "htep/heuristics.hpp"
#include "htep/plan.hpp"
#include "htep/tpn.hpp"

namespace htep {

struct SearchConfig {
  HeuristicKind heuristic = HeuristicKind::Tdgm;
  HeuristicWeights weights;
  FlawStrategy flaw_strategy = FlawStrategy::Lcfr;
  Rational epsilon{1, 1000};
  std::int64_t node_cap = 100'000'000;
  double time_budget_seconds = 64.0;
  std::int64_t memory_budget_mb = 2048;
  bool eager_metric = false;
  std::uint64_t seed = 0;  // reserved; the search is deterministic
};

struct SearchStats {
  std::int64_t expanded = 0;
  std::int64_t generated = 0;
  std::int64_t dead_qualitative = 0;
  std::int64_t dead_metric = 0;
  std::int64_t peak_open = 0;
  double wall_seconds = 0.0;
};

enum class SearchOutcome : std::uint8_t { Solved, Unsolvable, Timeout, Memory, NodeCap };

std::string_view outcome_name(SearchOutcome o);

struct SearchResult {
  SearchOutcome outcome = SearchOutcome::Unsolvable;
  std::optional<PartialPlan> plan;
  std::optional<Schedule> schedule;
  SearchStats stats;
};

// Best-first plan-space search. Pops the open plan with the least
// (heuristic value, creation index); flaw-free plans go to the metric solver
// and are discarded as dead ends when it fails.
SearchResult htep(const ProblemPtr& problem, const SearchConfig& config);

// Makespan over scheduled non-sentinel tasks (0 for the empty plan).
Rational plan_makespan(const PartialPlan& plan, const Schedule& schedule);

}  // namespace htep
