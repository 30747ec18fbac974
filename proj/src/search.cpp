#include "htep/search.hpp"

#include <sys/resource.h>

#include <chrono>
#include <memory>
#include <queue>

#include "htep/log.hpp"
#include "htep/refine.hpp"

namespace htep {

std::string_view outcome_name(SearchOutcome o) {
  switch (o) {
    case SearchOutcome::Solved: return "solved";
    case SearchOutcome::Unsolvable: return "unsolvable";
    case SearchOutcome::Timeout: return "timeout";
    case SearchOutcome::Memory: return "memory";
    case SearchOutcome::NodeCap: return "nodecap";
  }
  return "unknown";
}

Rational plan_makespan(const PartialPlan& plan, const Schedule& schedule) {
  Rational ms{0};
  for (TaskSym s : plan.active_tasks()) {
    if (s == plan.t0() || s == plan.tinf()) continue;
    const Rational& t = schedule.times[static_cast<std::size_t>(start_var(s))];
    if (t > ms) ms = t;
  }
  return ms;
}

namespace {

std::int64_t peak_rss_mb() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return u.ru_maxrss / 1024;  // ru_maxrss is KiB on Linux
}

struct OpenEntry {
  Estimate h = 0;
  std::int64_t index = 0;
  std::shared_ptr<const PartialPlan> plan;
};

struct EntryAfter {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.h != b.h) return a.h > b.h;
    return a.index > b.index;
  }
};

}  // namespace

SearchResult htep(const ProblemPtr& problem, const SearchConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  SearchResult result;
  SearchStats& stats = result.stats;
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t_start).count(); };
  auto finish = [&](SearchOutcome o) {
    result.outcome = o;
    stats.wall_seconds = elapsed();
    return result;
  };

  const TDG tdg = build_tdg(*problem);

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, EntryAfter> open;
  std::int64_t next_index = 0;

  auto push = [&](PartialPlan&& plan) {
    OpenEntry e;
    e.h = evaluate(config.heuristic, config.weights, tdg, plan);
    e.index = next_index++;
    e.plan = std::make_shared<const PartialPlan>(std::move(plan));
    open.push(std::move(e));
    ++stats.generated;
    if (static_cast<std::int64_t>(open.size()) > stats.peak_open) {
      stats.peak_open = static_cast<std::int64_t>(open.size());
    }
  };

  PartialPlan root = initial_plan(problem);
  if (!root.network().consistent()) {
    ++stats.generated;
    ++stats.dead_qualitative;
    return finish(SearchOutcome::Unsolvable);
  }
  push(std::move(root));

  while (!open.empty()) {
    if (elapsed() > config.time_budget_seconds) return finish(SearchOutcome::Timeout);
    if (stats.generated >= config.node_cap) return finish(SearchOutcome::NodeCap);
    if (stats.expanded % 64 == 0 && peak_rss_mb() > config.memory_budget_mb) {
      return finish(SearchOutcome::Memory);
    }

    OpenEntry entry = open.top();
    open.pop();
    const PartialPlan& plan = *entry.plan;
    ++stats.expanded;
    HTEP_LOG_AT(2, "expand #" << entry.index << " h=" << entry.h
                              << " flaws=" << plan.flaws().size()
                              << " tasks=" << plan.active_task_count());
    if (log_level() >= 1 && stats.expanded % 1024 == 0) {
      HTEP_LOG_AT(1, "expanded=" << stats.expanded << " open=" << open.size()
                                 << " h=" << entry.h);
    }

    if (plan.flaws().empty()) {
      auto schedule = solve_metric(plan.network(), config.epsilon);
      if (schedule) {
        result.plan = plan;
        result.schedule = std::move(schedule);
        return finish(SearchOutcome::Solved);
      }
      ++stats.dead_metric;
      continue;
    }

    const Flaw& flaw = select_flaw(plan, config.flaw_strategy);
    for (const Resolver& r : resolvers_for(plan, flaw)) {
      auto child = apply_resolver(plan, r);
      if (!child) {
        ++stats.dead_qualitative;
        continue;
      }
      if (config.eager_metric && !solve_metric(child->network(), config.epsilon)) {
        ++stats.dead_metric;
        continue;
      }
      HTEP_LOG_AT(2, "  child " << describe(r, plan));
      push(std::move(*child));
    }
  }
  return finish(SearchOutcome::Unsolvable);
}

}  // namespace htep
