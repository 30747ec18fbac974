#include "htep/heuristics.hpp"

#include <algorithm>
#include <cassert>

namespace htep {

TDG build_tdg(const GroundProblem& problem) {
  const std::size_t n = problem.task_names.size();
  TDG tdg;
  tdg.tc.assign(n, kInfEstimate);
  tdg.modifications.assign(n, kInfEstimate);

  for (std::size_t i = 0; i < n; ++i) {
    const TaskNameInfo& info = problem.task_names[i];
    switch (info.kind) {
      case TaskKind::Snap: {
        tdg.tc[i] = 1;
        tdg.modifications[i] =
            static_cast<Estimate>(problem.snap(info.snap).preconditions.size());
        break;
      }
      case TaskKind::Durative: {
        const DurativeAction& d = problem.durative(info.durative);
        tdg.tc[i] = 2;
        PropSet start_pre = set_union(problem.snap(d.start).preconditions, d.invariants);
        tdg.modifications[i] =
            1 + static_cast<Estimate>(start_pre.size() +
                                      problem.snap(d.end).preconditions.size());
        break;
      }
      case TaskKind::Abstract:
        break;
    }
  }

  // Monotone decrease over a finite lattice, so plain iteration stabilizes.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const TaskNameInfo& info = problem.task_names[i];
      if (info.kind != TaskKind::Abstract) continue;
      for (MethodId mid : info.methods) {
        const Method& m = problem.method(mid);
        Estimate tc_sum = 0;
        Estimate mod_sum = 1;
        for (TaskNameId sub : m.subtasks) {
          tc_sum = sat_add(tc_sum, tdg.tc[static_cast<std::size_t>(sub)]);
          mod_sum = sat_add(mod_sum, tdg.modifications[static_cast<std::size_t>(sub)]);
        }
        if (tc_sum < tdg.tc[i]) {
          tdg.tc[i] = tc_sum;
          changed = true;
        }
        if (mod_sum < tdg.modifications[i]) {
          tdg.modifications[i] = mod_sum;
          changed = true;
        }
      }
    }
  }
  return tdg;
}

Estimate h_f_tc(const PartialPlan& plan, const TDG& tdg) {
  Estimate v = static_cast<Estimate>(plan.flaws().size());
  for (TaskSym s : plan.active_tasks()) {
    const TaskRecord& r = plan.task(s);
    if (r.kind == TaskKind::Snap) continue;
    v = sat_add(v, tdg.tc[static_cast<std::size_t>(r.name)]);
  }
  return v;
}

Estimate h_tdgm(const PartialPlan& plan, const TDG& tdg, Estimate link_credit) {
  Estimate v = 0;
  for (TaskSym s : plan.active_tasks()) {
    const TaskRecord& r = plan.task(s);
    if (r.kind == TaskKind::Snap) continue;
    v = sat_add(v, tdg.modifications[static_cast<std::size_t>(r.name)]);
  }
  Estimate open = 0;
  for (const Flaw& f : plan.flaws()) {
    if (f.kind == FlawKind::OpenPrecondition) ++open;
  }
  v = sat_add(v, open);
  if (v >= kInfEstimate) return kInfEstimate;
  v -= link_credit * static_cast<Estimate>(plan.link_count());
  return std::max<Estimate>(v, 0);
}

Estimate h_fape(const PartialPlan& plan, const HeuristicWeights& w) {
  Estimate unrefined = 0;
  for (TaskSym s : plan.active_tasks()) {
    if (plan.task(s).kind != TaskKind::Snap) ++unrefined;
  }
  Estimate open = 0;
  Estimate threats = 0;
  for (const Flaw& f : plan.flaws()) {
    if (f.kind == FlawKind::OpenPrecondition) ++open;
    if (f.kind == FlawKind::CausalThreat) ++threats;
  }
  return w.unrefined * unrefined + w.open * open + w.threat * threats;
}

std::string_view heuristic_name(HeuristicKind k) {
  switch (k) {
    case HeuristicKind::Tdgm: return "tdgm";
    case HeuristicKind::FTc: return "f_tc";
    case HeuristicKind::Fape: return "fape";
  }
  return "tdgm";
}

std::string_view strategy_name(FlawStrategy s) {
  return s == FlawStrategy::Lcfr ? "lcfr" : "fape";
}

std::optional<HeuristicKind> heuristic_from(std::string_view name) {
  if (name == "tdgm") return HeuristicKind::Tdgm;
  if (name == "f_tc" || name == "ftc") return HeuristicKind::FTc;
  if (name == "fape") return HeuristicKind::Fape;
  return std::nullopt;
}

std::optional<FlawStrategy> strategy_from(std::string_view name) {
  if (name == "lcfr") return FlawStrategy::Lcfr;
  if (name == "fape") return FlawStrategy::Fape;
  return std::nullopt;
}

Estimate evaluate(HeuristicKind kind, const HeuristicWeights& w, const TDG& tdg,
                  const PartialPlan& plan) {
  switch (kind) {
    case HeuristicKind::Tdgm: return h_tdgm(plan, tdg, w.link_credit);
    case HeuristicKind::FTc: return h_f_tc(plan, tdg);
    case HeuristicKind::Fape: return h_fape(plan, w);
  }
  return 0;
}

namespace {

int kind_rank(FlawKind k) {
  switch (k) {
    case FlawKind::Durative: return 0;
    case FlawKind::Decomposition: return 1;
    case FlawKind::CausalThreat: return 2;
    case FlawKind::OpenPrecondition: return 3;
  }
  return 4;
}

int fape_tier(FlawKind k) {
  switch (k) {
    case FlawKind::Durative:
    case FlawKind::Decomposition: return 0;
    case FlawKind::OpenPrecondition: return 1;
    case FlawKind::CausalThreat: return 2;
  }
  return 3;
}

// Counts resolvers, stopping at cap. Mirrors resolvers_for exactly, including
// the consistency filters on threat orderings and candidate producers.
std::size_t count_resolvers(const PartialPlan& plan, const Flaw& flaw, std::size_t cap) {
  switch (flaw.kind) {
    case FlawKind::CausalThreat: {
      std::size_t count = 0;
      VarId breaker = plan.var(flaw.task, Endpoint::Start);
      if (plan.network().consistent_with({plan.var(flaw.link.consumer, Endpoint::Start), breaker,
                                          Rel::Lt, std::nullopt})) {
        ++count;
      }
      if (plan.network().consistent_with({breaker, plan.var(flaw.link.producer, Endpoint::Start),
                                          Rel::Lt, std::nullopt})) {
        ++count;
      }
      return std::min(count, cap);
    }
    case FlawKind::Durative: return std::min<std::size_t>(1, cap);
    case FlawKind::Decomposition:
      return std::min<std::size_t>(
          plan.problem()->name_info(plan.task(flaw.task).name).methods.size(), cap);
    case FlawKind::OpenPrecondition: {
      std::size_t count = 0;
      VarId need = plan.var(flaw.task, Endpoint::Start);
      for (TaskSym s : plan.active_tasks()) {
        if (s == flaw.task) continue;
        const TaskRecord& r = plan.task(s);
        if (r.kind != TaskKind::Snap || r.snap == kNone) continue;
        if (!contains(plan.problem()->snap(r.snap).add_effects, flaw.prop)) continue;
        if (!plan.network().consistent_with({start_var(s), need, Rel::Lt, std::nullopt})) continue;
        if (++count >= cap) return cap;
      }
      return count;
    }
  }
  return 0;
}

}  // namespace

const Flaw& select_flaw(const PartialPlan& plan, FlawStrategy strategy) {
  const std::vector<Flaw>& flaws = plan.flaws();
  assert(!flaws.empty());

  // Open preconditions wait until every task is compiled down to snaps.
  // Producers only ever appear through refinement, so committing to (or dead
  // ending on) a support set before then discards plans that still work.
  bool unrefined_present = false;
  for (const Flaw& f : flaws) {
    if (f.kind == FlawKind::Durative || f.kind == FlawKind::Decomposition) {
      unrefined_present = true;
      break;
    }
  }

  const Flaw* best = nullptr;
  int best_tier = 0;
  std::size_t best_count = 0;
  for (const Flaw& f : flaws) {
    int tier;
    if (strategy == FlawStrategy::Fape) {
      tier = fape_tier(f.kind);
    } else {
      tier = (unrefined_present && f.kind == FlawKind::OpenPrecondition) ? 1 : 0;
    }
    if (best && tier > best_tier) continue;
    // Counting past best_count + 1 cannot change the comparison.
    std::size_t cap = (best && tier == best_tier) ? best_count + 1
                                                  : std::numeric_limits<std::size_t>::max();
    std::size_t count = count_resolvers(plan, f, cap);
    if (!best || tier < best_tier || count < best_count ||
        (count == best_count && kind_rank(f.kind) < kind_rank(best->kind))) {
      best = &f;
      best_tier = tier;
      best_count = count;
    }
  }
  return *best;
}

}  // namespace htep
