#include "htep/validate.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace htep {

std::string_view violation_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::UnsupportedPrecondition: return "unsupported-precondition";
    case ViolationKind::ViolatedInvariant: return "violated-invariant";
    case ViolationKind::BrokenLink: return "broken-link";
    case ViolationKind::ConstraintViolation: return "constraint-violation";
    case ViolationKind::UnrefinedTask: return "unrefined-task";
    case ViolationKind::NegativeTime: return "negative-time";
  }
  return "unknown";
}

std::string Verdict::report() const {
  if (violations.empty()) return "valid\n";
  std::ostringstream out;
  for (const Violation& v : violations) {
    out << violation_name(v.kind) << ": " << v.detail << "\n";
  }
  return out.str();
}

namespace {

struct SimTask {
  Rational time{0};
  SnapId snap = kNone;
  std::string label;
};

struct Timeline {
  // one entry per distinct timestamp, ascending
  std::vector<Rational> times;
  std::vector<std::vector<std::size_t>> groups;  // indices into tasks
  std::vector<PropSet> state_after;
  const PropSet* state_at(const Rational& t) const {
    // state holding strictly after time t (and before the next group)
    const PropSet* s = nullptr;
    for (std::size_t i = 0; i < times.size() && times[i] <= t; ++i) s = &state_after[i];
    return s;
  }
};

class Simulator {
 public:
  Simulator(const GroundProblem& problem, const Rational& epsilon, Verdict& verdict)
      : problem_(problem), epsilon_(epsilon), verdict_(verdict) {}

  void add(const Violation& v) { verdict_.violations.push_back(v); }
  void add(ViolationKind kind, const std::string& detail) { add({kind, detail}); }

  Timeline run(std::vector<SimTask> tasks) {
    std::stable_sort(tasks.begin(), tasks.end(),
                     [](const SimTask& a, const SimTask& b) { return a.time < b.time; });
    for (const SimTask& t : tasks) {
      if (t.time < Rational(0)) {
        add(ViolationKind::NegativeTime, t.label + " scheduled at " + to_string(t.time));
      }
    }

    Timeline tl;
    PropSet state;
    for (std::size_t i = 0; i < tasks.size();) {
      std::size_t j = i;
      while (j < tasks.size() && tasks[j].time == tasks[i].time) ++j;
      std::vector<std::size_t> group;
      for (std::size_t k = i; k < j; ++k) group.push_back(k);

      for (std::size_t k = i; k < j; ++k) {
        const SnapAction& a = problem_.snap(tasks[k].snap);
        for (PropId p : a.preconditions) {
          if (!contains(state, p)) {
            add(ViolationKind::UnsupportedPrecondition,
                tasks[k].label + " needs " + problem_.display_prop(p) + " at " +
                    to_string(tasks[k].time));
          }
        }
      }
      for (std::size_t k = i; k < j; ++k) {
        for (std::size_t l = k + 1; l < j; ++l) {
          check_mutex(tasks[k], tasks[l], true);
        }
      }
      PropSet dels;
      PropSet adds;
      for (std::size_t k = i; k < j; ++k) {
        const SnapAction& a = problem_.snap(tasks[k].snap);
        dels = set_union(dels, a.delete_effects);
        adds = set_union(adds, a.add_effects);
      }
      state = set_union(set_minus(state, dels), adds);

      tl.times.push_back(tasks[i].time);
      tl.groups.push_back(std::move(group));
      tl.state_after.push_back(state);
      i = j;
    }

    // mutex pairs must be a full epsilon apart, not merely unequal
    for (std::size_t gi = 0; gi < tl.times.size(); ++gi) {
      for (std::size_t gj = gi + 1; gj < tl.times.size(); ++gj) {
        if (tl.times[gj] - tl.times[gi] >= epsilon_) break;
        for (std::size_t k : tl.groups[gi]) {
          for (std::size_t l : tl.groups[gj]) {
            check_mutex(tasks[k], tasks[l], false);
          }
        }
      }
    }

    tasks_ = std::move(tasks);
    return tl;
  }

  // Start/end snap instances re-paired purely from timestamps; each matched
  // pair's invariants must hold from its start group up to (not including)
  // its end group.
  void check_durative_pairs(const Timeline& tl) {
    std::map<SnapId, std::pair<DurId, bool>> half;  // snap -> (durative, is_start)
    for (std::size_t d = 0; d < problem_.durative_actions.size(); ++d) {
      const DurativeAction& da = problem_.durative_actions[d];
      half[da.start] = {static_cast<DurId>(d), true};
      half[da.end] = {static_cast<DurId>(d), false};
    }
    std::map<DurId, std::vector<std::size_t>> starts;
    std::map<DurId, std::vector<std::size_t>> ends;
    for (std::size_t k = 0; k < tasks_.size(); ++k) {
      auto it = half.find(tasks_[k].snap);
      if (it == half.end()) continue;
      (it->second.second ? starts : ends)[it->second.first].push_back(k);
    }
    for (auto& [d, ss] : starts) {
      const DurativeAction& da = problem_.durative(d);
      auto& es = ends[d];
      std::vector<bool> used(es.size(), false);
      for (std::size_t s : ss) {
        Rational want = tasks_[s].time + da.duration;
        bool matched = false;
        for (std::size_t ei = 0; ei < es.size(); ++ei) {
          if (used[ei] || tasks_[es[ei]].time != want) continue;
          used[ei] = true;
          matched = true;
          check_invariants(tl, da, tasks_[s].time, want, tasks_[s].label);
          break;
        }
        if (!matched) {
          add(ViolationKind::ViolatedInvariant,
              tasks_[s].label + " at " + to_string(tasks_[s].time) + " has no matching end at " +
                  to_string(want));
        }
      }
      for (std::size_t ei = 0; ei < es.size(); ++ei) {
        if (!used[ei]) {
          add(ViolationKind::ViolatedInvariant,
              tasks_[es[ei]].label + " at " + to_string(tasks_[es[ei]].time) +
                  " has no matching start");
        }
      }
    }
    for (auto& [d, es] : ends) {
      if (starts.count(d)) continue;
      for (std::size_t e : es) {
        add(ViolationKind::ViolatedInvariant,
            tasks_[e].label + " at " + to_string(tasks_[e].time) + " has no matching start");
      }
    }
  }

  const std::vector<SimTask>& tasks() const { return tasks_; }

 private:
  void check_invariants(const Timeline& tl, const DurativeAction& da, const Rational& from,
                        const Rational& to, const std::string& label) {
    for (std::size_t g = 0; g < tl.times.size(); ++g) {
      if (tl.times[g] < from) continue;
      if (tl.times[g] >= to) break;
      for (PropId p : da.invariants) {
        if (!contains(tl.state_after[g], p)) {
          add(ViolationKind::ViolatedInvariant,
              label + " loses " + problem_.display_prop(p) + " at " + to_string(tl.times[g]));
        }
      }
    }
  }

  void check_mutex(const SimTask& a, const SimTask& b, bool simultaneous) {
    const SnapAction& sa = problem_.snap(a.snap);
    const SnapAction& sb = problem_.snap(b.snap);
    auto clash = [&](const SimTask& x, const SnapAction& del_side, const SimTask& y,
                     const SnapAction& hurt_side) {
      if (intersects(del_side.delete_effects, hurt_side.preconditions) ||
          intersects(del_side.delete_effects, hurt_side.add_effects)) {
        add(ViolationKind::ConstraintViolation,
            x.label + " and " + y.label +
                (simultaneous ? " share timestamp " + to_string(x.time)
                              : " are closer than epsilon (" + to_string(x.time) + " vs " +
                                    to_string(y.time) + ")") +
                " but conflict");
      }
    };
    clash(a, sa, b, sb);
    clash(b, sb, a, sa);
  }

  const GroundProblem& problem_;
  Rational epsilon_;
  Verdict& verdict_;
  std::vector<SimTask> tasks_;
};

void check_goal(const GroundProblem& problem, const Timeline& tl, Verdict& verdict) {
  const PropSet* final_state = nullptr;
  if (!tl.state_after.empty()) final_state = &tl.state_after.back();
  static const PropSet kEmpty;
  if (!final_state) final_state = &kEmpty;
  for (PropId p : problem.goal) {
    if (!contains(*final_state, p)) {
      verdict.violations.push_back({ViolationKind::UnsupportedPrecondition,
                                    "goal " + problem.display_prop(p) + " does not hold at the end"});
    }
  }
}

}  // namespace

Verdict validate(const GroundProblem& problem, const PartialPlan& plan, const Schedule& schedule,
                 const Rational& epsilon) {
  Verdict verdict;
  if (schedule.times.size() < static_cast<std::size_t>(plan.next_sym()) * 2) {
    verdict.violations.push_back(
        {ViolationKind::ConstraintViolation, "schedule does not cover all time variables"});
    return verdict;
  }

  std::vector<SimTask> tasks;
  for (TaskSym s : plan.active_tasks()) {
    const TaskRecord& r = plan.task(s);
    if (r.kind != TaskKind::Snap) {
      verdict.violations.push_back({ViolationKind::UnrefinedTask,
                                    "t" + std::to_string(s) + " (" +
                                        problem.display_task_name(r.name) + ") is not a snap task"});
      continue;
    }
    SimTask t;
    t.time = schedule.times[static_cast<std::size_t>(start_var(s))];
    t.snap = r.snap;
    t.label = "(" + problem.display_task_name(r.name) + ")";
    tasks.push_back(std::move(t));
  }
  if (!verdict.violations.empty()) return verdict;

  for (const NetConstraint& c : plan.network().constraints()) {
    if (!satisfies({c}, schedule.times, epsilon)) {
      verdict.violations.push_back(
          {ViolationKind::ConstraintViolation,
           "constraint on variables " + std::to_string(c.left) + " " + std::string(rel_name(c.rel)) +
               " " + std::to_string(c.right) + " violated"});
    }
  }

  Simulator sim(problem, epsilon, verdict);
  Timeline tl = sim.run(std::move(tasks));
  sim.check_durative_pairs(tl);

  // causal links protect their proposition over the open producer-consumer
  // interval; the producer group must actually establish it
  for (const CausalLink& l : plan.links()) {
    Rational tp = schedule.times[static_cast<std::size_t>(plan.var(l.producer, Endpoint::Start))];
    Rational tc = schedule.times[static_cast<std::size_t>(plan.var(l.consumer, Endpoint::Start))];
    std::string what = "link on " + problem.display_prop(l.prop) + " from t" +
                       std::to_string(l.producer) + " to t" + std::to_string(l.consumer);
    if (!(tp < tc)) {
      verdict.violations.push_back({ViolationKind::BrokenLink, what + ": producer not earlier"});
      continue;
    }
    const PropSet* after = tl.state_at(tp);
    if (!after || !contains(*after, l.prop)) {
      verdict.violations.push_back(
          {ViolationKind::BrokenLink, what + ": proposition not established"});
      continue;
    }
    for (const SimTask& t : sim.tasks()) {
      if (t.time <= tp || t.time >= tc) continue;
      if (contains(problem.snap(t.snap).delete_effects, l.prop)) {
        verdict.violations.push_back(
            {ViolationKind::BrokenLink, what + ": deleted by " + t.label + " at " + to_string(t.time)});
      }
    }
  }

  check_goal(problem, tl, verdict);
  return verdict;
}

Verdict validate_actions(const GroundProblem& problem, const std::vector<ScheduledAction>& actions,
                         const Rational& epsilon,
                         const std::optional<Rational>& declared_makespan) {
  Verdict verdict;
  std::vector<SimTask> tasks;
  Rational last{0};
  for (const ScheduledAction& a : actions) {
    const TaskNameInfo& info = problem.name_info(a.name);
    if (info.kind != TaskKind::Snap) {
      verdict.violations.push_back({ViolationKind::UnrefinedTask,
                                    "(" + problem.display_task_name(a.name) + ") is not a snap task"});
      continue;
    }
    SimTask t;
    t.time = a.time;
    t.snap = info.snap;
    t.label = "(" + problem.display_task_name(a.name) + ")";
    if (a.time > last) last = a.time;
    tasks.push_back(std::move(t));
  }
  if (!verdict.violations.empty()) return verdict;

  if (declared_makespan && *declared_makespan != last) {
    verdict.violations.push_back({ViolationKind::ConstraintViolation,
                                  "declared makespan " + to_string(*declared_makespan) +
                                      " but actions end at " + to_string(last)});
  }

  SimTask t0;
  t0.time = Rational(0);
  t0.snap = problem.t0_snap;
  t0.label = "(#t0)";
  tasks.push_back(std::move(t0));
  SimTask tinf;
  tinf.time = last + Rational(1);
  tinf.snap = problem.tinf_snap;
  tinf.label = "(#tinf)";
  tasks.push_back(std::move(tinf));

  Simulator sim(problem, epsilon, verdict);
  Timeline tl = sim.run(std::move(tasks));
  sim.check_durative_pairs(tl);
  check_goal(problem, tl, verdict);
  return verdict;
}

}  // namespace htep
