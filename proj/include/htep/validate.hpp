#pragma once

#include <optional>
#include <string>
#include <vector>

#include "htep/model.hpp"
#include "htep/plan.hpp"
#include "htep/tpn.hpp"

namespace htep {

enum class ViolationKind : std::uint8_t {
  UnsupportedPrecondition,
  ViolatedInvariant,
  BrokenLink,
  ConstraintViolation,
  UnrefinedTask,
  NegativeTime,
};

std::string_view violation_name(ViolationKind k);

struct Violation {
  ViolationKind kind = ViolationKind::ConstraintViolation;
  std::string detail;
};

struct Verdict {
  std::vector<Violation> violations;
  bool accepted() const { return violations.empty(); }
  std::string report() const;
};

// One timestamped ground snap task, as read from a plan file.
struct ScheduledAction {
  Rational time{0};
  TaskNameId name = kNone;
};

// Timeline check of an in-memory solution: every active task is snap, the
// schedule satisfies the plan's constraints, forward execution from the empty
// state supports every precondition strictly before its timestamp, causal
// link intervals are deleter-free, durative start/end pairs re-derived from
// timestamps keep their invariants, and the goal holds at the end.
Verdict validate(const GroundProblem& problem, const PartialPlan& plan, const Schedule& schedule,
                 const Rational& epsilon);

// Same timeline semantics for a bare action list; sentinels are injected
// (t0 at 0, t_inf after the last action). Durations are re-derived by pair
// matching, so a missing or mistimed half is a violation.
Verdict validate_actions(const GroundProblem& problem, const std::vector<ScheduledAction>& actions,
                         const Rational& epsilon,
                         const std::optional<Rational>& declared_makespan = std::nullopt);

}  // namespace htep
