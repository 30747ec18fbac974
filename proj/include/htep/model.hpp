#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "htep/rational.hpp"
#include "htep/symbols.hpp"

namespace htep {

using PropId = std::int32_t;
using TaskNameId = std::int32_t;
using SnapId = std::int32_t;
using DurId = std::int32_t;
using MethodId = std::int32_t;

inline constexpr std::int32_t kNone = -1;

// A ground proposition: predicate symbol applied to object symbols.
// Interned, so two equal propositions share one PropId.
struct Proposition {
  Sym predicate = 0;
  std::vector<Sym> arguments;

  bool operator==(const Proposition&) const = default;
  bool operator<(const Proposition& o) const {
    if (predicate != o.predicate) return predicate < o.predicate;
    return arguments < o.arguments;
  }
};

class PropositionTable {
 public:
  PropId intern(Proposition p) {
    auto it = index_.find(p);
    if (it != index_.end()) return it->second;
    PropId id = static_cast<PropId>(props_.size());
    props_.push_back(p);
    index_.emplace(std::move(p), id);
    return id;
  }
  const Proposition& get(PropId id) const { return props_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return props_.size(); }

 private:
  std::vector<Proposition> props_;
  std::map<Proposition, PropId> index_;
};

// States and condition/effect sets are sorted, duplicate-free PropId vectors.
using PropSet = std::vector<PropId>;

inline void normalize(PropSet& s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

inline bool contains(const PropSet& s, PropId p) {
  return std::binary_search(s.begin(), s.end(), p);
}

inline bool is_subset(const PropSet& a, const PropSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline PropSet set_union(const PropSet& a, const PropSet& b) {
  PropSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline PropSet set_minus(const PropSet& a, const PropSet& b) {
  PropSet out;
  out.reserve(a.size());
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool intersects(const PropSet& a, const PropSet& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib)
      ++ia;
    else if (*ib < *ia)
      ++ib;
    else
      return true;
  }
  return false;
}

// Instantaneous action. add and del are disjoint by construction.
struct SnapAction {
  TaskNameId name = kNone;
  PropSet preconditions;
  PropSet add_effects;
  PropSet delete_effects;
};

// Durative action: two snap halves, invariant conditions over the open
// execution interval, and an exact positive duration.
struct DurativeAction {
  TaskNameId name = kNone;
  SnapId start = kNone;
  SnapId end = kNone;
  PropSet invariants;
  Rational duration{1};
};

enum class Endpoint : std::uint8_t { Start = 0, End = 1 };

enum class Rel : std::uint8_t { Lt, Le, Gt, Ge, Eq, Ne };

std::string_view rel_name(Rel r);

// Point-algebra constraint between two task time points. metric_offset is
// present only on Eq constraints and encodes right - left = metric_offset.
struct MethodTimePoint {
  std::int32_t subtask = 0;  // index into subtasks of the owning method
  Endpoint endpoint = Endpoint::Start;
  bool operator==(const MethodTimePoint&) const = default;
};

struct MethodConstraint {
  MethodTimePoint left;
  Rel relation = Rel::Lt;
  MethodTimePoint right;
  bool operator==(const MethodConstraint&) const = default;
};

// Ground decomposition method. Subtasks are listed in declaration order and
// become fresh task symbols when the method is applied.
struct Method {
  Sym name = 0;
  TaskNameId task = kNone;
  std::vector<TaskNameId> subtasks;
  std::vector<MethodConstraint> constraints;
};

enum class TaskKind : std::uint8_t { Snap, Durative, Abstract };

// One ground task name: how it displays and which ground elements refine it.
struct TaskNameInfo {
  Sym head = 0;
  std::vector<Sym> args;
  TaskKind kind = TaskKind::Abstract;
  SnapId snap = kNone;      // set when kind == Snap
  DurId durative = kNone;   // set when kind == Durative
  std::vector<MethodId> methods;
};

struct GroundProblem {
  SymbolTable symbols;
  PropositionTable propositions;

  std::vector<TaskNameInfo> task_names;
  std::vector<SnapAction> snap_actions;
  std::vector<DurativeAction> durative_actions;
  std::vector<Method> methods;

  PropSet initial_state;
  PropSet goal;

  // Initial task network: ground task names plus point-algebra constraints
  // over their indices (same encoding as method constraints).
  std::vector<TaskNameId> initial_network;
  std::vector<MethodConstraint> initial_constraints;

  // Sentinel snap actions: t0 carries s0 as add effects, t_inf carries the
  // goal as preconditions.
  SnapId t0_snap = kNone;
  SnapId tinf_snap = kNone;
  TaskNameId t0_name = kNone;
  TaskNameId tinf_name = kNone;

  std::string domain_name;
  std::string problem_name;

  std::string display_prop(PropId p) const;
  std::string display_task_name(TaskNameId t) const;
  const TaskNameInfo& name_info(TaskNameId t) const {
    return task_names[static_cast<std::size_t>(t)];
  }
  const SnapAction& snap(SnapId s) const { return snap_actions[static_cast<std::size_t>(s)]; }
  const DurativeAction& durative(DurId d) const {
    return durative_actions[static_cast<std::size_t>(d)];
  }
  const Method& method(MethodId m) const { return methods[static_cast<std::size_t>(m)]; }
};

using ProblemPtr = std::shared_ptr<const GroundProblem>;

bool applicable(const SnapAction& action, const PropSet& state);

// (state \ delete_effects) ∪ add_effects. Callers check applicable first;
// the validator reports non-applicability as a verdict entry.
PropSet apply(const SnapAction& action, const PropSet& state);

}  // namespace htep
