#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "htep/model.hpp"
#include "htep/shared_list.hpp"
#include "htep/tpn.hpp"

namespace htep {

using TaskSym = std::int32_t;

// Task symbols own two time variables; a snap task's start and end collapse
// to the single canonical start variable.
inline VarId start_var(TaskSym sym) { return sym * 2; }
inline VarId end_var(TaskSym sym) { return sym * 2 + 1; }

// One task symbol of a partial plan. Symbols are never reused: a refined
// task's variables stay alive as interface time points for the constraints
// that mention them.
struct TaskRecord {
  TaskSym sym = 0;
  TaskNameId name = kNone;
  TaskKind kind = TaskKind::Abstract;
  SnapId snap = kNone;
  DurId durative = kNone;
  // Invariant conditions added to a compiled start snap instance, on top of
  // the action's own preconditions.
  std::shared_ptr<const PropSet> extra_preconditions;
};

struct CausalLink {
  TaskSym producer = 0;
  TaskSym consumer = 0;
  PropId prop = kNone;
  bool operator==(const CausalLink&) const = default;
};

enum class FlawKind : std::uint8_t { OpenPrecondition, CausalThreat, Decomposition, Durative };

struct Flaw {
  FlawKind kind = FlawKind::OpenPrecondition;
  TaskSym task = 0;   // needer / threatening task / abstract / durative
  PropId prop = kNone;
  CausalLink link;    // CausalThreat only
  std::int32_t creation_index = 0;

  bool operator==(const Flaw&) const = default;
};

// Partial temporal plan: task symbols with their name mapping, the temporal
// constraint network, and causal links. Values are immutable; children share
// the parent's logs and extend them.
class PartialPlan {
 public:
  const ProblemPtr& problem() const { return problem_; }
  const SharedList<TaskRecord>& task_log() const { return task_log_; }
  const SharedList<TaskSym>& refined_log() const { return refined_log_; }
  const SharedList<CausalLink>& link_log() const { return link_log_; }
  const PointNetwork& network() const { return network_; }
  TaskSym next_sym() const { return next_sym_; }

  std::size_t link_count() const { return link_log_.size(); }
  std::size_t active_task_count() const { return active_.size(); }
  std::size_t constraint_count() const { return network_.constraint_count(); }

  const TaskRecord& task(TaskSym sym) const { return tasks_by_sym_[static_cast<std::size_t>(sym)]; }
  bool is_refined(TaskSym sym) const { return refined_[static_cast<std::size_t>(sym)] != 0; }
  bool is_active(TaskSym sym) const {
    return sym < next_sym_ && !is_refined(sym) && tasks_by_sym_[static_cast<std::size_t>(sym)].name != kNone;
  }

  // Active task symbols in ascending symbol order.
  const std::vector<TaskSym>& active_tasks() const { return active_; }
  const std::vector<Flaw>& flaws() const { return flaws_; }
  std::vector<CausalLink> links() const { return link_log_.to_vector(); }

  // Canonical time variable: snap tasks collapse end onto start.
  VarId var(TaskSym sym, Endpoint ep) const {
    const TaskRecord& r = task(sym);
    if (r.kind == TaskKind::Snap) return start_var(sym);
    return ep == Endpoint::Start ? start_var(sym) : end_var(sym);
  }

  // Instance-level preconditions: the snap action's plus any compiled-in
  // invariants.
  PropSet instance_preconditions(TaskSym sym) const;

  bool has_supporting_link(TaskSym consumer, PropId prop) const;

  TaskSym t0() const { return 0; }
  TaskSym tinf() const { return 1; }

  std::string dump() const;

  // Internal constructor surface for refine and initial_plan.
  struct Parts {
    ProblemPtr problem;
    SharedList<TaskRecord> task_log;
    SharedList<TaskSym> refined_log;
    SharedList<CausalLink> link_log;
    PointNetwork base_network;
    std::vector<NetConstraint> added_constraints;
    TaskSym next_sym = 0;
  };
  // Builds the network and flaw cache. require_consistent makes an
  // inconsistent qualitative network return nullopt (dropped refinements).
  static std::optional<PartialPlan> make(Parts parts, bool require_consistent);

 private:
  PartialPlan() = default;

  ProblemPtr problem_;
  SharedList<TaskRecord> task_log_;
  SharedList<TaskSym> refined_log_;
  SharedList<CausalLink> link_log_;
  PointNetwork network_;
  TaskSym next_sym_ = 0;

  std::vector<TaskRecord> tasks_by_sym_;
  std::vector<std::uint8_t> refined_;
  std::vector<TaskSym> active_;
  std::vector<std::pair<TaskSym, PropId>> supported_;  // sorted (consumer, prop)
  std::vector<Flaw> flaws_;
};

PartialPlan initial_plan(const ProblemPtr& problem);

// Exactly one flaw per unsupported snap precondition, threatened link pair,
// abstract task, and durative task, in deterministic creation order.
std::vector<Flaw> detect_flaws(const PartialPlan& plan, const PointNetwork& tpn);

bool threatens(const PartialPlan& plan, const PointNetwork& tpn, TaskSym task,
               const CausalLink& link);

}  // namespace htep
