#pragma once

#include <memory>
#include <string>
#include <vector>

#include "htep/model.hpp"

// Hand-assembled ground problems, bypassing the parser. Mirrors the invariants
// the grounder establishes: normalized prop sets, snap halves registered as
// task names, sentinel actions for s0 and the goal.
namespace htep::toy {

class Builder {
 public:
  Builder() : p_(std::make_shared<GroundProblem>()) {
    p_->domain_name = "toy";
    p_->problem_name = "toy-1";
  }

  PropId prop(const std::string& name) {
    return p_->propositions.intern({p_->symbols.intern(name), {}});
  }

  TaskNameId snap(const std::string& name, PropSet pre, PropSet add, PropSet del) {
    TaskNameId id = new_name(name, TaskKind::Snap);
    p_->task_names[static_cast<std::size_t>(id)].snap = add_snap(id, std::move(pre), std::move(add), std::move(del));
    return id;
  }

  TaskNameId durative(const std::string& name, const Rational& duration,
                      PropSet pre_s, PropSet add_s, PropSet del_s, PropSet inv,
                      PropSet pre_e, PropSet add_e, PropSet del_e) {
    TaskNameId start_name = new_name(name + "#start", TaskKind::Snap);
    SnapId start = add_snap(start_name, std::move(pre_s), std::move(add_s), std::move(del_s));
    p_->task_names[static_cast<std::size_t>(start_name)].snap = start;
    TaskNameId end_name = new_name(name + "#end", TaskKind::Snap);
    SnapId end = add_snap(end_name, std::move(pre_e), std::move(add_e), std::move(del_e));
    p_->task_names[static_cast<std::size_t>(end_name)].snap = end;

    TaskNameId id = new_name(name, TaskKind::Durative);
    DurativeAction d;
    d.name = id;
    d.start = start;
    d.end = end;
    d.invariants = std::move(inv);
    normalize(d.invariants);
    d.duration = duration;
    p_->task_names[static_cast<std::size_t>(id)].durative =
        static_cast<DurId>(p_->durative_actions.size());
    p_->durative_actions.push_back(std::move(d));
    return id;
  }

  TaskNameId abstract(const std::string& name) { return new_name(name, TaskKind::Abstract); }

  MethodId method(const std::string& name, TaskNameId task, std::vector<TaskNameId> subtasks,
                  std::vector<MethodConstraint> constraints = {}) {
    Method m;
    m.name = p_->symbols.intern(name);
    m.task = task;
    m.subtasks = std::move(subtasks);
    m.constraints = std::move(constraints);
    MethodId id = static_cast<MethodId>(p_->methods.size());
    p_->methods.push_back(std::move(m));
    p_->task_names[static_cast<std::size_t>(task)].methods.push_back(id);
    return id;
  }

  void init(PropSet s) {
    normalize(s);
    p_->initial_state = std::move(s);
  }
  void goal(PropSet g) {
    normalize(g);
    p_->goal = std::move(g);
  }
  void network(std::vector<TaskNameId> tasks, std::vector<MethodConstraint> constraints = {}) {
    p_->initial_network = std::move(tasks);
    p_->initial_constraints = std::move(constraints);
  }

  ProblemPtr finish() {
    p_->t0_name = new_name("#t0", TaskKind::Snap);
    p_->t0_snap = add_snap(p_->t0_name, {}, p_->initial_state, {});
    p_->task_names[static_cast<std::size_t>(p_->t0_name)].snap = p_->t0_snap;
    p_->tinf_name = new_name("#tinf", TaskKind::Snap);
    p_->tinf_snap = add_snap(p_->tinf_name, p_->goal, {}, {});
    p_->task_names[static_cast<std::size_t>(p_->tinf_name)].snap = p_->tinf_snap;
    return p_;
  }

 private:
  TaskNameId new_name(const std::string& name, TaskKind kind) {
    TaskNameInfo info;
    info.head = p_->symbols.intern(name);
    info.kind = kind;
    TaskNameId id = static_cast<TaskNameId>(p_->task_names.size());
    p_->task_names.push_back(std::move(info));
    return id;
  }

  SnapId add_snap(TaskNameId name, PropSet pre, PropSet add, PropSet del) {
    SnapAction a;
    a.name = name;
    a.preconditions = std::move(pre);
    a.add_effects = std::move(add);
    a.delete_effects = std::move(del);
    normalize(a.preconditions);
    normalize(a.add_effects);
    normalize(a.delete_effects);
    SnapId id = static_cast<SnapId>(p_->snap_actions.size());
    p_->snap_actions.push_back(std::move(a));
    return id;
  }

  std::shared_ptr<GroundProblem> p_;
};

inline MethodTimePoint at(std::int32_t subtask, Endpoint ep) { return {subtask, ep}; }

// end(a) strictly before start(b), the ordering the parser's sugar produces.
inline MethodConstraint before(std::int32_t a, std::int32_t b) {
  return {at(a, Endpoint::End), Rel::Lt, at(b, Endpoint::Start)};
}

}  // namespace htep::toy
