#include "htep/plan.hpp"

#include <algorithm>
#include <sstream>

namespace htep {

PropSet PartialPlan::instance_preconditions(TaskSym sym) const {
  const TaskRecord& r = task(sym);
  PropSet base;
  if (r.kind == TaskKind::Snap && r.snap != kNone) base = problem_->snap_actions[static_cast<std::size_t>(r.snap)].preconditions;
  if (r.extra_preconditions) base = set_union(base, *r.extra_preconditions);
  return base;
}

bool PartialPlan::has_supporting_link(TaskSym consumer, PropId prop) const {
  return std::binary_search(supported_.begin(), supported_.end(), std::make_pair(consumer, prop));
}

std::optional<PartialPlan> PartialPlan::make(Parts parts, bool require_consistent) {
  PartialPlan plan;
  plan.problem_ = std::move(parts.problem);
  plan.task_log_ = std::move(parts.task_log);
  plan.refined_log_ = std::move(parts.refined_log);
  plan.link_log_ = std::move(parts.link_log);
  plan.next_sym_ = parts.next_sym;
  plan.network_ = parts.base_network.extended(parts.next_sym * 2, parts.added_constraints);
  if (require_consistent && !plan.network_.consistent()) return std::nullopt;

  const auto n = static_cast<std::size_t>(plan.next_sym_);
  plan.tasks_by_sym_.resize(n);
  plan.refined_.assign(n, 0);
  plan.task_log_.for_each_newest_first([&](const TaskRecord& r) {
    plan.tasks_by_sym_[static_cast<std::size_t>(r.sym)] = r;
  });
  plan.refined_log_.for_each_newest_first([&](const TaskSym& s) {
    plan.refined_[static_cast<std::size_t>(s)] = 1;
  });
  plan.active_.reserve(n);
  for (TaskSym s = 0; s < plan.next_sym_; ++s) {
    if (plan.refined_[static_cast<std::size_t>(s)] == 0 && plan.tasks_by_sym_[static_cast<std::size_t>(s)].name != kNone) {
      plan.active_.push_back(s);
    }
  }
  plan.link_log_.for_each_newest_first([&](const CausalLink& l) {
    plan.supported_.emplace_back(l.consumer, l.prop);
  });
  std::sort(plan.supported_.begin(), plan.supported_.end());
  plan.flaws_ = detect_flaws(plan, plan.network_);
  return plan;
}

PartialPlan initial_plan(const ProblemPtr& problem) {
  PartialPlan::Parts parts;
  parts.problem = problem;

  TaskSym next = 0;
  std::vector<TaskRecord> recs;
  auto add_task = [&](TaskNameId name) {
    const TaskNameInfo& info = problem->name_info(name);
    TaskRecord r;
    r.sym = next++;
    r.name = name;
    r.kind = info.kind;
    r.snap = info.snap;
    r.durative = info.durative;
    parts.task_log = parts.task_log.push_front(r);
    recs.push_back(r);
    return r.sym;
  };

  TaskSym t0 = add_task(problem->t0_name);
  TaskSym tinf = add_task(problem->tinf_name);
  std::vector<TaskSym> net;
  net.reserve(problem->initial_network.size());
  for (TaskNameId name : problem->initial_network) net.push_back(add_task(name));

  auto var_of = [&](TaskSym sym, Endpoint ep) {
    const TaskRecord& r = recs[static_cast<std::size_t>(sym)];
    if (r.kind == TaskKind::Snap || ep == Endpoint::Start) return start_var(sym);
    return end_var(sym);
  };

  std::vector<NetConstraint> cs;
  cs.push_back({start_var(t0), start_var(tinf), Rel::Lt, std::nullopt});
  for (TaskSym u : net) {
    cs.push_back({start_var(t0), var_of(u, Endpoint::Start), Rel::Le, std::nullopt});
    cs.push_back({var_of(u, Endpoint::End), start_var(tinf), Rel::Le, std::nullopt});
    if (var_of(u, Endpoint::Start) != var_of(u, Endpoint::End)) {
      cs.push_back({var_of(u, Endpoint::Start), var_of(u, Endpoint::End), Rel::Le, std::nullopt});
    }
  }
  for (const MethodConstraint& mc : problem->initial_constraints) {
    VarId l = var_of(net[static_cast<std::size_t>(mc.left.subtask)], mc.left.endpoint);
    VarId r = var_of(net[static_cast<std::size_t>(mc.right.subtask)], mc.right.endpoint);
    cs.push_back(normalize_constraint(l, mc.relation, r));
  }

  parts.added_constraints = std::move(cs);
  parts.next_sym = next;
  auto plan = PartialPlan::make(std::move(parts), false);
  return *plan;
}

bool threatens(const PartialPlan& plan, const PointNetwork& tpn, TaskSym task,
               const CausalLink& link) {
  if (task == link.producer || task == link.consumer) return false;
  const TaskRecord& r = plan.task(task);
  if (r.kind != TaskKind::Snap || r.snap == kNone) return false;
  const SnapAction& a = plan.problem()->snap_actions[static_cast<std::size_t>(r.snap)];
  if (!contains(a.delete_effects, link.prop)) return false;
  VarId v = start_var(task);
  VarId p = plan.var(link.producer, Endpoint::Start);
  VarId c = plan.var(link.consumer, Endpoint::Start);
  // Inside the protected interval means both orderings are separately
  // admissible; a task forced outside it threatens nothing.
  return tpn.consistent_with({p, v, Rel::Lt, std::nullopt}) &&
         tpn.consistent_with({v, c, Rel::Lt, std::nullopt});
}

std::vector<Flaw> detect_flaws(const PartialPlan& plan, const PointNetwork& tpn) {
  std::vector<Flaw> flaws;
  std::int32_t index = 0;
  for (TaskSym s : plan.active_tasks()) {
    const TaskRecord& r = plan.task(s);
    switch (r.kind) {
      case TaskKind::Abstract: {
        Flaw f;
        f.kind = FlawKind::Decomposition;
        f.task = s;
        f.creation_index = index++;
        flaws.push_back(f);
        break;
      }
      case TaskKind::Durative: {
        Flaw f;
        f.kind = FlawKind::Durative;
        f.task = s;
        f.creation_index = index++;
        flaws.push_back(f);
        break;
      }
      case TaskKind::Snap: {
        PropSet pre = plan.instance_preconditions(s);
        for (PropId p : pre) {
          if (plan.has_supporting_link(s, p)) continue;
          Flaw f;
          f.kind = FlawKind::OpenPrecondition;
          f.task = s;
          f.prop = p;
          f.creation_index = index++;
          flaws.push_back(f);
        }
        break;
      }
    }
  }
  for (const CausalLink& l : plan.links()) {
    for (TaskSym s : plan.active_tasks()) {
      if (!threatens(plan, tpn, s, l)) continue;
      Flaw f;
      f.kind = FlawKind::CausalThreat;
      f.task = s;
      f.prop = l.prop;
      f.link = l;
      f.creation_index = index++;
      flaws.push_back(f);
    }
  }
  return flaws;
}

namespace {

std::string var_name(const PartialPlan& plan, VarId v) {
  TaskSym sym = v / 2;
  const TaskRecord& r = plan.task(sym);
  std::string t = "t" + std::to_string(sym);
  if (r.kind == TaskKind::Snap) return t;
  return (v % 2 == 0 ? "start(" : "end(") + t + ")";
}

}  // namespace

std::string PartialPlan::dump() const {
  std::ostringstream out;
  out << "tasks:\n";
  for (TaskSym s = 0; s < next_sym_; ++s) {
    const TaskRecord& r = tasks_by_sym_[static_cast<std::size_t>(s)];
    if (r.name == kNone) continue;
    out << "  t" << s << ": " << problem_->display_task_name(r.name);
    switch (r.kind) {
      case TaskKind::Snap: out << " [snap]"; break;
      case TaskKind::Durative: out << " [durative]"; break;
      case TaskKind::Abstract: out << " [abstract]"; break;
    }
    if (is_refined(s)) out << " (refined)";
    out << "\n";
  }
  out << "constraints:\n";
  for (const NetConstraint& c : network_.constraints()) {
    out << "  " << var_name(*this, c.left) << " " << rel_name(c.rel) << " "
        << var_name(*this, c.right);
    if (c.offset) out << " (offset " << to_string(*c.offset) << ")";
    out << "\n";
  }
  out << "links:\n";
  for (const CausalLink& l : links()) {
    out << "  t" << l.producer << " --" << problem_->display_prop(l.prop) << "--> t"
        << l.consumer << "\n";
  }
  out << "flaws:\n";
  for (const Flaw& f : flaws_) {
    switch (f.kind) {
      case FlawKind::OpenPrecondition:
        out << "  open " << problem_->display_prop(f.prop) << " at t" << f.task << "\n";
        break;
      case FlawKind::CausalThreat:
        out << "  threat t" << f.task << " on t" << f.link.producer << " --"
            << problem_->display_prop(f.link.prop) << "--> t" << f.link.consumer << "\n";
        break;
      case FlawKind::Decomposition:
        out << "  decompose t" << f.task << "\n";
        break;
      case FlawKind::Durative:
        out << "  compile t" << f.task << "\n";
        break;
    }
  }
  return out.str();
}

}  // namespace htep
