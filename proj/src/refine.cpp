#include "htep/refine.hpp"

#include <sstream>

namespace htep {

namespace {

PartialPlan::Parts shared_parts(const PartialPlan& plan) {
  PartialPlan::Parts parts;
  parts.problem = plan.problem();
  parts.task_log = plan.task_log();
  parts.refined_log = plan.refined_log();
  parts.link_log = plan.link_log();
  parts.base_network = plan.network();
  parts.next_sym = plan.next_sym();
  return parts;
}

}  // namespace

std::vector<Resolver> resolvers_for(const PartialPlan& plan, const Flaw& flaw) {
  std::vector<Resolver> out;
  switch (flaw.kind) {
    case FlawKind::OpenPrecondition: {
      VarId need = plan.var(flaw.task, Endpoint::Start);
      for (TaskSym s : plan.active_tasks()) {
        if (s == flaw.task) continue;
        const TaskRecord& r = plan.task(s);
        if (r.kind != TaskKind::Snap || r.snap == kNone) continue;
        const SnapAction& a = plan.problem()->snap(r.snap);
        if (!contains(a.add_effects, flaw.prop)) continue;
        if (!plan.network().consistent_with({start_var(s), need, Rel::Lt, std::nullopt})) continue;
        Resolver res;
        res.kind = ResolverKind::AddLink;
        res.producer = s;
        res.consumer = flaw.task;
        res.prop = flaw.prop;
        out.push_back(res);
      }
      break;
    }
    case FlawKind::CausalThreat: {
      // Only orderings the network can still accept count as resolvers, so a
      // doubly squeezed threat shows up as a dead end right here.
      VarId breaker = plan.var(flaw.task, Endpoint::Start);
      if (plan.network().consistent_with(
              {plan.var(flaw.link.consumer, Endpoint::Start), breaker, Rel::Lt, std::nullopt})) {
        Resolver promote;
        promote.kind = ResolverKind::Promote;
        promote.task = flaw.task;
        promote.link = flaw.link;
        out.push_back(promote);
      }
      if (plan.network().consistent_with(
              {breaker, plan.var(flaw.link.producer, Endpoint::Start), Rel::Lt, std::nullopt})) {
        Resolver demote;
        demote.kind = ResolverKind::Demote;
        demote.task = flaw.task;
        demote.link = flaw.link;
        out.push_back(demote);
      }
      break;
    }
    case FlawKind::Decomposition: {
      for (MethodId m : plan.problem()->name_info(plan.task(flaw.task).name).methods) {
        Resolver res;
        res.kind = ResolverKind::ApplyMethod;
        res.task = flaw.task;
        res.method = m;
        out.push_back(res);
      }
      break;
    }
    case FlawKind::Durative: {
      Resolver res;
      res.kind = ResolverKind::CompileDurative;
      res.task = flaw.task;
      out.push_back(res);
      break;
    }
  }
  return out;
}

std::optional<PartialPlan> add_link(const PartialPlan& plan, TaskSym producer, TaskSym consumer,
                                    PropId prop) {
  PartialPlan::Parts parts = shared_parts(plan);
  parts.link_log = parts.link_log.push_front({producer, consumer, prop});
  parts.added_constraints.push_back({plan.var(producer, Endpoint::Start),
                                     plan.var(consumer, Endpoint::Start), Rel::Lt, std::nullopt});
  return PartialPlan::make(std::move(parts), true);
}

std::optional<PartialPlan> order(const PartialPlan& plan, VarId left, Rel rel, VarId right) {
  PartialPlan::Parts parts = shared_parts(plan);
  parts.added_constraints.push_back(normalize_constraint(left, rel, right));
  return PartialPlan::make(std::move(parts), true);
}

std::optional<PartialPlan> apply_method(const PartialPlan& plan, TaskSym task, MethodId method) {
  const GroundProblem& prob = *plan.problem();
  const Method& m = prob.method(method);
  PartialPlan::Parts parts = shared_parts(plan);
  parts.refined_log = parts.refined_log.push_front(task);

  TaskSym base = parts.next_sym;
  std::vector<TaskRecord> fresh;
  fresh.reserve(m.subtasks.size());
  for (std::size_t i = 0; i < m.subtasks.size(); ++i) {
    const TaskNameInfo& info = prob.name_info(m.subtasks[i]);
    TaskRecord r;
    r.sym = base + static_cast<TaskSym>(i);
    r.name = m.subtasks[i];
    r.kind = info.kind;
    r.snap = info.snap;
    r.durative = info.durative;
    parts.task_log = parts.task_log.push_front(r);
    fresh.push_back(r);
  }
  parts.next_sym = base + static_cast<TaskSym>(m.subtasks.size());

  auto fresh_var = [&](const MethodTimePoint& tp) {
    const TaskRecord& r = fresh[static_cast<std::size_t>(tp.subtask)];
    if (r.kind == TaskKind::Snap || tp.endpoint == Endpoint::Start) return start_var(r.sym);
    return end_var(r.sym);
  };

  auto& cs = parts.added_constraints;
  for (const MethodConstraint& mc : m.constraints) {
    cs.push_back(normalize_constraint(fresh_var(mc.left), mc.relation, fresh_var(mc.right)));
  }
  // Containment keeps the refined task's interval as the envelope of its
  // subtasks, and well-formed even when the method is empty.
  VarId ts = plan.var(task, Endpoint::Start);
  VarId te = plan.var(task, Endpoint::End);
  for (const TaskRecord& r : fresh) {
    cs.push_back({ts, fresh_var({r.sym - base, Endpoint::Start}), Rel::Le, std::nullopt});
    cs.push_back({fresh_var({r.sym - base, Endpoint::End}), te, Rel::Le, std::nullopt});
    if (r.kind != TaskKind::Snap) {
      cs.push_back({start_var(r.sym), end_var(r.sym), Rel::Le, std::nullopt});
    }
  }
  cs.push_back({ts, te, Rel::Le, std::nullopt});

  return PartialPlan::make(std::move(parts), true);
}

std::optional<PartialPlan> compile_durative(const PartialPlan& plan, TaskSym task) {
  const GroundProblem& prob = *plan.problem();
  const TaskRecord& rec = plan.task(task);
  const DurativeAction& d = prob.durative(rec.durative);
  PartialPlan::Parts parts = shared_parts(plan);
  parts.refined_log = parts.refined_log.push_front(task);

  TaskSym s_sym = parts.next_sym;
  TaskSym e_sym = parts.next_sym + 1;
  parts.next_sym += 2;

  TaskRecord start;
  start.sym = s_sym;
  start.name = prob.snap(d.start).name;
  start.kind = TaskKind::Snap;
  start.snap = d.start;
  if (!d.invariants.empty()) {
    start.extra_preconditions = std::make_shared<const PropSet>(d.invariants);
  }
  TaskRecord end;
  end.sym = e_sym;
  end.name = prob.snap(d.end).name;
  end.kind = TaskKind::Snap;
  end.snap = d.end;
  parts.task_log = parts.task_log.push_front(start);
  parts.task_log = parts.task_log.push_front(end);

  auto& cs = parts.added_constraints;
  // The refined task's time points stay alive as aliases of the snap pair,
  // so inherited constraints keep holding without rewriting.
  cs.push_back({start_var(task), start_var(s_sym), Rel::Eq, std::nullopt});
  cs.push_back({end_var(task), start_var(e_sym), Rel::Eq, std::nullopt});
  cs.push_back({start_var(s_sym), start_var(e_sym), Rel::Lt, std::nullopt});
  cs.push_back({start_var(s_sym), start_var(e_sym), Rel::Eq, d.duration});

  for (PropId p : d.invariants) {
    parts.link_log = parts.link_log.push_front({s_sym, e_sym, p});
  }

  return PartialPlan::make(std::move(parts), true);
}

std::optional<PartialPlan> apply_resolver(const PartialPlan& plan, const Resolver& r) {
  switch (r.kind) {
    case ResolverKind::AddLink:
      return add_link(plan, r.producer, r.consumer, r.prop);
    case ResolverKind::Promote:
      return order(plan, plan.var(r.link.consumer, Endpoint::Start),
                   Rel::Lt, plan.var(r.task, Endpoint::Start));
    case ResolverKind::Demote:
      return order(plan, plan.var(r.task, Endpoint::Start), Rel::Lt,
                   plan.var(r.link.producer, Endpoint::Start));
    case ResolverKind::ApplyMethod:
      return apply_method(plan, r.task, r.method);
    case ResolverKind::CompileDurative:
      return compile_durative(plan, r.task);
  }
  return std::nullopt;
}

std::string describe(const Resolver& r, const PartialPlan& plan) {
  const GroundProblem& prob = *plan.problem();
  std::ostringstream out;
  switch (r.kind) {
    case ResolverKind::AddLink:
      out << "link t" << r.producer << " --" << prob.display_prop(r.prop) << "--> t" << r.consumer;
      break;
    case ResolverKind::Promote:
      out << "promote t" << r.task << " after t" << r.link.consumer;
      break;
    case ResolverKind::Demote:
      out << "demote t" << r.task << " before t" << r.link.producer;
      break;
    case ResolverKind::ApplyMethod:
      out << "decompose t" << r.task << " via " << prob.symbols.name(prob.method(r.method).name);
      break;
    case ResolverKind::CompileDurative:
      out << "compile t" << r.task;
      break;
  }
  return out.str();
}

}  // namespace htep
