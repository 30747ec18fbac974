#include "htep/model.hpp"

namespace htep {

std::string_view rel_name(Rel r) {
  switch (r) {
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Gt: return ">";
    case Rel::Ge: return ">=";
    case Rel::Eq: return "=";
    case Rel::Ne: return "!=";
  }
  return "?";
}

std::string GroundProblem::display_prop(PropId p) const {
  const Proposition& prop = propositions.get(p);
  std::string out = "(";
  out += symbols.name(prop.predicate);
  for (Sym a : prop.arguments) {
    out += ' ';
    out += symbols.name(a);
  }
  out += ')';
  return out;
}

std::string GroundProblem::display_task_name(TaskNameId t) const {
  const TaskNameInfo& info = name_info(t);
  std::string out(symbols.name(info.head));
  for (Sym a : info.args) {
    out += ' ';
    out += symbols.name(a);
  }
  return out;
}

bool applicable(const SnapAction& action, const PropSet& state) {
  return is_subset(action.preconditions, state);
}

PropSet apply(const SnapAction& action, const PropSet& state) {
  return set_union(set_minus(state, action.delete_effects), action.add_effects);
}

}  // namespace htep
