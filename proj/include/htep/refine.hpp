#pragma once

#include <optional>
#include <string>
#include <vector>

#include "htep/plan.hpp"

namespace htep {

enum class ResolverKind : std::uint8_t { AddLink, Promote, Demote, ApplyMethod, CompileDurative };

struct Resolver {
  ResolverKind kind = ResolverKind::AddLink;
  TaskSym producer = kNone;  // AddLink
  TaskSym consumer = kNone;  // AddLink
  PropId prop = kNone;       // AddLink
  CausalLink link;           // Promote, Demote
  TaskSym task = kNone;      // Promote, Demote, ApplyMethod, CompileDurative
  MethodId method = kNone;   // ApplyMethod

  bool operator==(const Resolver&) const = default;
};

// Candidate resolvers in a fixed order: link producers ascending by symbol,
// Promote before Demote, methods ascending by id. AddLink candidates are
// pre-filtered to producers orderable before the consumer; ordering resolvers
// are emitted unconditionally and may fail at application.
std::vector<Resolver> resolvers_for(const PartialPlan& plan, const Flaw& flaw);

// nullopt when the refined network is qualitatively inconsistent.
std::optional<PartialPlan> apply_resolver(const PartialPlan& plan, const Resolver& r);

std::optional<PartialPlan> add_link(const PartialPlan& plan, TaskSym producer, TaskSym consumer,
                                    PropId prop);
std::optional<PartialPlan> order(const PartialPlan& plan, VarId left, Rel rel, VarId right);
std::optional<PartialPlan> apply_method(const PartialPlan& plan, TaskSym task, MethodId method);
std::optional<PartialPlan> compile_durative(const PartialPlan& plan, TaskSym task);

std::string describe(const Resolver& r, const PartialPlan& plan);

}  // namespace htep
