#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "htep/model.hpp"
#include "htep/rational.hpp"
#include "htep/shared_list.hpp"

namespace htep {

using VarId = std::int32_t;

// Constraint between two time variables, normalized so the relation is one of
// {<, <=, =, !=} (> and >= swap operands on ingestion). offset is present only
// with Eq and encodes right - left = offset.
struct NetConstraint {
  VarId left = 0;
  VarId right = 0;
  Rel rel = Rel::Lt;
  std::optional<Rational> offset;

  bool operator==(const NetConstraint&) const = default;
};

NetConstraint normalize_constraint(VarId left, Rel rel, VarId right,
                                   std::optional<Rational> offset = std::nullopt);

// SCC condensation of the qualitative constraint graph. Within a consistent
// network every variable of a component is provably equal; the component DAG
// carries strictness flags for derived-order queries.
struct Condensation {
  bool consistent = true;
  std::int32_t num_comps = 0;
  std::vector<std::int32_t> comp;                                 // var -> component
  std::vector<std::vector<std::pair<std::int32_t, bool>>> edges;  // comp -> (comp, strict)

  bool reaches(std::int32_t from, std::int32_t to) const;
};

// Persistent qualitative + metric network. Extending a network shares the
// parent's constraint list; the condensation is computed once per value.
class PointNetwork {
 public:
  PointNetwork() = default;
  explicit PointNetwork(std::int32_t num_vars);

  [[nodiscard]] PointNetwork extended(std::int32_t num_vars,
                                      const std::vector<NetConstraint>& added) const;

  std::int32_t num_vars() const { return num_vars_; }
  std::size_t constraint_count() const { return constraints_.size(); }
  std::vector<NetConstraint> constraints() const { return constraints_.to_vector(); }

  bool consistent() const;
  bool consistent_with(const NetConstraint& extra) const;
  const Condensation& condensation() const;

  // True iff left rel right already follows from the network. Supported for
  // rel in {Lt, Le, Eq}.
  bool entails(VarId left, Rel rel, VarId right) const;

 private:
  SharedList<NetConstraint> constraints_;
  std::int32_t num_vars_ = 0;
  std::shared_ptr<const Condensation> cond_;
};

struct Schedule {
  std::vector<Rational> times;  // indexed by VarId; every variable assigned
  Rational makespan{0};
};

// Earliest rational assignment with all variables >= 0. Strict inequalities
// separate endpoints by epsilon; != constraints left undecided by the
// qualitative classes are decided by branching on (<, >), keeping the branch
// with the smallest makespan. Empty when temporally infeasible.
std::optional<Schedule> solve_metric(const PointNetwork& network, const Rational& epsilon);

Rational makespan(const Schedule& schedule);

// Independent check used by the validator and tests: does the assignment
// satisfy every constraint, with strict separation of at least epsilon?
bool satisfies(const std::vector<NetConstraint>& constraints, const std::vector<Rational>& times,
               const Rational& epsilon);

}  // namespace htep
