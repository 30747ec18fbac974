#pragma once

#include <cstdint>
#include <limits>

#include "htep/plan.hpp"
#include "htep/refine.hpp"

namespace htep {

using Estimate = std::int64_t;

// Saturating infinity for unrefinable tasks.
inline constexpr Estimate kInfEstimate = std::numeric_limits<Estimate>::max() / 4;

inline Estimate sat_add(Estimate a, Estimate b) {
  if (a >= kInfEstimate || b >= kInfEstimate) return kInfEstimate;
  return a + b;
}

// Task decomposition graph estimates, indexed by TaskNameId. Both are
// min-over-methods fixpoints starting from +inf on abstract names.
//
// tc: mandatory snap instances a name expands to (snap 1, durative 2).
// modifications: refinement steps plus one causal link per precondition the
// expansion introduces (snap |pre|; durative 1 + |pre(start) u inv| +
// |pre(end)|; abstract 1 + subtask sum).
struct TDG {
  std::vector<Estimate> tc;
  std::vector<Estimate> modifications;
};

TDG build_tdg(const GroundProblem& problem);

struct HeuristicWeights {
  Estimate unrefined = 3;  // h_fape
  Estimate open = 1;       // h_fape
  Estimate threat = 1;     // h_fape
  Estimate link_credit = 1;  // h_tdgm
};

Estimate h_f_tc(const PartialPlan& plan, const TDG& tdg);
Estimate h_tdgm(const PartialPlan& plan, const TDG& tdg, Estimate link_credit = 1);
Estimate h_fape(const PartialPlan& plan, const HeuristicWeights& w = {});

enum class HeuristicKind : std::uint8_t { Tdgm, FTc, Fape };
enum class FlawStrategy : std::uint8_t { Lcfr, Fape };

std::string_view heuristic_name(HeuristicKind k);
std::string_view strategy_name(FlawStrategy s);
std::optional<HeuristicKind> heuristic_from(std::string_view name);
std::optional<FlawStrategy> strategy_from(std::string_view name);

Estimate evaluate(HeuristicKind kind, const HeuristicWeights& w, const TDG& tdg,
                  const PartialPlan& plan);

// LCFR: fewest resolvers first. FAPE: tiers (durative and decomposition,
// then open preconditions, then threats), fewest resolvers within the tier.
// Ties in both: kind order Durative, Decomposition, Threat, OpenPrecondition,
// then creation index.
const Flaw& select_flaw(const PartialPlan& plan, FlawStrategy strategy);

}  // namespace htep
