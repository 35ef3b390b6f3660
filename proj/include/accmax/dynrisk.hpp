#pragma once

// Recursively composed dynamic risk measures and dynamic indices on trees.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "accmax/market.hpp"
#include "accmax/scenario.hpp"

namespace accmax {

enum class OneStepKind { tvar, expectation_of_loss };

/// The conditional one-step measure applied at every node.
struct OneStepRisk {
    OneStepKind kind = OneStepKind::tvar;
    double q = 0.01;
};

/// Value per node, indexed by NodeId (NaN where undefined).
struct NodeValuation {
    std::vector<double> values;
};

/// One-step risk of the branch payoffs x_i below a node.
double one_step_risk(const OneStepRisk& step, const ScenarioModel& branch_model, const std::vector<double>& payoff);

/// rho_T = -D_T and rho_t = rho(-rho_{t+1}) - D_t, applied node by node.
NodeValuation recursive_risk(const TreeModel& tree, const DividendStream& stream, const OneStepRisk& step);

/// Conditional expectation of the summed dividends from each node's time to T.
NodeValuation conditional_tail_mean(const TreeModel& tree, const DividendStream& stream);

using Valuation = std::function<NodeValuation(const TreeModel&, const DividendStream&)>;

/// Non-recursive reference valuation: tvar of the summed tail dividends taken
/// directly over the leaves below each node.
NodeValuation flat_tail_tvar(const TreeModel& tree, const DividendStream& stream, double q);

struct ConsistencyReport {
    std::size_t checks = 0;
    double max_discrepancy = 0.0;
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
};

/// Builds pairs of streams that agree at time t and have equal time-(t+1)
/// values, then compares their time-t values. `valuation` defaults to the
/// recursive composition of `step`.
ConsistencyReport check_strong_consistency(const TreeModel& tree, const OneStepRisk& step, std::size_t samples,
                                           std::uint64_t seed, Valuation valuation = {});

/// (E_t[sum_{s>=t} D_s])^+ / (pi_t(sum_{s>=t} D_s))^+ with pi the recursive
/// dynamic tvar of `pi`; a/0 = +infinity.
double eval_draroc(const TreeModel& tree, const DividendStream& stream, NodeId node, const OneStepRisk& pi);

/// (E_t[sum_{s>=t} D_s])^+ / E_t[(sum_{s>=t} D_s)^-] by leaf enumeration.
double eval_dglr(const TreeModel& tree, const DividendStream& stream, NodeId node);

}  // namespace accmax
