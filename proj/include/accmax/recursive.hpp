#pragma once

// Dynamic acceptability maximisation under the recursive tvar family on iid
// trees: the one-period problem, its constant-proportion extension, and a
// node-by-node check that the optimal index does not depend on node or wealth.

#include <cstddef>
#include <string>
#include <vector>

#include "accmax/bisect.hpp"
#include "accmax/dynrisk.hpp"
#include "accmax/market.hpp"
#include "accmax/scenario.hpp"

namespace accmax {

struct OnePeriodResult {
    BisectStatus status = BisectStatus::bracketed;
    /// Interval midpoint; +infinity above range, 0 below range.
    double alpha_star = 0.0;
    double x_L = 0.0;
    double x_U = kInf;
    /// Unit-wealth epsilon-solution (empty below range).
    std::vector<double> weights;
};

/// Static AIT maximisation of the one-step model.
OnePeriodResult one_period_max(const ScenarioModel& step, bool shortselling, BisectionConfig cfg = {});

Strategy build_constant_proportion_strategy(const TreeModel& tree, const std::vector<double>& weights, double v0);

/// Bracket [x_L, x_U] of sup{x >= 0 : rho^x_t(D^{[t+1,T]}) <= 0} at `node`,
/// where rho^x is the recursive tvar at level 1/(1+x). Width < eps.
struct IndexBracket {
    double x_L = 0.0;
    double x_U = kInf;
    double mid() const;
};

IndexBracket dynamic_ait(const TreeModel& tree, const DividendStream& stream, NodeId node, double eps);

struct VerifyOptions {
    double epsilon = 1e-4;
    std::vector<double> wealths{0.5, 1.0, 3.0};
    /// Deepest time checked (clamped to T-1).
    int depth_cap = 1 << 20;
    double sign_tolerance = 1e-9;
};

struct NodeIndexRow {
    std::string node;
    int depth = 0;
    double wealth = 1.0;
    IndexBracket bracket;
};

struct ConstancyReport {
    std::vector<NodeIndexRow> rows;
    /// One-period optimum of the root step model.
    OnePeriodResult one_period;
    /// Largest distance of a node's bracket midpoint from the one-period value.
    double max_deviation = 0.0;
    /// Dynamic index of the constant-proportion strategy built from the
    /// one-period epsilon-solution, at the root.
    IndexBracket constant_strategy;
    double epsilon = 1e-4;
    std::size_t lp_solves = 0;

    /// Every node within 2 eps of the one-period value and the constant
    /// strategy within 2 eps of the root optimum.
    bool ok() const;
    std::string to_json() const;
};

/// Maximal dynamic AIT at every node up to the depth cap and every wealth,
/// each found by bisection over nested per-node risk minimisations that use
/// the children's optimal continuation values. No short-selling.
ConstancyReport verify_constant_acceptability(const TreeModel& tree, const VerifyOptions& opts = {});

/// Smallest recursive tvar (level q) of V_T - V_t reachable from `node` with
/// wealth v, computed bottom-up with one LP per node of the subtree.
double nested_min_risk(const TreeModel& tree, NodeId node, double v, double q, std::size_t* lp_solves = nullptr);

}  // namespace accmax
