#pragma once

// Time-consistent mean-risk frontiers on iid trees, the dynamic mean-loss
// frontier, and policy comparisons along a path.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "accmax/market.hpp"
#include "accmax/scenario.hpp"

namespace accmax {

/// Efficient boundary of an upper image in the (risk, mean) plane: vertices
/// with risk and mean both strictly increasing, optionally followed by a ray.
struct FrontierPolyline {
    std::vector<std::pair<double, double>> vertices;
    /// Direction (d risk, d mean) of the unbounded last edge.
    std::optional<std::pair<double, double>> ray;
    /// First-step allocation (money per asset) attaining each vertex.
    std::vector<std::vector<double>> allocations;

    std::size_t size() const { return vertices.size(); }
};

/// Frontier for unit wealth at each time t = 0..T-1 (index t).
struct FrontierSequence {
    double q = 0.01;
    bool shortselling = false;
    double wealth = 1.0;
    std::vector<FrontierPolyline> frontiers;
    std::size_t lp_solves = 0;
};

/// Backward recursion F_{T-1}, ..., F_0 for the recursive tvar at level q.
/// Each stage is a bi-objective LP in which the children draw from w_i F_{t+1}.
FrontierSequence meanrisk_frontiers(const TreeModel& tree, double q, bool shortselling, double wealth = 1.0);

/// The time-0 frontier from one bi-objective LP over the whole tree. Limited
/// to small trees.
FrontierPolyline direct_frontier(const TreeModel& tree, double q, bool shortselling, double wealth = 1.0);

/// Symmetric Hausdorff distance between the vertex sets.
double vertex_hausdorff(const FrontierPolyline& a, const FrontierPolyline& b);

/// Largest mean on the frontier at risk level r; -infinity left of the frontier.
double frontier_mean_at(const FrontierPolyline& f, double risk);

/// Smallest risk reaching mean m; +infinity above the frontier.
double frontier_risk_at(const FrontierPolyline& f, double mean);

/// Euclidean distance from (risk, mean) to the vertex chain and its ray.
double frontier_distance(const FrontierPolyline& f, double risk, double mean);

/// True when the frontier offers at least `margin` more mean at the same risk
/// or at least `margin` less risk at the same mean, and the point lies at
/// least `margin` away from the frontier.
bool strictly_dominated(const FrontierPolyline& f, double risk, double mean, double margin);

struct ProfilePoint {
    int t = 0;
    std::string node;
    double risk = 0.0;
    double mean = 0.0;
    /// mean^+ / risk^+ with a/0 = +infinity.
    double ratio = 0.0;
};

double profile_ratio(double risk, double mean);

/// Maximiser of mean^+/risk^+ over the frontier. The zero position (0, 0) is
/// excluded. When the ray's slope beats every vertex, the supremum is that
/// slope and the returned point lies one risk unit along the ray.
ProfilePoint max_ratio_point(const FrontierPolyline& f);

struct DglrResult {
    FrontierPolyline frontier;  // (E[(V_T - v0)^-], E[V_T - v0])
    double max_ratio = 0.0;
    Strategy optimal;
    std::size_t lp_iterations = 0;
    std::size_t lp_solves = 0;
};

/// Mean-loss frontier of terminal wealth over self-financing strategies with
/// initial wealth v0. For v0 = 0 the frontier is a ray from the origin whose
/// slope is found by backward induction and bisection on the slope.
DglrResult meanloss_frontier_dglr(const TreeModel& tree, double v0, bool shortselling = true);

/// Unit-wealth strategy that plans at the root for mean `target_mean` with
/// least risk and, at every node, carries out the plan made at its parent.
Strategy consistent_strategy(const TreeModel& tree, const FrontierSequence& seq, double target_mean);

enum class Policy { consistent, switching, myopic };

const char* to_string(Policy p);

struct PolicyProfile {
    Policy policy;
    std::vector<ProfilePoint> points;
    /// Per time: dominated by a point of F_t (see strictly_dominated).
    std::vector<bool> dominated;
};

/// Profiles along the path given by branch indices (length T-1; defaults to
/// branch 0 throughout) for the three policies.
std::vector<PolicyProfile> simulate_policies(const TreeModel& tree, const FrontierSequence& seq,
                                             std::vector<std::size_t> path = {}, double margin = 1e-6);

struct ScalarizationWeight {
    double lambda = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// lambda = E / (s rho) with s a slope of the frontier at the point. At a
/// vertex between two facets the admissible interval is reported and its
/// midpoint returned; end vertices use their single adjacent facet.
ScalarizationWeight moving_scalarization(const FrontierPolyline& f, double risk, double mean, double tol = 1e-7);

void write_frontiers_csv(const FrontierSequence& seq, std::ostream& out);

}  // namespace accmax
