#pragma once

// Self-financing strategies, wealth and dividend processes on a scenario tree.

#include <cstdint>
#include <string>
#include <vector>

#include "accmax/scenario.hpp"

namespace accmax {

/// Monetary amounts per asset at each non-terminal node, indexed by NodeId.
/// An empty vector marks a node without an allocation.
struct Strategy {
    std::vector<std::vector<double>> allocations;

    explicit Strategy(std::size_t nonterminal_nodes = 0) : allocations(nonterminal_nodes) {}
};

/// Wealth per node, indexed by NodeId.
struct WealthProcess {
    std::vector<double> values;
};

/// Dividend per node: D at the root is 0 and D_s = V_s - V_{s-1} elsewhere.
struct DividendStream {
    std::vector<double> values;
};

/// Forward wealth recursion V_child = R_child . h_parent from V_root = v0.
/// Throws on a missing allocation or a self-financing violation.
WealthProcess wealth_of(const TreeModel& tree, const Strategy& strat, double v0);

/// Same recursion restricted to the subtree below `start`, which holds wealth v.
/// Entries outside the subtree are NaN.
WealthProcess wealth_from(const TreeModel& tree, const Strategy& strat, NodeId start, double v);

DividendStream dividends_of(const TreeModel& tree, const WealthProcess& wealth);

/// Zeroes the entries before time t.
DividendStream tail_dividends(const TreeModel& tree, const DividendStream& stream, int t);

/// Sum of dividends from `from` (exclusive of earlier times) down to `node`.
double path_sum(const TreeModel& tree, const DividendStream& stream, NodeId node, int from = 0);

/// Address of the first node in the subtree below `start` where the strategy
/// is not self-financing (or violates no-shortselling), "(root)" for the root;
/// empty when admissible for initial wealth v.
std::string first_violation(const TreeModel& tree, const Strategy& strat, NodeId start, double v,
                            bool shortselling, double tol = 1e-10);

struct FeasibilityReport {
    std::size_t checks = 0;
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
};

struct RecursionCheckOptions {
    double scale = 2.5;
    /// Negative control: perturb the wealth passed to one tail.
    bool corrupt_tail = false;
};

/// Property test of the feasible-set scaling H_t(v) = v H_t(1) and of the
/// concatenation of one-step allocations with admissible tails.
FeasibilityReport check_feasible_recursion(const TreeModel& tree, double v_t, int t, bool shortselling,
                                           std::size_t samples, std::uint64_t seed,
                                           const RecursionCheckOptions& opts = {});

/// Allocation at every node equal to node wealth times fixed weights.
Strategy constant_proportion_strategy(const TreeModel& tree, const std::vector<double>& weights, double v0);

std::string strategy_to_json(const TreeModel& tree, const Strategy& strat);
Strategy strategy_from_json(const TreeModel& tree, const std::string& text);

}  // namespace accmax
