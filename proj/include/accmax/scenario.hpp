#pragma once

// Finite one-period markets and iid multinomial scenario trees.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace accmax {

/// Raised for malformed or invariant-violating input data. The message carries
/// the row/column location when one exists.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// State-indexed profit and loss of a position, per unit of initial wealth.
struct PnlVector {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

/// A finite one-period market: state probabilities and a d x |Omega| matrix of
/// gross returns. Immutable after construction.
class ScenarioModel {
public:
    /// `returns[j][w]` is the gross return of asset j in state w.
    ScenarioModel(std::vector<double> probabilities,
                  std::vector<std::vector<double>> returns,
                  std::vector<std::string> asset_names = {});

    std::size_t n_states() const { return probabilities_.size(); }
    std::size_t n_assets() const { return returns_.size(); }

    const std::vector<double>& probabilities() const { return probabilities_; }
    double probability(std::size_t state) const { return probabilities_[state]; }
    const std::vector<std::vector<double>>& returns() const { return returns_; }
    double gross_return(std::size_t asset, std::size_t state) const {
        return returns_[asset][state];
    }
    const std::vector<std::string>& asset_names() const { return asset_names_; }

    /// Gross return of the portfolio `weights` in `state` (no normalisation).
    double portfolio_return(std::span<const double> weights, std::size_t state) const;

    /// Expectation of a state-indexed vector under the model probabilities.
    double expectation(std::span<const double> values) const;

    bool operator==(const ScenarioModel& other) const = default;

private:
    std::vector<double> probabilities_;
    std::vector<std::vector<double>> returns_;
    std::vector<std::string> asset_names_;
};

/// The two-asset, four-state market used throughout the examples and golden
/// tests, with uniform state probabilities.
ScenarioModel toy_market();

enum class ScenarioFormat { csv, json };

ScenarioFormat format_from_path(const std::filesystem::path& path);

ScenarioModel load_scenarios(const std::filesystem::path& path, ScenarioFormat format);
ScenarioModel load_scenarios(const std::filesystem::path& path);
ScenarioModel parse_scenarios_csv(std::istream& in);
ScenarioModel parse_scenarios_json(const std::string& text);

/// CSV layout: header `state,prob,r_<asset>...`, one row per state, written
/// with round-trip precision.
void write_scenarios_csv(const ScenarioModel& model, std::ostream& out);
std::string scenarios_to_json(const ScenarioModel& model);
void save_scenarios(const ScenarioModel& model, const std::filesystem::path& path);

struct StudentTParams {
    std::size_t n_assets = 10;
    std::size_t n_states = 1000;
    double dof = 5.0;
    /// Per-asset location; empty means 1.002 for every asset.
    std::vector<double> location;
    /// Row-major n_assets x n_assets scale matrix; empty means 0.0004 * I.
    std::vector<double> scale;
    std::uint64_t seed = 42;
    /// Draws are clipped from below at this gross return.
    double floor = 1e-3;
};

/// Draws `n_states` equally likely return vectors from a multivariate Student t
/// distribution. Deterministic for a given seed.
ScenarioModel generate_student_t(const StudentTParams& params);

/// values[w] = sum_j h_j R[j][w] - 1 for a fully invested portfolio h.
PnlVector pnl_of_weights(const ScenarioModel& model, std::span<const double> weights,
                         bool shortselling);

/// values[w] = sum_j h_j R[j][w] - 1 without checking the budget; used on
/// solver output, which meets the budget only to within tolerance.
PnlVector pnl_of_allocation(const ScenarioModel& model, std::span<const double> weights);

using NodeId = std::size_t;

/// A recombination-free multinomial tree of depth `horizon`; every node branches
/// according to `step` unless a per-node override is installed. Nodes are
/// numbered in level order: depth t holds b^t nodes, and the node reached by
/// branch path (i_1,...,i_t) has index sum_k i_k b^(t-k) within its level.
class TreeModel {
public:
    TreeModel(int horizon, ScenarioModel step);

    int horizon() const { return horizon_; }
    const ScenarioModel& step() const { return step_; }
    std::size_t branching() const { return step_.n_states(); }

    /// Branch distribution at a non-terminal node.
    const ScenarioModel& step_at(NodeId node) const;
    /// Replaces the branch distribution below one node. Used to build non-iid
    /// trees; the branch count must stay the same.
    void override_step(NodeId node, ScenarioModel model);
    bool is_iid() const { return overrides_.empty(); }

    std::size_t nodes_at(int depth) const;
    std::size_t level_offset(int depth) const;
    std::size_t node_count() const { return level_offset(horizon_ + 1); }
    std::size_t nonterminal_count() const { return level_offset(horizon_); }

    NodeId root() const { return 0; }
    NodeId node(int depth, std::size_t index) const { return level_offset(depth) + index; }
    int depth(NodeId node) const;
    std::size_t index_in_level(NodeId node) const { return node - level_offset(depth(node)); }
    NodeId child(NodeId node, std::size_t branch) const;
    NodeId parent(NodeId node) const;
    std::size_t branch_of(NodeId node) const;
    bool is_leaf(NodeId node) const { return depth(node) == horizon_; }

    /// Branch indices from the root; empty for the root.
    std::vector<std::size_t> path(NodeId node) const;
    NodeId node_from_path(std::span<const std::size_t> path) const;
    /// Dot-separated branch indices, "" for the root.
    std::string address(NodeId node) const;
    NodeId node_from_address(const std::string& address) const;

    /// Probability of reaching `node` from the root.
    double path_probability(NodeId node) const;
    /// Probability of reaching `descendant` conditional on being at `ancestor`.
    double conditional_probability(NodeId ancestor, NodeId descendant) const;

    /// Leaves of the subtree below `node` (the node itself if it is a leaf).
    std::vector<NodeId> leaves_under(NodeId node) const;

private:
    int horizon_;
    ScenarioModel step_;
    std::map<NodeId, ScenarioModel> overrides_;
};

TreeModel parse_tree_json(const std::string& text);
TreeModel load_tree(const std::filesystem::path& path);
std::string tree_to_json(const TreeModel& tree);

}  // namespace accmax
