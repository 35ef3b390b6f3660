#include "accmax/market.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace accmax {

namespace {

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

double gross(const ScenarioModel& step, const std::vector<double>& h, std::size_t branch) {
    double v = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) v += h[j] * step.gross_return(j, branch);
    return v;
}

}  // namespace

WealthProcess wealth_from(const TreeModel& tree, const Strategy& strat, NodeId start, double v) {
    if (strat.allocations.size() != tree.nonterminal_count())
        throw std::invalid_argument("wealth_of: strategy does not match tree");
    WealthProcess w;
    w.values.assign(tree.node_count(), std::numeric_limits<double>::quiet_NaN());
    w.values[start] = v;
    std::vector<NodeId> frontier{start};
    while (!frontier.empty()) {
        std::vector<NodeId> next;
        for (NodeId s : frontier) {
            if (tree.is_leaf(s)) continue;
            const auto& h = strat.allocations[s];
            if (h.size() != tree.step().n_assets())
                throw std::invalid_argument("wealth_of: missing allocation at node '" + tree.address(s) + "'");
            double vs = w.values[s];
            if (std::abs(sum(h) - vs) > 1e-10 * std::max(1.0, std::abs(vs)))
                throw std::invalid_argument("wealth_of: allocation at node '" + tree.address(s) +
                                            "' is not self-financing");
            const auto& step = tree.step_at(s);
            for (std::size_t i = 0; i < tree.branching(); ++i) {
                NodeId c = tree.child(s, i);
                w.values[c] = gross(step, h, i);
                next.push_back(c);
            }
        }
        frontier = std::move(next);
    }
    return w;
}

WealthProcess wealth_of(const TreeModel& tree, const Strategy& strat, double v0) {
    if (v0 < 0.0) throw std::invalid_argument("wealth_of: negative initial wealth");
    return wealth_from(tree, strat, tree.root(), v0);
}

DividendStream dividends_of(const TreeModel& tree, const WealthProcess& wealth) {
    DividendStream d;
    d.values.assign(tree.node_count(), 0.0);
    for (NodeId n = 1; n < tree.node_count(); ++n) d.values[n] = wealth.values[n] - wealth.values[tree.parent(n)];
    return d;
}

DividendStream tail_dividends(const TreeModel& tree, const DividendStream& stream, int t) {
    if (t < 0 || t > tree.horizon()) throw std::out_of_range("tail_dividends: time out of range");
    DividendStream out = stream;
    for (NodeId n = 0; n < tree.level_offset(t); ++n) out.values[n] = 0.0;
    return out;
}

double path_sum(const TreeModel& tree, const DividendStream& stream, NodeId node, int from) {
    double s = 0.0;
    NodeId n = node;
    while (true) {
        if (tree.depth(n) >= from) s += stream.values[n];
        if (n == tree.root()) break;
        n = tree.parent(n);
    }
    return s;
}

std::string first_violation(const TreeModel& tree, const Strategy& strat, NodeId start, double v,
                            bool shortselling, double tol) {
    auto where = [&](NodeId s) { return s == tree.root() ? std::string("(root)") : tree.address(s); };
    std::vector<std::pair<NodeId, double>> stack{{start, v}};
    while (!stack.empty()) {
        auto [s, vs] = stack.back();
        stack.pop_back();
        if (tree.is_leaf(s)) continue;
        const auto& h = strat.allocations[s];
        if (h.size() != tree.step().n_assets()) return where(s);
        if (std::abs(sum(h) - vs) > tol * std::max(1.0, std::abs(vs))) return where(s);
        if (!shortselling) {
            for (double x : h) {
                if (x < -tol) return where(s);
            }
        }
        const auto& step = tree.step_at(s);
        for (std::size_t i = 0; i < tree.branching(); ++i) stack.emplace_back(tree.child(s, i), gross(step, h, i));
    }
    return {};
}

namespace {

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t d, bool shortselling) {
    std::vector<double> w(d);
    if (shortselling) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto& x : w) x = u(rng);
        double s = sum(w);
        w[0] += 1.0 - s;
    } else {
        std::exponential_distribution<double> e(1.0);
        for (auto& x : w) x = e(rng);
        double s = sum(w);
        for (auto& x : w) x /= s;
    }
    return w;
}

// Random admissible tail below `start` for wealth v; wealth is propagated exactly.
void sample_tail(const TreeModel& tree, Strategy& strat, NodeId start, double v, bool shortselling,
                 std::mt19937_64& rng) {
    std::vector<std::pair<NodeId, double>> stack{{start, v}};
    while (!stack.empty()) {
        auto [s, vs] = stack.back();
        stack.pop_back();
        if (tree.is_leaf(s)) continue;
        auto w = random_weights(rng, tree.step().n_assets(), shortselling);
        for (auto& x : w) x *= vs;
        const auto& step = tree.step_at(s);
        for (std::size_t i = 0; i < tree.branching(); ++i) stack.emplace_back(tree.child(s, i), gross(step, w, i));
        strat.allocations[s] = std::move(w);
    }
}

}  // namespace

FeasibilityReport check_feasible_recursion(const TreeModel& tree, double v_t, int t, bool shortselling,
                                           std::size_t samples, std::uint64_t seed,
                                           const RecursionCheckOptions& opts) {
    if (!(v_t > 0.0)) throw std::invalid_argument("check_feasible_recursion: wealth must be positive");
    if (t < 0 || t >= tree.horizon()) throw std::out_of_range("check_feasible_recursion: time out of range");
    FeasibilityReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, tree.nodes_at(t) - 1);
    const double lambda = opts.scale;
    for (std::size_t k = 0; k < samples; ++k) {
        NodeId start = tree.node(t, pick(rng));

        // (a) scaling: h in H_t(1) implies lambda h in H_t(lambda).
        Strategy unit(tree.nonterminal_count());
        sample_tail(tree, unit, start, 1.0, shortselling, rng);
        Strategy scaled = unit;
        for (auto& h : scaled.allocations) {
            for (auto& x : h) x *= lambda;
        }
        ++rep.checks;
        if (auto bad = first_violation(tree, scaled, start, lambda, shortselling); !bad.empty())
            rep.failures.push_back("scaling at node '" + bad + "'");
        auto w1 = wealth_from(tree, unit, start, 1.0);
        auto wl = wealth_from(tree, scaled, start, lambda);
        for (NodeId n : tree.leaves_under(start)) {
            if (std::abs(wl.values[n] - lambda * w1.values[n]) > 1e-12 * std::max(1.0, std::abs(wl.values[n]))) {
                rep.failures.push_back("wealth scaling at node '" + tree.address(n) + "'");
                break;
            }
        }

        // (b) recursion: one-step allocation followed by admissible tails.
        Strategy cat(tree.nonterminal_count());
        auto h = random_weights(rng, tree.step().n_assets(), shortselling);
        for (auto& x : h) x *= v_t;
        cat.allocations[start] = h;
        const auto& step = tree.step_at(start);
        for (std::size_t i = 0; i < tree.branching(); ++i) {
            NodeId c = tree.child(start, i);
            double vc = gross(step, h, i);
            if (opts.corrupt_tail && i + 1 == tree.branching()) vc *= 1.01;
            sample_tail(tree, cat, c, vc, shortselling, rng);
        }
        ++rep.checks;
        if (auto bad = first_violation(tree, cat, start, v_t, shortselling); !bad.empty())
            rep.failures.push_back("recursion at node '" + bad + "'");
    }
    return rep;
}

Strategy constant_proportion_strategy(const TreeModel& tree, const std::vector<double>& weights, double v0) {
    if (weights.size() != tree.step().n_assets())
        throw std::invalid_argument("constant_proportion_strategy: weight vector has wrong size");
    if (std::abs(sum(weights) - 1.0) > 1e-9)
        throw std::invalid_argument("constant_proportion_strategy: weights must sum to one");
    Strategy s(tree.nonterminal_count());
    std::vector<double> wealth(tree.node_count(), 0.0);
    wealth[0] = v0;
    for (NodeId n = 0; n < tree.nonterminal_count(); ++n) {
        auto& h = s.allocations[n];
        h = weights;
        for (auto& x : h) x *= wealth[n];
        const auto& step = tree.step_at(n);
        for (std::size_t i = 0; i < tree.branching(); ++i) wealth[tree.child(n, i)] = gross(step, h, i);
    }
    return s;
}

std::string strategy_to_json(const TreeModel& tree, const Strategy& strat) {
    nlohmann::json j = nlohmann::json::object();
    for (NodeId n = 0; n < strat.allocations.size(); ++n) {
        if (!strat.allocations[n].empty()) j[tree.address(n)] = strat.allocations[n];
    }
    return j.dump(2);
}

Strategy strategy_from_json(const TreeModel& tree, const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("strategy json parse error: ") + e.what());
    }
    Strategy s(tree.nonterminal_count());
    for (auto it = j.begin(); it != j.end(); ++it) {
        NodeId n = tree.node_from_address(it.key());
        if (tree.is_leaf(n)) throw InputError("strategy allocates at leaf '" + it.key() + "'");
        s.allocations[n] = it.value().get<std::vector<double>>();
        if (s.allocations[n].size() != tree.step().n_assets())
            throw InputError("allocation at '" + it.key() + "' has wrong length");
    }
    return s;
}

}  // namespace accmax
