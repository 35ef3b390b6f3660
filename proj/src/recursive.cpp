#include "accmax/recursive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "accmax/lp.hpp"
#include "accmax/risk.hpp"
#include "json.hpp"

namespace accmax {

OnePeriodResult one_period_max(const ScenarioModel& step, bool shortselling, BisectionConfig cfg) {
    if (cfg.variant == Variant::original) cfg.variant = Variant::modified;
    auto trace = maximize(tvar_family(), step, shortselling, cfg);
    OnePeriodResult r;
    r.status = trace.status;
    r.x_L = trace.x_L;
    r.x_U = trace.x_U;
    switch (trace.status) {
        case BisectStatus::bracketed: r.alpha_star = 0.5 * (trace.x_L + trace.x_U); break;
        case BisectStatus::above_upper_range: r.alpha_star = kInf; break;
        case BisectStatus::below_lower_range: r.alpha_star = 0.0; break;
    }
    if (trace.epsilon_solution) r.weights = *trace.epsilon_solution;
    return r;
}

Strategy build_constant_proportion_strategy(const TreeModel& tree, const std::vector<double>& weights, double v0) {
    return constant_proportion_strategy(tree, weights, v0);
}

double IndexBracket::mid() const {
    if (std::isinf(x_U)) return kInf;
    return 0.5 * (x_L + x_U);
}

namespace {

// Bracket search by doubling/halving from x = 1, then halving the interval.
template <class Positive>
IndexBracket bisect_sign(Positive positive, double eps) {
    IndexBracket b;
    double x = 1.0;
    if (positive(x)) {
        b.x_U = x;
        for (int k = 0; k < 60; ++k) {
            x *= 0.5;
            if (!positive(x)) {
                b.x_L = x;
                break;
            }
            b.x_U = x;
        }
        if (b.x_L == 0.0) return b;
    } else {
        b.x_L = x;
        for (int k = 0; k < 60; ++k) {
            x *= 2.0;
            if (positive(x)) {
                b.x_U = x;
                break;
            }
            b.x_L = x;
        }
        if (std::isinf(b.x_U)) return b;
    }
    while (b.x_U - b.x_L >= eps) {
        double m = 0.5 * (b.x_L + b.x_U);
        if (m <= b.x_L || m >= b.x_U) break;
        if (positive(m)) b.x_U = m;
        else b.x_L = m;
    }
    return b;
}

// min over fully invested h >= 0 of tvar_q over branches of the loss
// w_i (c_i - 1) + v, with w_i = R_i . h; c_i is the child's unit continuation.
double node_lp(const ScenarioModel& step, const std::vector<double>& cont, double v, double q) {
    const std::size_t d = step.n_assets(), b = step.n_states();
    LinearProgram lp;
    std::vector<Term> budget;
    std::vector<std::size_t> h(d);
    for (std::size_t j = 0; j < d; ++j) {
        h[j] = lp.add_variable(0.0, kInf);
        budget.push_back({h[j], 1.0});
    }
    lp.add_row(budget, Relation::eq, v);
    std::size_t zeta = lp.add_free_variable(1.0);
    for (std::size_t i = 0; i < b; ++i) {
        std::size_t s = lp.add_variable(0.0, kInf, step.probability(i) / q);
        std::vector<Term> t{{s, 1.0}, {zeta, 1.0}};
        for (std::size_t j = 0; j < d; ++j) t.push_back({h[j], -step.gross_return(j, i) * (cont[i] - 1.0)});
        lp.add_row(t, Relation::ge, v);
    }
    auto sol = solve_lp(lp);
    if (!sol.optimal()) throw std::runtime_error(std::string("nested risk LP ended ") + to_string(sol.status));
    return sol.value;
}

double unit_continuation(const TreeModel& tree, NodeId node, double q, std::size_t& solves) {
    if (tree.is_leaf(node)) return 0.0;
    std::vector<double> cont(tree.branching());
    for (std::size_t i = 0; i < tree.branching(); ++i) cont[i] = unit_continuation(tree, tree.child(node, i), q, solves);
    ++solves;
    return node_lp(tree.step_at(node), cont, 1.0, q);
}

}  // namespace

double nested_min_risk(const TreeModel& tree, NodeId node, double v, double q, std::size_t* lp_solves) {
    std::size_t solves = 0;
    double out = 0.0;
    if (!tree.is_leaf(node)) {
        std::vector<double> cont(tree.branching());
        for (std::size_t i = 0; i < tree.branching(); ++i)
            cont[i] = unit_continuation(tree, tree.child(node, i), q, solves);
        ++solves;
        out = node_lp(tree.step_at(node), cont, v, q);
    }
    if (lp_solves) *lp_solves += solves;
    return out;
}

IndexBracket dynamic_ait(const TreeModel& tree, const DividendStream& stream, NodeId node, double eps) {
    const int t = tree.depth(node);
    DividendStream tail = tail_dividends(tree, stream, t + 1);
    auto spec = tvar_family();
    auto positive = [&](double x) {
        OneStepRisk step{OneStepKind::tvar, spec.level_of(x)};
        return recursive_risk(tree, tail, step).values[node] > 1e-9;
    };
    return bisect_sign(positive, eps);
}

bool ConstancyReport::ok() const {
    if (one_period.status != BisectStatus::bracketed) return false;
    const double ref = one_period.alpha_star;
    for (const auto& r : rows) {
        if (!(std::abs(r.bracket.mid() - ref) < 2.0 * epsilon)) return false;
    }
    double root = ref;
    for (const auto& r : rows) {
        if (r.depth == 0 && r.wealth == 1.0) root = r.bracket.mid();
    }
    return constant_strategy.x_U >= root - 2.0 * epsilon;
}

std::string ConstancyReport::to_json() const {
    nlohmann::json j;
    auto num = [](double x) -> nlohmann::json {
        if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
        return x;
    };
    j["epsilon"] = epsilon;
    j["one_period"] = {{"status", to_string(one_period.status)},
                       {"alpha_star", num(one_period.alpha_star)},
                       {"weights", one_period.weights}};
    j["max_deviation"] = num(max_deviation);
    j["constant_strategy"] = {{"x_L", num(constant_strategy.x_L)}, {"x_U", num(constant_strategy.x_U)}};
    j["lp_solves"] = lp_solves;
    j["ok"] = ok();
    j["nodes"] = nlohmann::json::array();
    for (const auto& r : rows) {
        j["nodes"].push_back({{"node", r.node},
                              {"depth", r.depth},
                              {"wealth", r.wealth},
                              {"x_L", num(r.bracket.x_L)},
                              {"x_U", num(r.bracket.x_U)}});
    }
    return j.dump(2);
}

ConstancyReport verify_constant_acceptability(const TreeModel& tree, const VerifyOptions& opts) {
    if (!(opts.epsilon > 0.0)) throw std::invalid_argument("verify_constant_acceptability: epsilon must be positive");
    ConstancyReport rep;
    rep.epsilon = opts.epsilon;
    BisectionConfig cfg;
    cfg.epsilon = opts.epsilon;
    rep.one_period = one_period_max(tree.step_at(tree.root()), false, cfg);

    const auto spec = tvar_family();
    const int last = std::min(opts.depth_cap, tree.horizon() - 1);
    for (int t = 0; t <= last; ++t) {
        for (std::size_t k = 0; k < tree.nodes_at(t); ++k) {
            NodeId n = tree.node(t, k);
            for (double v : opts.wealths) {
                auto positive = [&](double x) {
                    double p = nested_min_risk(tree, n, v, spec.level_of(x), &rep.lp_solves);
                    return p / v > opts.sign_tolerance;
                };
                NodeIndexRow row;
                row.node = tree.address(n);
                row.depth = t;
                row.wealth = v;
                row.bracket = bisect_sign(positive, opts.epsilon);
                double dev = std::abs(row.bracket.mid() - rep.one_period.alpha_star);
                if (std::isnan(dev)) dev = kInf;
                rep.max_deviation = std::max(rep.max_deviation, dev);
                rep.rows.push_back(std::move(row));
            }
        }
    }

    if (!rep.one_period.weights.empty()) {
        Strategy st = build_constant_proportion_strategy(tree, rep.one_period.weights, 1.0);
        auto div = dividends_of(tree, wealth_of(tree, st, 1.0));
        rep.constant_strategy = dynamic_ait(tree, div, tree.root(), opts.epsilon);
    }
    return rep;
}

}  // namespace accmax
