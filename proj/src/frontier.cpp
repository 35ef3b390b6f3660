#include "accmax/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "accmax/dynrisk.hpp"
#include "accmax/lp.hpp"

namespace accmax {

namespace {

// a_r * risk + a_m * mean >= b
struct Halfspace {
    double a_r, a_m, b;
};

std::vector<Halfspace> halfspaces_of(const FrontierPolyline& f) {
    std::vector<Halfspace> hs;
    const auto& v = f.vertices;
    hs.push_back({1.0, 0.0, v.front().first});
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
        double s = (v[j + 1].second - v[j].second) / (v[j + 1].first - v[j].first);
        hs.push_back({s, -1.0, s * v[j].first - v[j].second});
    }
    if (f.ray) {
        auto [dr, dm] = *f.ray;
        if (dr > 0.0) {
            double s = dm / dr;
            hs.push_back({s, -1.0, s * v.back().first - v.back().second});
        }
    } else {
        hs.push_back({0.0, -1.0, -v.back().second});
    }
    return hs;
}

FrontierPolyline polyline_from(const BiObjectiveResult& res, const std::vector<std::size_t>& h_idx) {
    if (res.status != LpStatus::optimal)
        throw std::runtime_error(std::string("frontier: stage LP ended ") + to_string(res.status));
    FrontierPolyline f;
    for (const auto& v : res.vertices) {
        f.vertices.emplace_back(v.f2, -v.f1);
        std::vector<double> h;
        for (auto j : h_idx) h.push_back(v.point[j]);
        f.allocations.push_back(std::move(h));
    }
    if (res.ray) f.ray = std::make_pair(res.ray->second, -res.ray->first);
    return f;
}

struct StageLp {
    BiObjectiveLp blp;
    std::vector<std::size_t> h, w, zr, zm;
};

// One node with wealth W whose children continue inside w_i * F_next.
StageLp build_stage(const ScenarioModel& step, const FrontierPolyline& next, double q, bool shortselling, double W) {
    const std::size_t d = step.n_assets(), b = step.n_states();
    auto hs = halfspaces_of(next);
    StageLp st;
    auto& lp = st.blp.base;
    std::vector<Term> budget;
    for (std::size_t j = 0; j < d; ++j) {
        st.h.push_back(lp.add_variable(shortselling ? -kInf : 0.0, kInf, 0.0, "h" + std::to_string(j)));
        budget.push_back({st.h.back(), 1.0});
    }
    lp.add_row(budget, Relation::eq, W, "budget");
    std::size_t zeta = lp.add_free_variable(0.0, "zeta");
    std::vector<std::size_t> s(b);
    for (std::size_t i = 0; i < b; ++i) {
        auto si = std::to_string(i);
        st.w.push_back(lp.add_variable(0.0, kInf, 0.0, "w" + si));
        st.zr.push_back(lp.add_free_variable(0.0, "zr" + si));
        st.zm.push_back(lp.add_free_variable(0.0, "zm" + si));
        s[i] = lp.add_variable(0.0, kInf, 0.0, "s" + si);
        std::vector<Term> wr{{st.w[i], 1.0}};
        for (std::size_t j = 0; j < d; ++j) wr.push_back({st.h[j], -step.gross_return(j, i)});
        lp.add_row(wr, Relation::eq, 0.0, "wealth" + si);
        for (const auto& H : hs) {
            std::vector<Term> t{{st.w[i], -H.b}};
            if (H.a_r != 0.0) t.push_back({st.zr[i], H.a_r});
            if (H.a_m != 0.0) t.push_back({st.zm[i], H.a_m});
            lp.add_row(t, Relation::ge, 0.0);
        }
        lp.add_row({{s[i], 1.0}, {zeta, 1.0}, {st.w[i], 1.0}, {st.zr[i], -1.0}}, Relation::ge, W, "tail" + si);
    }
    const std::size_t n = lp.n_vars();
    st.blp.f1.assign(n, 0.0);
    st.blp.f2.assign(n, 0.0);
    st.blp.f1_offset = W;
    st.blp.f2[zeta] = 1.0;
    for (std::size_t i = 0; i < b; ++i) {
        double p = step.probability(i);
        st.blp.f1[st.zm[i]] = -p;
        st.blp.f1[st.w[i]] = -p;
        st.blp.f2[s[i]] = p / q;
    }
    return st;
}

void check_level(double q) {
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("frontier: tvar level must lie in (0, 1]");
}

}  // namespace

FrontierSequence meanrisk_frontiers(const TreeModel& tree, double q, bool shortselling, double wealth) {
    check_level(q);
    if (!tree.is_iid()) throw std::invalid_argument("meanrisk_frontiers: the tree must be iid");
    if (!(wealth > 0.0)) throw std::invalid_argument("meanrisk_frontiers: wealth must be positive");
    const int T = tree.horizon();
    FrontierSequence seq;
    seq.q = q;
    seq.shortselling = shortselling;
    seq.wealth = wealth;
    std::vector<FrontierPolyline> unit(T);
    FrontierPolyline terminal;
    terminal.vertices = {{0.0, 0.0}};
    for (int t = T - 1; t >= 0; --t) {
        const auto& next = t + 1 < T ? unit[t + 1] : terminal;
        auto st = build_stage(tree.step(), next, q, shortselling, 1.0);
        auto res = solve_biobjective(st.blp);
        seq.lp_solves += res.lp_solves;
        unit[t] = polyline_from(res, st.h);
    }
    if (wealth == 1.0) {
        seq.frontiers = std::move(unit);
        return seq;
    }
    seq.frontiers.resize(T);
    for (int t = 0; t < T; ++t) {
        const auto& next = t + 1 < T ? unit[t + 1] : terminal;
        auto st = build_stage(tree.step(), next, q, shortselling, wealth);
        auto res = solve_biobjective(st.blp);
        seq.lp_solves += res.lp_solves;
        seq.frontiers[t] = polyline_from(res, st.h);
    }
    return seq;
}

FrontierPolyline direct_frontier(const TreeModel& tree, double q, bool shortselling, double wealth) {
    check_level(q);
    if (tree.nonterminal_count() > 400) throw std::invalid_argument("direct_frontier: tree too large");
    const std::size_t d = tree.step().n_assets(), b = tree.branching();
    BiObjectiveLp blp;
    auto& lp = blp.base;
    std::vector<std::size_t> V(tree.node_count()), rho(tree.nonterminal_count());
    std::vector<std::vector<std::size_t>> h(tree.nonterminal_count());
    for (NodeId n = 0; n < tree.node_count(); ++n) V[n] = lp.add_variable(0.0, kInf, 0.0, "V" + std::to_string(n));
    lp.add_row({{V[0], 1.0}}, Relation::eq, wealth, "initial");
    for (NodeId n = 0; n < tree.nonterminal_count(); ++n) {
        std::vector<Term> budget{{V[n], -1.0}};
        for (std::size_t j = 0; j < d; ++j) {
            h[n].push_back(lp.add_variable(shortselling ? -kInf : 0.0, kInf));
            budget.push_back({h[n][j], 1.0});
        }
        lp.add_row(budget, Relation::eq, 0.0);
        rho[n] = lp.add_free_variable();
    }
    for (NodeId n = 0; n < tree.nonterminal_count(); ++n) {
        const auto& step = tree.step_at(n);
        std::size_t zeta = lp.add_free_variable();
        std::vector<Term> epi{{rho[n], 1.0}, {zeta, -1.0}};
        for (std::size_t i = 0; i < b; ++i) {
            NodeId c = tree.child(n, i);
            std::vector<Term> wr{{V[c], 1.0}};
            for (std::size_t j = 0; j < d; ++j) wr.push_back({h[n][j], -step.gross_return(j, i)});
            lp.add_row(wr, Relation::eq, 0.0);
            std::size_t s = lp.add_variable(0.0, kInf);
            epi.push_back({s, -step.probability(i) / q});
            std::vector<Term> tail{{s, 1.0}, {zeta, 1.0}, {V[c], 1.0}, {V[n], -1.0}};
            if (!tree.is_leaf(c)) tail.push_back({rho[c], -1.0});
            lp.add_row(tail, Relation::ge, 0.0);
        }
        lp.add_row(epi, Relation::ge, 0.0);
    }
    blp.f1.assign(lp.n_vars(), 0.0);
    blp.f2.assign(lp.n_vars(), 0.0);
    blp.f1_offset = wealth;
    blp.f2[rho[0]] = 1.0;
    for (NodeId l = tree.level_offset(tree.horizon()); l < tree.node_count(); ++l)
        blp.f1[V[l]] = -tree.path_probability(l);
    auto res = solve_biobjective(blp);
    return polyline_from(res, h[0]);
}

double vertex_hausdorff(const FrontierPolyline& a, const FrontierPolyline& b) {
    auto one_way = [](const FrontierPolyline& x, const FrontierPolyline& y) {
        double worst = 0.0;
        for (const auto& p : x.vertices) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& r : y.vertices) best = std::min(best, std::hypot(p.first - r.first, p.second - r.second));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_way(a, b), one_way(b, a));
}

double frontier_mean_at(const FrontierPolyline& f, double risk) {
    const auto& v = f.vertices;
    if (v.empty() || risk < v.front().first) return -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
        if (risk <= v[j + 1].first) {
            double t = (risk - v[j].first) / (v[j + 1].first - v[j].first);
            return v[j].second + t * (v[j + 1].second - v[j].second);
        }
    }
    if (f.ray) {
        auto [dr, dm] = *f.ray;
        if (dr <= 0.0) return std::numeric_limits<double>::infinity();
        return v.back().second + (risk - v.back().first) * dm / dr;
    }
    return v.back().second;
}

double frontier_risk_at(const FrontierPolyline& f, double mean) {
    const auto& v = f.vertices;
    if (v.empty()) return std::numeric_limits<double>::infinity();
    if (mean <= v.front().second) return v.front().first;
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
        if (mean <= v[j + 1].second) {
            double t = (mean - v[j].second) / (v[j + 1].second - v[j].second);
            return v[j].first + t * (v[j + 1].first - v[j].first);
        }
    }
    if (f.ray) {
        auto [dr, dm] = *f.ray;
        return v.back().first + (mean - v.back().second) * dr / dm;
    }
    if (mean <= v.back().second + 1e-9 * (1.0 + std::abs(v.back().second))) return v.back().first;
    return std::numeric_limits<double>::infinity();
}

double frontier_distance(const FrontierPolyline& f, double risk, double mean) {
    const auto& v = f.vertices;
    if (v.empty()) return std::numeric_limits<double>::infinity();
    auto seg = [&](const std::pair<double, double>& a, double dr, double dm, bool ray) {
        double len2 = dr * dr + dm * dm;
        double t = len2 > 0.0 ? ((risk - a.first) * dr + (mean - a.second) * dm) / len2 : 0.0;
        t = std::max(0.0, ray ? t : std::min(1.0, t));
        return std::hypot(risk - a.first - t * dr, mean - a.second - t * dm);
    };
    double best = std::hypot(risk - v[0].first, mean - v[0].second);
    for (std::size_t j = 0; j + 1 < v.size(); ++j)
        best = std::min(best, seg(v[j], v[j + 1].first - v[j].first, v[j + 1].second - v[j].second, false));
    if (f.ray) best = std::min(best, seg(v.back(), f.ray->first, f.ray->second, true));
    return best;
}

bool strictly_dominated(const FrontierPolyline& f, double risk, double mean, double margin) {
    // The distance test keeps round-off on nearly flat facets from counting.
    bool worse = frontier_mean_at(f, risk) - mean >= margin || risk - frontier_risk_at(f, mean) >= margin;
    return worse && frontier_distance(f, risk, mean) >= margin;
}

double profile_ratio(double risk, double mean) {
    double num = std::max(mean, 0.0), den = std::max(risk, 0.0);
    if (den == 0.0) return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return num / den;
}

ProfilePoint max_ratio_point(const FrontierPolyline& f) {
    ProfilePoint best;
    best.ratio = -1.0;
    for (const auto& [r, m] : f.vertices) {
        double ratio = (r == 0.0 && m == 0.0) ? 0.0 : profile_ratio(r, m);
        if (ratio > best.ratio) {
            best.risk = r;
            best.mean = m;
            best.ratio = ratio;
        }
    }
    if (f.ray && !f.vertices.empty()) {
        auto [dr, dm] = *f.ray;
        double slope = dr > 0.0 ? dm / dr : std::numeric_limits<double>::infinity();
        if (dm > 0.0 && slope > best.ratio) {
            const auto& [r, m] = f.vertices.back();
            double step = dr > 0.0 ? 1.0 / dr : 1.0;
            best.risk = r + step * dr;
            best.mean = m + step * dm;
            best.ratio = slope;
        }
    }
    return best;
}

namespace {

// Backward induction for the zero-wealth slope. With leaf payoff V - lam V^-,
// the value at a node is alpha V for V >= 0 and beta V for V <= 0, and lam is
// at least the slope exactly when no node admits a zero-cost position of
// positive value.
class ZeroWealthDp {
public:
    explicit ZeroWealthDp(const TreeModel& tree)
        : tree_(tree), alpha_(tree.node_count()), beta_(tree.node_count()) {}

    bool run(double lam) {
        const NodeId off = tree_.level_offset(tree_.horizon());
        for (NodeId s = off; s < tree_.node_count(); ++s) {
            alpha_[s] = 1.0;
            beta_[s] = 1.0 + lam;
        }
        const ScenarioModel* last_step = nullptr;
        std::vector<double> last_key, key;
        double last_a = 0.0, last_b = 0.0;
        for (NodeId s = off; s-- > 0;) {
            const auto& step = tree_.step_at(s);
            key.clear();
            for (std::size_t i = 0; i < tree_.branching(); ++i) {
                key.push_back(alpha_[tree_.child(s, i)]);
                key.push_back(beta_[tree_.child(s, i)]);
            }
            // Identical subtrees below an identical step give identical values.
            if (&step == last_step && key == last_key) {
                alpha_[s] = last_a;
                beta_[s] = last_b;
                continue;
            }
            auto up = node_lp(s, 1.0);
            auto down = node_lp(s, -1.0);
            if (!up.optimal() || !down.optimal()) {
                if (up.status == LpStatus::unbounded || down.status == LpStatus::unbounded) return false;
                throw std::runtime_error(std::string("dglr node LP ended ") +
                                         to_string(up.optimal() ? down.status : up.status));
            }
            alpha_[s] = -up.value;
            beta_[s] = down.value;
            last_step = &step;
            last_key = key;
            last_a = alpha_[s];
            last_b = beta_[s];
        }
        return true;
    }

    // max over u of sum_i q_i min(alpha_c w_i, beta_c w_i) with
    // w_i = sigma r0_i + sum_j (R_ji - r0_i) u_j; optionally u_fix = fix_val.
    LpSolution node_lp(NodeId s, double sigma, std::size_t fix = kNone, double fix_val = 0.0) {
        const auto& step = tree_.step_at(s);
        const std::size_t d = step.n_assets(), b = tree_.branching();
        LinearProgram lp;
        for (std::size_t j = 1; j < d; ++j) {
            bool fixed = fix == j - 1;
            lp.add_variable(fixed ? fix_val : -kInf, fixed ? fix_val : kInf);
        }
        for (std::size_t i = 0; i < b; ++i) lp.add_free_variable(-step.probability(i));
        for (std::size_t i = 0; i < b; ++i) {
            NodeId c = tree_.child(s, i);
            double r0 = step.gross_return(0, i);
            for (double slope : {alpha_[c], beta_[c]}) {
                std::vector<Term> t{{d - 1 + i, 1.0}};
                for (std::size_t j = 1; j < d; ++j) t.push_back({j - 1, -slope * (step.gross_return(j, i) - r0)});
                lp.add_row(std::move(t), Relation::le, slope * sigma * r0);
                if (alpha_[c] == beta_[c]) break;
            }
        }
        auto sol = solve_lp(lp);
        ++solves;
        iterations += sol.iterations;
        return sol;
    }

    double alpha(NodeId s) const { return alpha_[s]; }
    double beta(NodeId s) const { return beta_[s]; }

    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::size_t solves = 0;
    std::size_t iterations = 0;

private:
    const TreeModel& tree_;
    std::vector<double> alpha_, beta_;
};

// Zero-cost strategy attaining the slope found by `dp`: it opens a position
// at the first node whose zero-wealth problem has a nontrivial maximiser and
// then follows the per-sign maximisers scaled by wealth.
Strategy zero_wealth_strategy(const TreeModel& tree, ZeroWealthDp& dp) {
    const std::size_t d = tree.step().n_assets(), b = tree.branching();
    Strategy st(tree.nonterminal_count());
    std::vector<double> V(tree.node_count(), 0.0);
    bool opened = false;
    for (NodeId s = 0; s < tree.nonterminal_count(); ++s) {
        const auto& step = tree.step_at(s);
        std::vector<double> u(d - 1, 0.0);
        if (V[s] != 0.0) {
            auto sol = dp.node_lp(s, V[s] > 0.0 ? 1.0 : -1.0);
            if (!sol.optimal()) throw std::runtime_error(std::string("dglr node LP ended ") + to_string(sol.status));
            for (std::size_t j = 0; j + 1 < d; ++j) u[j] = std::abs(V[s]) * sol.point[j];
        } else if (!opened) {
            double best = -kInf, scale = 0.0;
            std::vector<double> dir;
            for (std::size_t j = 0; j + 1 < d; ++j) {
                for (double sign : {1.0, -1.0}) {
                    auto sol = dp.node_lp(s, 0.0, j, sign);
                    if (!sol.optimal() || -sol.value <= best) continue;
                    best = -sol.value;
                    dir.assign(sol.point.begin(), sol.point.begin() + static_cast<std::ptrdiff_t>(d - 1));
                }
            }
            if (!dir.empty()) {
                for (std::size_t i = 0; i < b; ++i) {
                    double w = 0.0;
                    for (std::size_t j = 1; j < d; ++j)
                        w += (step.gross_return(j, i) - step.gross_return(0, i)) * dir[j - 1];
                    scale += step.probability(i) * dp.beta(tree.child(s, i)) * std::abs(w);
                }
                if (best >= -1e-9 * scale) {
                    u = dir;
                    opened = true;
                }
            }
        }
        std::vector<double> h(d);
        h[0] = V[s];
        for (std::size_t j = 1; j < d; ++j) {
            h[j] = u[j - 1];
            h[0] -= h[j];
        }
        for (std::size_t i = 0; i < b; ++i) {
            double r0 = step.gross_return(0, i);
            double v = r0 * V[s];
            for (std::size_t j = 1; j < d; ++j) v += (step.gross_return(j, i) - r0) * u[j - 1];
            V[tree.child(s, i)] = v;
        }
        st.allocations[s] = std::move(h);
    }
    return st;
}

DglrResult zero_wealth_dglr(const TreeModel& tree) {
    ZeroWealthDp dp(tree);
    DglrResult out;
    out.frontier.vertices = {{0.0, 0.0}};
    out.frontier.allocations = {std::vector<double>(tree.step().n_assets(), 0.0)};
    auto finish = [&] {
        out.lp_solves = dp.solves;
        out.lp_iterations = dp.iterations;
        return out;
    };
    if (dp.run(0.0)) {
        // No zero-cost position has positive mean.
        out.optimal = Strategy(tree.nonterminal_count());
        for (auto& h : out.optimal.allocations) h.assign(tree.step().n_assets(), 0.0);
        return finish();
    }
    double lo = 0.0, hi = 1.0;
    while (!dp.run(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) {
            out.frontier.ray = std::make_pair(0.0, 1.0);
            out.max_ratio = std::numeric_limits<double>::infinity();
            out.optimal = Strategy(tree.nonterminal_count());
            return finish();
        }
    }
    for (int k = 0; k < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++k) {
        double mid = 0.5 * (lo + hi);
        if (dp.run(mid)) hi = mid;
        else lo = mid;
    }
    dp.run(hi);
    out.optimal = zero_wealth_strategy(tree, dp);
    auto w = wealth_from(tree, out.optimal, tree.root(), 0.0);
    const NodeId off = tree.level_offset(tree.horizon());
    double mean = 0.0, loss = 0.0;
    for (NodeId k = off; k < tree.node_count(); ++k) {
        double p = tree.path_probability(k);
        mean += p * w.values[k];
        loss += p * std::max(0.0, -w.values[k]);
    }
    if (!(loss > 0.0) || !(mean > 0.0))
        throw std::runtime_error("dglr: no zero-cost strategy attains the slope");
    out.max_ratio = mean / loss;
    out.frontier.ray = std::make_pair(1.0, out.max_ratio);
    return finish();
}

}  // namespace

DglrResult meanloss_frontier_dglr(const TreeModel& tree, double v0, bool shortselling) {
    if (v0 < 0.0) throw std::invalid_argument("meanloss_frontier_dglr: negative initial wealth");
    if (v0 == 0.0 && !shortselling)
        throw std::invalid_argument("meanloss_frontier_dglr: zero initial wealth needs shortselling");
    if (v0 == 0.0) return zero_wealth_dglr(tree);
    const std::size_t d = tree.step().n_assets(), b = tree.branching();
    const std::size_t leaves = tree.nodes_at(tree.horizon());
    const std::size_t cols = tree.nonterminal_count() * (d - 1) + leaves;
    const double tableau_bytes = 8.0 * static_cast<double>(leaves + 1) * static_cast<double>(cols + leaves);
    if (tableau_bytes > 1.5e9)
        throw std::invalid_argument("meanloss_frontier_dglr: LP too large for horizon " +
                                    std::to_string(tree.horizon()) + " (dense tableau would need " +
                                    std::to_string(static_cast<long long>(tableau_bytes / 1e6)) + " MB)");

    // V_s is affine in the free holdings u of assets 1..d-1; asset 0 takes the rest.
    struct Affine {
        double c = 0.0;
        std::vector<Term> t;
    };
    LinearProgram lp;
    std::vector<std::vector<std::size_t>> u(tree.nonterminal_count());
    std::vector<Affine> V(tree.node_count());
    V[0].c = v0;
    for (NodeId s = 0; s < tree.nonterminal_count(); ++s) {
        for (std::size_t j = 1; j < d; ++j) u[s].push_back(lp.add_variable(shortselling ? -kInf : 0.0, kInf));
        if (!shortselling) {
            std::vector<Term> t = V[s].t;
            for (auto k : u[s]) t.push_back({k, -1.0});
            lp.add_row(t, Relation::ge, -V[s].c);
        }
        const auto& step = tree.step_at(s);
        for (std::size_t i = 0; i < b; ++i) {
            double r0 = step.gross_return(0, i);
            Affine a;
            a.c = r0 * V[s].c;
            for (const auto& x : V[s].t) a.t.push_back({x.index, r0 * x.coef});
            for (std::size_t j = 1; j < d; ++j) a.t.push_back({u[s][j - 1], step.gross_return(j, i) - r0});
            V[tree.child(s, i)] = std::move(a);
        }
    }
    std::vector<std::size_t> m(leaves);
    const NodeId off = tree.level_offset(tree.horizon());
    for (std::size_t k = 0; k < leaves; ++k) {
        m[k] = lp.add_variable(0.0, kInf);
        auto t = V[off + k].t;
        t.push_back({m[k], 1.0});
        lp.add_row(t, Relation::ge, v0 - V[off + k].c);
    }
    // -E[V_T - v0] as a linear form plus constant.
    std::vector<double> f1(lp.n_vars(), 0.0), f2(lp.n_vars(), 0.0);
    double f1_offset = v0;
    for (std::size_t k = 0; k < leaves; ++k) {
        double p = tree.path_probability(off + k);
        for (const auto& x : V[off + k].t) f1[x.index] -= p * x.coef;
        f1_offset -= p * V[off + k].c;
        f2[m[k]] = p;
    }

    DglrResult out;
    auto to_strategy = [&](const std::vector<double>& x) {
        Strategy st(tree.nonterminal_count());
        for (NodeId s = 0; s < tree.nonterminal_count(); ++s) {
            double vs = V[s].c;
            for (const auto& t : V[s].t) vs += t.coef * x[t.index];
            std::vector<double> h(d);
            h[0] = vs;
            for (std::size_t j = 1; j < d; ++j) {
                h[j] = x[u[s][j - 1]];
                h[0] -= h[j];
            }
            st.allocations[s] = std::move(h);
        }
        return st;
    };

    BiObjectiveLp blp;
    blp.base = lp;
    blp.f1 = f1;
    blp.f2 = f2;
    blp.f1_offset = f1_offset;
    auto res = solve_biobjective(blp);
    out.lp_solves = res.lp_solves;
    if (res.status != LpStatus::optimal)
        throw std::runtime_error(std::string("dglr frontier ended ") + to_string(res.status));
    for (const auto& v : res.vertices) {
        out.frontier.vertices.emplace_back(v.f2, -v.f1);
        out.frontier.allocations.push_back(to_strategy(v.point).allocations[0]);
    }
    if (res.ray) out.frontier.ray = std::make_pair(res.ray->second, -res.ray->first);
    auto best = max_ratio_point(out.frontier);
    out.max_ratio = best.ratio;
    for (std::size_t k = 0; k < res.vertices.size(); ++k) {
        if (out.frontier.vertices[k].first == best.risk && out.frontier.vertices[k].second == best.mean)
            out.optimal = to_strategy(res.vertices[k].point);
    }
    if (out.optimal.allocations.empty() || out.optimal.allocations[0].empty())
        out.optimal = to_strategy(res.vertices.back().point);
    return out;
}

const char* to_string(Policy p) {
    switch (p) {
        case Policy::consistent: return "consistent";
        case Policy::switching: return "switching";
        case Policy::myopic: return "myopic";
    }
    return "?";
}

namespace {

// Normalised risk and mean of V_T - V_t below `start` under `strat`.
std::pair<double, double> profile_of(const TreeModel& tree, const Strategy& strat, NodeId start, double v,
                                     double q) {
    WealthProcess w = wealth_from(tree, strat, start, v);
    DividendStream div;
    div.values.assign(tree.node_count(), 0.0);
    for (NodeId n = start + 1; n < tree.node_count(); ++n) {
        if (!std::isnan(w.values[n])) div.values[n] = w.values[n] - w.values[tree.parent(n)];
    }
    OneStepRisk one{OneStepKind::tvar, q};
    double risk = recursive_risk(tree, div, one).values[start];
    double mean = conditional_tail_mean(tree, div).values[start];
    return {risk / v, mean / v};
}

// Depth s of the subtree below `start` uses proportions props[s].
std::vector<double> normalized(std::vector<double> h) {
    double s = 0.0;
    for (double x : h) s += x;
    for (auto& x : h) x /= s;
    return h;
}

Strategy proportional(const TreeModel& tree, NodeId start, const std::vector<std::vector<double>>& props) {
    Strategy st(tree.nonterminal_count());
    std::vector<double> wealth(tree.node_count(), 0.0);
    wealth[start] = 1.0;
    std::vector<NodeId> level{start};
    while (!level.empty() && !tree.is_leaf(level.front())) {
        std::vector<NodeId> next;
        for (NodeId n : level) {
            auto h = normalized(props[tree.depth(n)]);
            for (auto& x : h) x *= wealth[n];
            const auto& step = tree.step_at(n);
            for (std::size_t i = 0; i < tree.branching(); ++i) {
                double v = 0.0;
                for (std::size_t j = 0; j < h.size(); ++j) v += h[j] * step.gross_return(j, i);
                wealth[tree.child(n, i)] = v;
                next.push_back(tree.child(n, i));
            }
            st.allocations[n] = std::move(h);
        }
        level = std::move(next);
    }
    return st;
}

std::vector<double> max_ratio_allocation(const FrontierPolyline& f) {
    auto best = max_ratio_point(f);
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f.vertices[k].first == best.risk && f.vertices[k].second == best.mean) return normalized(f.allocations[k]);
    }
    return normalized(f.allocations.back());
}

struct Decision {
    std::vector<double> h;           // unit-wealth allocation
    std::vector<double> child_mean;  // planned normalised mean per branch
};

// Least risk at unit wealth subject to mean >= target, largest mean among those.
Decision plan_step(const ScenarioModel& step, const FrontierPolyline& next, double q, bool shortselling,
                   double target) {
    auto st = build_stage(step, next, q, shortselling, 1.0);
    std::vector<Term> r;
    for (std::size_t j = 0; j < st.blp.f1.size(); ++j) {
        if (st.blp.f1[j] != 0.0) r.push_back({j, st.blp.f1[j]});
    }
    st.blp.base.add_row(r, Relation::le, -target - st.blp.f1_offset + 1e-10 * std::max(1.0, std::abs(target)),
                        "target_mean");
    auto sol = solve_lexicographic(st.blp.base, st.blp.f2, st.blp.f1);
    if (!sol.optimal()) throw std::runtime_error("simulate_policies: continuation LP failed");
    Decision d;
    for (auto j : st.h) d.h.push_back(sol.point[j]);
    d.h = normalized(std::move(d.h));
    for (std::size_t i = 0; i < step.n_states(); ++i) d.child_mean.push_back(sol.point[st.zm[i]] / sol.point[st.w[i]]);
    return d;
}

}  // namespace

Strategy consistent_strategy(const TreeModel& tree, const FrontierSequence& seq, double target_mean) {
    const int T = tree.horizon();
    FrontierPolyline terminal;
    terminal.vertices = {{0.0, 0.0}};
    Strategy st(tree.nonterminal_count());
    std::vector<double> wealth(tree.node_count(), 0.0), target(tree.node_count(), 0.0);
    wealth[0] = 1.0;
    target[0] = target_mean;
    for (NodeId n = 0; n < tree.nonterminal_count(); ++n) {
        int t = tree.depth(n);
        const auto& next = t + 1 < T ? seq.frontiers[t + 1] : terminal;
        auto d = plan_step(tree.step_at(n), next, seq.q, seq.shortselling, target[n]);
        auto h = d.h;
        for (auto& x : h) x *= wealth[n];
        const auto& step = tree.step_at(n);
        for (std::size_t i = 0; i < tree.branching(); ++i) {
            NodeId c = tree.child(n, i);
            double v = 0.0;
            for (std::size_t j = 0; j < h.size(); ++j) v += h[j] * step.gross_return(j, i);
            wealth[c] = v;
            target[c] = d.child_mean[i];
        }
        st.allocations[n] = std::move(h);
    }
    return st;
}

std::vector<PolicyProfile> simulate_policies(const TreeModel& tree, const FrontierSequence& seq,
                                             std::vector<std::size_t> path, double margin) {
    const int T = tree.horizon();
    if (static_cast<int>(seq.frontiers.size()) != T) throw std::invalid_argument("simulate_policies: wrong horizon");
    if (seq.wealth != 1.0) throw std::invalid_argument("simulate_policies: frontiers must be for unit wealth");
    if (path.empty()) path.assign(T > 0 ? T - 1 : 0, 0);
    if (static_cast<int>(path.size()) != T - 1) throw std::invalid_argument("simulate_policies: path length must be T-1");
    for (auto i : path) {
        if (i >= tree.branching()) throw std::invalid_argument("simulate_policies: branch index out of range");
    }
    std::vector<NodeId> nodes{tree.root()};
    for (auto i : path) nodes.push_back(tree.child(nodes.back(), i));

    auto point = [&](int t, std::pair<double, double> rm) {
        return ProfilePoint{t, tree.address(nodes[t]), rm.first, rm.second, profile_ratio(rm.first, rm.second)};
    };
    std::vector<PolicyProfile> out;

    // Time-0 max-ratio plan carried out node by node.
    {
        PolicyProfile pp{Policy::consistent, {}, {}};
        Strategy st = consistent_strategy(tree, seq, max_ratio_point(seq.frontiers[0]).mean);
        WealthProcess w = wealth_of(tree, st, 1.0);
        for (int t = 0; t < T; ++t) pp.points.push_back(point(t, profile_of(tree, st, nodes[t], w.values[nodes[t]], seq.q)));
        out.push_back(std::move(pp));
    }

    // Re-optimise at every date; only the first step of each plan is used.
    {
        PolicyProfile pp{Policy::switching, {}, {}};
        std::vector<std::vector<double>> props(T);
        for (int t = 0; t < T; ++t) props[t] = max_ratio_allocation(seq.frontiers[t]);
        for (int t = 0; t < T; ++t)
            pp.points.push_back(point(t, profile_of(tree, proportional(tree, nodes[t], props), nodes[t], 1.0, seq.q)));
        out.push_back(std::move(pp));
    }

    // The one-period ratio optimum, which is the max-ratio point of F_{T-1}.
    {
        PolicyProfile pp{Policy::myopic, {}, {}};
        std::vector<std::vector<double>> props(T, max_ratio_allocation(seq.frontiers[T - 1]));
        for (int t = 0; t < T; ++t)
            pp.points.push_back(point(t, profile_of(tree, proportional(tree, nodes[t], props), nodes[t], 1.0, seq.q)));
        out.push_back(std::move(pp));
    }

    for (auto& pp : out) {
        for (const auto& p : pp.points)
            pp.dominated.push_back(strictly_dominated(seq.frontiers[p.t], p.risk, p.mean, margin));
    }
    return out;
}

ScalarizationWeight moving_scalarization(const FrontierPolyline& f, double risk, double mean, double tol) {
    const auto& v = f.vertices;
    if (v.empty()) throw std::invalid_argument("moving_scalarization: empty frontier");
    if (!(risk > 0.0)) throw std::invalid_argument("moving_scalarization: risk must be positive");
    double on = frontier_mean_at(f, risk);
    if (!(std::abs(on - mean) <= tol * std::max(1.0, std::abs(mean))))
        throw std::invalid_argument("moving_scalarization: point is not on the frontier");
    std::vector<double> slopes;
    for (std::size_t j = 0; j + 1 < v.size(); ++j)
        slopes.push_back((v[j + 1].second - v[j].second) / (v[j + 1].first - v[j].first));
    if (f.ray && f.ray->first > 0.0) slopes.push_back(f.ray->second / f.ray->first);
    if (slopes.empty()) throw std::invalid_argument("moving_scalarization: frontier has no facet");

    auto lam = [&](double s) { return mean / (s * risk); };
    auto near = [&](double a, double b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); };
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!near(risk, v[k].first)) continue;
        // Facets adjacent to vertex k: k-1 on the left, k on the right.
        bool has_left = k > 0, has_right = k < slopes.size();
        if (has_left && has_right) {
            double a = lam(slopes[k - 1]), b = lam(slopes[k]);
            return {0.5 * (a + b), std::min(a, b), std::max(a, b)};
        }
        double s = has_left ? slopes[k - 1] : slopes[k];
        return {lam(s), lam(s), lam(s)};
    }
    for (std::size_t j = 0; j < slopes.size(); ++j) {
        double hi = j + 1 < v.size() ? v[j + 1].first : std::numeric_limits<double>::infinity();
        if (risk > v[j].first && risk < hi) return {lam(slopes[j]), lam(slopes[j]), lam(slopes[j])};
    }
    throw std::invalid_argument("moving_scalarization: point is left of the frontier");
}

void write_frontiers_csv(const FrontierSequence& seq, std::ostream& out) {
    out << "t,vertex,risk,mean,ratio,max_ratio\n";
    out.precision(17);
    for (std::size_t t = 0; t < seq.frontiers.size(); ++t) {
        const auto& f = seq.frontiers[t];
        auto best = max_ratio_point(f);
        for (std::size_t k = 0; k < f.size(); ++k) {
            const auto& [r, m] = f.vertices[k];
            bool is_best = r == best.risk && m == best.mean;
            out << t << ',' << k << ',' << r << ',' << m << ',' << profile_ratio(r, m) << ',' << (is_best ? 1 : 0)
                << '\n';
        }
        if (f.ray) out << t << ",ray," << f.ray->first << ',' << f.ray->second << ",,\n";
    }
}

}  // namespace accmax
