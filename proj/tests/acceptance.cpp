// Acceptance checks; prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "accmax/acceptability.hpp"
#include "accmax/bisect.hpp"
#include "accmax/dynrisk.hpp"
#include "accmax/frontier.hpp"
#include "accmax/recursive.hpp"
#include "accmax/risk.hpp"

using namespace accmax;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string str(double x, int prec = 6) {
    std::ostringstream s;
    s.precision(prec);
    s << x;
    return s.str();
}

Outcome criterion1() {
    Outcome o;
    auto t0 = Clock::now();
    struct Row {
        IndexKind k;
        double lo, hi, w1, w2;
    };
    const Row rows[] = {{IndexKind::ait, 0.76522, 0.76548, 0.5517, 0.4483},
                        {IndexKind::glr, 3.14272, 3.14298, 0.7333, 0.2667},
                        {IndexKind::raroc, 0.82131, 0.82157, 0.9375, 0.0625}};
    std::string summary;
    for (const auto& r : rows) {
        BisectionConfig cfg;
        auto tr = maximize(family_for(r.k), toy_market(), false, cfg);
        std::string name = to_string(r.k);
        o.require(tr.status == BisectStatus::bracketed, name + " not bracketed");
        o.require(tr.x_L >= r.lo && tr.x_U <= r.hi,
                  name + " interval [" + str(tr.x_L) + ", " + str(tr.x_U) + "] outside golden");
        if (!tr.epsilon_solution) {
            o.require(false, name + " has no epsilon-solution");
            continue;
        }
        const auto& h = *tr.epsilon_solution;
        o.require(std::abs(h[0] - r.w1) <= 0.005 && std::abs(h[1] - r.w2) <= 0.005, name + " weights off");
        summary += name + " [" + str(tr.x_L) + ", " + str(tr.x_U) + "] ";
    }
    double t = seconds_since(t0);
    o.require(t < 5.0, "runtime " + str(t) + " s");
    if (o.pass) o.detail = summary + "in " + str(t, 3) + " s";
    return o;
}

Outcome criterion2() {
    Outcome o;
    auto m = toy_market();
    std::vector<double> g{11.0 / 15.0, 4.0 / 15.0}, r{15.0 / 16.0, 1.0 / 16.0};
    double glr = eval_glr(m, pnl_of_weights(m, g, false)).value;
    double raroc = eval_raroc(m, pnl_of_weights(m, r, false), 0.01).value;
    o.require(std::abs(glr - 22.0 / 7.0) <= 1e-12, "glr " + str(glr, 17));
    o.require(std::abs(raroc - 0.805 / 0.98) <= 1e-12, "raroc " + str(raroc, 17));
    if (o.pass) o.detail = "glr " + str(glr, 15) + ", raroc " + str(raroc, 15);
    return o;
}

Outcome criterion3() {
    Outcome o;
    const double target = 22.0 / 7.0;
    for (auto v : {Variant::original, Variant::modified, Variant::mixed, Variant::zero_level}) {
        BisectionConfig cfg;
        cfg.variant = v;
        auto tr = maximize(glr_family(), toy_market(), false, cfg);
        std::string name = to_string(v);
        o.require(tr.status == BisectStatus::bracketed, name + " not bracketed");
        o.require(tr.x_U - tr.x_L < 1e-4, name + " width " + str(tr.x_U - tr.x_L));
        o.require(tr.x_L <= target && target <= tr.x_U, name + " misses 22/7");
        if (v == Variant::zero_level) {
            // Lower bound after the first Step 1 probe: the zero-risk level of its minimiser.
            double first = tr.step1_rows.empty() ? kInf : tr.step1_rows.front().zero_level;
            o.require(std::abs(first - 3.1429) <= 1e-3, "zero-level first lower bound " + str(first));
            o.detail = "zero-level first x_L " + str(first);
        }
    }
    return o;
}

Outcome criterion4() {
    Outcome o;
    int max_seen = 0;
    auto bound_ok = [&](const BisectionTrace& tr, const BisectionConfig& cfg, const std::string& what) {
        int n = static_cast<int>(tr.step2_rows.size());
        max_seen = std::max(max_seen, n);
        o.require(n <= predict_step2_bound(cfg), what + ": " + std::to_string(n) + " Step 2 rows exceed bound " +
                                                     std::to_string(predict_step2_bound(cfg)));
    };
    // Toy problems over a grid of starting points and tolerances.
    for (double x0 : {std::ldexp(1.0, -6), 0.5, 2.0, 16.0, std::ldexp(1.0, 8)})
        for (double eps : {1e-2, 1e-4, 1e-6})
            for (auto k : {IndexKind::ait, IndexKind::glr, IndexKind::raroc}) {
                BisectionConfig cfg;
                cfg.x0 = x0;
                cfg.epsilon = eps;
                bound_ok(maximize(family_for(k), toy_market(), false, cfg), cfg, "toy " + std::string(to_string(k)));
            }

    // Student t market: 10 assets, 1000 states, AIT without short positions.
    StudentTParams p;
    p.scale.assign(100, 0.0);
    for (int j = 0; j < 10; ++j) p.scale[j * 11] = 5e-6;
    auto market = generate_student_t(p);
    struct Case {
        double x0;
        int M;
        BisectStatus expect;
    };
    const Case cases[] = {{std::ldexp(1.0, 20), 15, BisectStatus::below_lower_range},
                          {std::ldexp(1.0, -10), 15, BisectStatus::above_upper_range},
                          {std::ldexp(1.0, 20), 30, BisectStatus::bracketed},
                          {std::ldexp(1.0, -10), 30, BisectStatus::bracketed},
                          {2.0, 15, BisectStatus::bracketed}};
    double alpha = 0.0;
    for (const auto& c : cases) {
        BisectionConfig cfg;
        cfg.x0 = c.x0;
        cfg.max_iterations = c.M;
        auto tr = maximize(tvar_family(), market, false, cfg);
        std::string what = "x0=2^" + std::to_string(static_cast<int>(std::log2(c.x0))) + " M=" + std::to_string(c.M);
        o.require(tr.status == c.expect, what + " gave " + to_string(tr.status));
        if (c.expect != BisectStatus::bracketed) o.require(tr.step2_rows.empty(), what + " ran Step 2");
        bound_ok(tr, cfg, what);
        if (tr.status == BisectStatus::bracketed) alpha = 0.5 * (tr.x_L + tr.x_U);
    }
    if (o.pass) o.detail = "student-t alpha* " + str(alpha) + ", max Step 2 rows " + std::to_string(max_seen);
    return o;
}

Outcome criterion5() {
    Outcome o;
    std::mt19937_64 rng(20240501);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.005, 0.04);
    const std::size_t n = 16;
    double worst_ru = 0.0, worst_foc = 0.0, worst_mono = 0.0, worst_axiom = 0.0;
    const RiskFamilySpec fams[] = {tvar_family(), glr_family(), raroc_family(0.01), {FamilyKind::evar, 0.01}};
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> p(n);
        for (double& x : p) x = 0.05 + u(rng);
        double s = std::accumulate(p.begin(), p.end(), 0.0);
        for (double& x : p) x /= s;
        p.back() = 1.0 - std::accumulate(p.begin(), p.end() - 1, 0.0);
        ScenarioModel m(p, {std::vector<double>(n, 1.0)});
        PnlVector a, b;
        for (std::size_t w = 0; w < n; ++w) {
            a.values.push_back(z(rng));
            b.values.push_back(z(rng));
        }
        const double q = 0.01 + 0.98 * u(rng);
        const double c = u(rng) - 0.5, lam = 0.1 + 3.0 * u(rng);
        const double ra = tvar(m, a, q), rb = tvar(m, b, q);

        // Coherence axioms.
        PnlVector shifted = a, scaled = a, sum = a, up = a;
        for (std::size_t w = 0; w < n; ++w) {
            shifted.values[w] += c;
            scaled.values[w] *= lam;
            sum.values[w] += b[w];
            up.values[w] += 0.05 * u(rng);
        }
        worst_axiom = std::max(worst_axiom, std::abs(tvar(m, shifted, q) - (ra - c)));
        worst_axiom = std::max(worst_axiom, std::abs(tvar(m, scaled, q) - lam * ra));
        worst_axiom = std::max(worst_axiom, tvar(m, sum, q) - (ra + rb));
        worst_axiom = std::max(worst_axiom, tvar(m, up, q) - ra);

        // Rockafellar-Uryasev LP against the sorted tail average.
        std::vector<std::pair<double, double>> sorted;
        for (std::size_t w = 0; w < n; ++w) sorted.push_back({a[w], p[w]});
        std::sort(sorted.begin(), sorted.end());
        double left = q, acc = 0.0;
        for (auto [x, pw] : sorted) {
            double take = std::min(pw, left);
            acc += take * x;
            left -= take;
            if (left <= 0.0) break;
        }
        worst_ru = std::max(worst_ru, std::abs(tvar_by_lp(m, a, q) - (-acc / q)));

        // Expectile first-order condition.
        const double qe = 0.01 + 0.98 * u(rng);
        double e = expectile(m, a, qe), pos = 0.0, neg = 0.0;
        for (std::size_t w = 0; w < n; ++w) {
            pos += p[w] * std::max(a[w] - e, 0.0);
            neg += p[w] * std::max(e - a[w], 0.0);
        }
        worst_foc = std::max(worst_foc, std::abs(qe * pos - (1.0 - qe) * neg));

        // Families increase in x.
        double x1 = 0.01 + 40.0 * u(rng), x2 = 0.01 + 40.0 * u(rng);
        if (x1 > x2) std::swap(x1, x2);
        for (const auto& f : fams)
            worst_mono = std::max(worst_mono, family_risk(f, m, a, x1) - family_risk(f, m, a, x2));
    }
    o.require(worst_axiom <= 1e-12, "axiom violation " + str(worst_axiom));
    o.require(worst_ru <= 1e-8, "RU gap " + str(worst_ru));
    o.require(worst_foc <= 1e-12, "expectile residual " + str(worst_foc));
    o.require(worst_mono <= 1e-12, "monotonicity violation " + str(worst_mono));
    if (o.pass)
        o.detail = "RU gap " + str(worst_ru, 3) + ", FOC " + str(worst_foc, 3) + ", axioms " + str(worst_axiom, 3);
    return o;
}

Outcome criterion6() {
    Outcome o;
    const double eps = 1e-3;
    auto ref = one_period_max(toy_market(), false);
    o.require(std::abs(ref.alpha_star - 0.7653) < 2e-3, "static optimum " + str(ref.alpha_star));
    for (int T : {2, 3}) {
        TreeModel tree(T, toy_market());
        VerifyOptions opts;
        opts.epsilon = eps;
        auto t0 = Clock::now();
        auto rep = verify_constant_acceptability(tree, opts);
        double t = seconds_since(t0);
        double lo = kInf, hi = -kInf, root = ref.alpha_star;
        for (const auto& r : rep.rows) {
            double m = r.bracket.mid();
            lo = std::min(lo, m);
            hi = std::max(hi, m);
            o.require(std::abs(m - ref.alpha_star) <= 2e-3, "T=" + std::to_string(T) + " node '" + r.node + "' at " + str(m));
            if (r.depth == 0 && r.wealth == 1.0) root = m;
        }
        o.require(hi - lo < 2.0 * eps, "T=" + std::to_string(T) + " spread " + str(hi - lo));
        o.require(rep.constant_strategy.x_U >= root - 2.0 * eps,
                  "T=" + std::to_string(T) + " constant strategy " + str(rep.constant_strategy.x_U));
        if (T == 3) {
            o.require(t < 60.0, "T=3 runtime " + str(t) + " s");
            if (o.pass)
                o.detail = "T=3 spread " + str(hi - lo, 3) + ", " + std::to_string(rep.rows.size()) + " node brackets in " +
                           str(t, 3) + " s";
        }
    }
    return o;
}

Outcome criterion7() {
    Outcome o;
    double worst = 0.0;
    for (int T : {2, 3}) {
        TreeModel tree(T, toy_market());
        for (bool ss : {false, true}) {
            auto seq = meanrisk_frontiers(tree, 0.01, ss);
            auto direct = direct_frontier(tree, 0.01, ss);
            double h = vertex_hausdorff(seq.frontiers[0], direct);
            worst = std::max(worst, h);
            o.require(h < 1e-6, "T=" + std::to_string(T) + (ss ? " short" : "") + " distance " + str(h));
        }
    }
    if (o.pass) o.detail = "max Hausdorff " + str(worst, 3);
    return o;
}

Outcome criterion8() {
    Outcome o;
    TreeModel tree(6, toy_market());
    auto t0 = Clock::now();
    auto r = meanloss_frontier_dglr(tree, 0.0);
    double t = seconds_since(t0);
    o.require(r.frontier.ray.has_value(), "frontier has no ray");
    o.require(std::abs(r.max_ratio - 0.27) <= 0.005, "slope " + str(r.max_ratio));
    o.require(t < 120.0, "runtime " + str(t) + " s");
    if (o.pass) o.detail = "slope " + str(r.max_ratio) + " in " + str(t, 3) + " s";
    return o;
}

// Euclidean distance from (r, m) to the frontier polyline and its ray.
double distance_to(const FrontierPolyline& f, double r, double m) {
    auto seg = [&](double r0, double m0, double dr, double dm, bool ray) {
        double len2 = dr * dr + dm * dm;
        double t = len2 > 0.0 ? ((r - r0) * dr + (m - m0) * dm) / len2 : 0.0;
        t = std::max(0.0, ray ? t : std::min(1.0, t));
        return std::hypot(r - r0 - t * dr, m - m0 - t * dm);
    };
    const auto& v = f.vertices;
    double best = std::hypot(r - v[0].first, m - v[0].second);
    for (std::size_t k = 0; k + 1 < v.size(); ++k)
        best = std::min(best, seg(v[k].first, v[k].second, v[k + 1].first - v[k].first,
                                  v[k + 1].second - v[k].second, false));
    if (f.ray) best = std::min(best, seg(v.back().first, v.back().second, f.ray->first, f.ray->second, true));
    return best;
}

Outcome criterion9() {
    Outcome o;
    TreeModel tree(6, toy_market());
    auto seq = meanrisk_frontiers(tree, 0.01, false);
    auto profiles = simulate_policies(tree, seq);
    double worst = 0.0;
    std::string dominated_at;
    for (const auto& p : profiles) {
        if (p.policy == Policy::consistent) {
            for (const auto& pt : p.points) {
                const auto& f = seq.frontiers[pt.t];
                worst = std::max(worst, distance_to(f, pt.risk, pt.mean));
            }
            continue;
        }
        bool any = false;
        for (std::size_t k = 0; k < p.points.size(); ++k) {
            if (p.points[k].t >= 1 && p.dominated[k]) {
                if (!any) dominated_at += std::string(to_string(p.policy)) + " t=" + std::to_string(p.points[k].t) + " ";
                any = true;
            }
        }
        o.require(any, std::string(to_string(p.policy)) + " never dominated");
    }
    o.require(worst <= 1e-7, "consistent profile off the frontier by " + str(worst));
    if (o.pass) o.detail = "consistent gap " + str(worst, 3) + "; dominated: " + dominated_at;
    return o;
}

Outcome criterion10() {
    Outcome o;
    auto m = toy_market();
    std::vector<std::vector<double>> sols;
    std::vector<double> values, lowers;
    for (int n = 1; n <= 6; ++n) {
        BisectionConfig cfg;
        cfg.epsilon = std::pow(10.0, -n);
        auto tr = maximize(glr_family(), m, false, cfg);
        if (!tr.epsilon_solution) {
            o.require(false, "no solution at n=" + std::to_string(n));
            return o;
        }
        sols.push_back(*tr.epsilon_solution);
        values.push_back(eval_glr(m, pnl_of_allocation(m, sols.back())).value);
        lowers.push_back(tr.x_L);
    }
    std::vector<double> dist;
    for (std::size_t k = 0; k + 1 < sols.size(); ++k) {
        double d = 0.0;
        for (std::size_t j = 0; j < sols[k].size(); ++j) d = std::max(d, std::abs(sols[k + 1][j] - sols[k][j]));
        dist.push_back(d);
    }
    for (std::size_t k = 0; k + 1 < dist.size(); ++k)
        o.require(dist[k + 1] <= dist[k], "distance grows at n=" + std::to_string(k + 2));
    o.require(dist.back() < 0.05, "final distance " + str(dist.back()));
    const double limit = lowers.back();
    o.require(std::abs(values.back() - limit) <= 1e-4, "final index " + str(values.back()) + " vs " + str(limit));
    if (o.pass) {
        std::string d;
        for (double x : dist) d += str(x, 3) + " ";
        o.detail = "distances " + d + "final index " + str(values.back(), 8);
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                            criterion6, criterion7, criterion8, criterion9, criterion10};
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k]();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %zu: %s  %s\n", k + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
