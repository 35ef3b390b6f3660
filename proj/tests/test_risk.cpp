#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "accmax/risk.hpp"

using namespace accmax;

namespace {

struct Instance {
    ScenarioModel model;
    PnlVector d;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::normal_distribution<double> z(0.01, 0.05);
    std::vector<double> p(n);
    for (double& v : p) v = u(rng);
    double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= s;
    p.back() = 1.0 - std::accumulate(p.begin(), p.end() - 1, 0.0);
    PnlVector d;
    d.values.resize(n);
    for (double& v : d.values) v = z(rng);
    return {ScenarioModel(p, {std::vector<double>(n, 1.0)}), d};
}

// Worst mass q averaged directly from the sorted outcomes.
double tvar_by_sorting(const ScenarioModel& m, const PnlVector& d, double q) {
    std::vector<std::pair<double, double>> v;
    for (std::size_t w = 0; w < d.size(); ++w) v.push_back({d[w], m.probability(w)});
    std::sort(v.begin(), v.end());
    double left = q, acc = 0.0;
    for (auto [x, p] : v) {
        double take = std::min(p, left);
        acc += take * x;
        left -= take;
        if (left <= 0.0) break;
    }
    return -acc / q;
}

PnlVector shifted(const PnlVector& d, double c) {
    PnlVector o = d;
    for (double& v : o.values) v += c;
    return o;
}

PnlVector scaled(const PnlVector& d, double c) {
    PnlVector o = d;
    for (double& v : o.values) v *= c;
    return o;
}

}  // namespace

TEST_CASE("tvar matches sorting and the Rockafellar-Uryasev LP") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> lvl(0.01, 1.0);
    for (int k = 0; k < 200; ++k) {
        auto in = random_instance(rng, 16);
        double q = lvl(rng);
        double ref = tvar_by_sorting(in.model, in.d, q);
        CHECK(tvar(in.model, in.d, q) == doctest::Approx(ref).epsilon(1e-12));
        CHECK(std::abs(tvar_by_lp(in.model, in.d, q) - ref) < 1e-8);
    }
}

TEST_CASE("tvar endpoints") {
    std::mt19937_64 rng(2);
    auto in = random_instance(rng, 16);
    CHECK(tvar(in.model, in.d, 1.0) == doctest::Approx(expected_loss(in.model, in.d)).epsilon(1e-12));
    CHECK(tvar(in.model, in.d, 1e-9) == doctest::Approx(worst_loss(in.d)).epsilon(1e-12));
    CHECK_THROWS(tvar(in.model, in.d, 0.0));
    CHECK_THROWS(tvar(in.model, in.d, 1.5));
}

TEST_CASE("tvar is coherent") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        auto a = random_instance(rng, 16);
        auto b = random_instance(rng, 16);
        const auto& m = a.model;
        double q = 0.02 + 0.9 * u(rng);
        double c = u(rng) - 0.5, lam = 3.0 * u(rng);
        double ra = tvar(m, a.d, q), rb = tvar(m, b.d, q);
        CHECK(tvar(m, shifted(a.d, c), q) == doctest::Approx(ra - c).epsilon(1e-12));
        CHECK(std::abs(tvar(m, scaled(a.d, lam), q) - lam * ra) < 1e-12);
        PnlVector sum = a.d;
        for (std::size_t w = 0; w < sum.size(); ++w) sum.values[w] += b.d[w];
        CHECK(tvar(m, sum, q) <= ra + rb + 1e-12);
        PnlVector up = a.d;
        for (double& v : up.values) v += 0.1 * u(rng);
        CHECK(tvar(m, up, q) <= ra + 1e-12);
    }
}

TEST_CASE("value at risk is the quantile") {
    ScenarioModel m({0.1, 0.2, 0.3, 0.4}, {{1, 1, 1, 1}});
    PnlVector d{{-3.0, -1.0, 0.5, 2.0}};
    CHECK(value_at_risk(m, d, 0.05) == doctest::Approx(3.0));
    CHECK(value_at_risk(m, d, 0.15) == doctest::Approx(1.0));
    CHECK(value_at_risk(m, d, 0.5) == doctest::Approx(-0.5));
}

TEST_CASE("expectile first order condition") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> lvl(0.01, 0.99);
    for (int k = 0; k < 200; ++k) {
        auto in = random_instance(rng, 16);
        double q = lvl(rng);
        double e = expectile(in.model, in.d, q);
        double pos = 0.0, neg = 0.0;
        for (std::size_t w = 0; w < in.d.size(); ++w) {
            double p = in.model.probability(w);
            pos += p * std::max(in.d[w] - e, 0.0);
            neg += p * std::max(e - in.d[w], 0.0);
        }
        CHECK(std::abs(q * pos - (1.0 - q) * neg) < 1e-12);
    }
    auto in = random_instance(rng, 16);
    CHECK(expectile(in.model, in.d, 0.5) == doctest::Approx(-expected_loss(in.model, in.d)).epsilon(1e-12));
}

TEST_CASE("families increase in x") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.01, 50.0);
    const RiskFamilySpec fams[] = {tvar_family(), glr_family(), raroc_family(0.01), {FamilyKind::evar, 0.01}};
    for (int k = 0; k < 100; ++k) {
        auto in = random_instance(rng, 16);
        double x1 = u(rng), x2 = u(rng);
        if (x1 > x2) std::swap(x1, x2);
        for (const auto& f : fams) {
            CHECK(family_risk(f, in.model, in.d, x1) <= family_risk(f, in.model, in.d, x2) + 1e-12);
        }
    }
}

TEST_CASE("level form has the sign of the family risk") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.01, 30.0);
    const RiskFamilySpec fams[] = {tvar_family(), glr_family(), raroc_family(0.01), {FamilyKind::evar, 0.01}};
    for (int k = 0; k < 100; ++k) {
        auto in = random_instance(rng, 16);
        double x = u(rng);
        for (const auto& f : fams) {
            double a = family_risk(f, in.model, in.d, x);
            double b = family_risk_at_level(f, in.model, in.d, f.level_of(x));
            if (std::abs(a) > 1e-12) CHECK((a > 0) == (b > 0));
            CHECK(f.x_of_level(f.level_of(x)) == doctest::Approx(x).epsilon(1e-12));
        }
    }
}

TEST_CASE("min-risk LP agrees with a grid over the toy weights") {
    auto m = toy_market();
    const RiskFamilySpec fams[] = {tvar_family(), glr_family(), raroc_family(0.01)};
    for (const auto& f : fams) {
        for (double x : {0.5, 0.76, 2.0, 3.1, 10.0}) {
            auto r = solve_minrisk(build_minrisk_lp(f, m, x, false));
            REQUIRE(r.status == LpStatus::optimal);
            double best = kInf;
            for (int k = 0; k <= 100000; ++k) {
                double h = k / 100000.0;
                std::vector<double> w{h, 1.0 - h};
                best = std::min(best, family_risk(f, m, pnl_of_allocation(m, w), x));
            }
            CHECK(r.value <= best + 1e-12);
            CHECK(r.value >= best - 1e-6);
            CHECK(family_risk(f, m, pnl_of_allocation(m, r.weights), x) == doctest::Approx(r.value).epsilon(1e-9));
        }
    }
}

TEST_CASE("level LP is a positive multiple of the x LP") {
    auto m = toy_market();
    for (auto f : {tvar_family(), glr_family(), raroc_family(0.01)}) {
        for (double x : {0.5, 2.0, 7.0}) {
            auto a = solve_minrisk(build_minrisk_lp(f, m, x, true));
            auto b = solve_minrisk(build_minrisk_lp_at_level(f, m, f.level_of(x), true));
            REQUIRE(a.status == LpStatus::optimal);
            REQUIRE(b.status == LpStatus::optimal);
            if (std::abs(a.value) > 1e-9) CHECK((a.value > 0) == (b.value > 0));
        }
    }
}

TEST_CASE("evar family has no linear encoding") {
    CHECK_THROWS_AS(build_minrisk_lp({FamilyKind::evar, 0.01}, toy_market(), 1.0, false), std::invalid_argument);
}
