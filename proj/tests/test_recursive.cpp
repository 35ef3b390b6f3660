#include "doctest.h"

#include <cmath>

#include "accmax/acceptability.hpp"
#include "accmax/lp.hpp"
#include "accmax/recursive.hpp"
#include "accmax/risk.hpp"

using namespace accmax;

namespace {

// Whole-tree epigraph LP: minimise r_root with
//   r_n >= z_n + (1/q) sum_i p_i s_{n,i},  s_{n,i} >= r_{c_i} - D_{c_i} - z_n,
// D_c = R_i . h_n - V_n, leaves r = 0, no short positions.
double whole_tree_min_risk(const TreeModel& tree, double v, double q) {
    LinearProgram lp;
    const std::size_t d = tree.step().n_assets();
    std::vector<std::vector<std::size_t>> h(tree.nonterminal_count());
    std::vector<std::size_t> r(tree.node_count());
    for (NodeId n = 0; n < tree.node_count(); ++n) {
        if (tree.is_leaf(n)) {
            r[n] = lp.add_variable(0.0, 0.0);
        } else {
            r[n] = lp.add_free_variable(n == 0 ? 1.0 : 0.0);
        }
    }
    for (NodeId n = 0; n < tree.nonterminal_count(); ++n)
        for (std::size_t j = 0; j < d; ++j) h[n].push_back(lp.add_variable(0.0, kInf));
    // Budget: root holds v; children hold R_i . h_parent.
    std::vector<Term> root_budget;
    for (auto x : h[0]) root_budget.push_back({x, 1.0});
    lp.add_row(root_budget, Relation::eq, v);
    for (NodeId n = 1; n < tree.nonterminal_count(); ++n) {
        NodeId p = tree.parent(n);
        std::size_t i = tree.branch_of(n);
        std::vector<Term> t;
        for (std::size_t j = 0; j < d; ++j) {
            t.push_back({h[n][j], 1.0});
            t.push_back({h[p][j], -tree.step().gross_return(j, i)});
        }
        lp.add_row(t, Relation::eq, 0.0);
    }
    for (NodeId n = 0; n < tree.nonterminal_count(); ++n) {
        auto z = lp.add_free_variable();
        std::vector<Term> epi{{r[n], 1.0}, {z, -1.0}};
        for (std::size_t i = 0; i < tree.branching(); ++i) {
            NodeId c = tree.child(n, i);
            auto s = lp.add_variable(0.0, kInf);
            epi.push_back({s, -tree.step().probability(i) / q});
            // s >= r_c - (R_i . h_n - sum h_n) - z
            std::vector<Term> row{{s, 1.0}, {r[c], -1.0}, {z, 1.0}};
            for (std::size_t j = 0; j < d; ++j) row.push_back({h[n][j], tree.step().gross_return(j, i) - 1.0});
            lp.add_row(row, Relation::ge, 0.0);
        }
        lp.add_row(epi, Relation::ge, 0.0);
    }
    auto sol = solve_lp(lp);
    REQUIRE(sol.optimal());
    return sol.value;
}

}  // namespace

TEST_CASE("one period optimum of the toy market") {
    auto r = one_period_max(toy_market(), false);
    CHECK(r.status == BisectStatus::bracketed);
    CHECK(r.x_L >= 0.76522);
    CHECK(r.x_U <= 0.76548);
    REQUIRE(r.weights.size() == 2);
    CHECK(std::abs(r.weights[0] - 0.5517) < 0.005);
}

TEST_CASE("nested risk on one period is the static min-risk value") {
    TreeModel tree(1, toy_market());
    for (double x : {0.5, 0.7653, 2.0}) {
        double q = tvar_family().level_of(x);
        auto st = solve_minrisk(build_minrisk_lp(tvar_family(), toy_market(), x, false));
        REQUIRE(st.status == LpStatus::optimal);
        for (double v : {0.5, 1.0, 3.0})
            CHECK(nested_min_risk(tree, 0, v, q) == doctest::Approx(v * st.value).epsilon(1e-9));
    }
}

TEST_CASE("nested risk matches the whole-tree LP") {
    for (int T : {2, 3}) {
        TreeModel tree(T, toy_market());
        for (double q : {0.2, 0.5665, 0.9}) {
            std::size_t solves = 0;
            double nested = nested_min_risk(tree, 0, 1.0, q, &solves);
            CHECK(nested == doctest::Approx(whole_tree_min_risk(tree, 1.0, q)).epsilon(1e-9));
            CHECK(solves == tree.nonterminal_count());
        }
    }
}

TEST_CASE("nested risk is positively homogeneous in wealth") {
    TreeModel tree(3, toy_market());
    NodeId n = tree.node_from_address("2");
    double base = nested_min_risk(tree, n, 1.0, 0.4);
    CHECK(nested_min_risk(tree, n, 2.5, 0.4) == doctest::Approx(2.5 * base).epsilon(1e-10));
    CHECK(nested_min_risk(tree, tree.node(3, 0), 1.0, 0.4) == 0.0);
}

TEST_CASE("dynamic index of a constant strategy on one period is the static index") {
    TreeModel tree(1, toy_market());
    auto st = build_constant_proportion_strategy(tree, {0.6, 0.4}, 1.0);
    auto d = dividends_of(tree, wealth_of(tree, st, 1.0));
    auto b = dynamic_ait(tree, d, 0, 1e-6);
    double ref = eval_ait(toy_market(), pnl_of_weights(toy_market(), std::vector<double>{0.6, 0.4}, false)).value;
    CHECK(b.x_L <= ref + 1e-12);
    CHECK(b.x_U >= ref - 1e-12);
    CHECK(b.x_U - b.x_L < 1e-6);
}

TEST_CASE("optimal index is constant across nodes and wealths") {
    TreeModel tree(2, toy_market());
    VerifyOptions o;
    o.epsilon = 1e-3;
    auto rep = verify_constant_acceptability(tree, o);
    CHECK(rep.ok());
    CHECK(rep.rows.size() == 3 * (1 + 4));
    CHECK(rep.max_deviation < 2e-3);
    CHECK(rep.constant_strategy.x_U >= rep.one_period.alpha_star - 2e-3);
    auto j = rep.to_json();
    CHECK(j.find("\"ok\": true") != std::string::npos);
}

TEST_CASE("a non-iid tree breaks constancy") {
    TreeModel tree(2, toy_market());
    auto R = toy_market().returns();
    for (double& x : R[1]) x *= 1.01;
    tree.override_step(1, ScenarioModel(std::vector<double>(4, 0.25), R));
    VerifyOptions o;
    o.epsilon = 1e-3;
    auto rep = verify_constant_acceptability(tree, o);
    CHECK_FALSE(rep.ok());
    CHECK(rep.max_deviation > 0.1);
}

TEST_CASE("verification rejects a zero epsilon") {
    TreeModel tree(1, toy_market());
    VerifyOptions o;
    o.epsilon = 0.0;
    CHECK_THROWS(verify_constant_acceptability(tree, o));
}
