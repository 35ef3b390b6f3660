#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "accmax/scenario.hpp"

using namespace accmax;

TEST_CASE("toy market layout") {
    auto m = toy_market();
    CHECK(m.n_states() == 4);
    CHECK(m.n_assets() == 2);
    CHECK(m.gross_return(0, 1) == doctest::Approx(1.045));
    CHECK(m.gross_return(1, 2) == doctest::Approx(1.055));
    for (double p : m.probabilities()) CHECK(p == 0.25);
}

TEST_CASE("probabilities must sum to one") {
    CHECK_THROWS_AS(ScenarioModel({0.5, 0.4}, {{1.0, 1.0}}), InputError);
    CHECK_THROWS_AS(ScenarioModel({1.2, -0.2}, {{1.0, 1.0}}), InputError);
    CHECK_THROWS_AS(ScenarioModel({0.5, 0.5}, {{1.0}}), InputError);
    CHECK_NOTHROW(ScenarioModel({0.5, 0.5}, {{1.0, 1.1}}));
}

TEST_CASE("csv round trip is exact") {
    auto m = toy_market();
    std::stringstream s;
    write_scenarios_csv(m, s);
    auto back = parse_scenarios_csv(s);
    CHECK(back == m);
}

TEST_CASE("json round trip is exact") {
    StudentTParams p;
    p.n_assets = 3;
    p.n_states = 50;
    auto m = generate_student_t(p);
    auto back = parse_scenarios_json(scenarios_to_json(m));
    CHECK(back.probabilities() == m.probabilities());
    CHECK(back.returns() == m.returns());
}

TEST_CASE("csv errors carry the location") {
    std::stringstream bad("state,prob,r_a\n1,0.5,1.0\n2,0.5,abc\n");
    try {
        parse_scenarios_csv(bad);
        FAIL("expected an error");
    } catch (const InputError& e) {
        std::string msg = e.what();
        CHECK(msg.find("row 3") != std::string::npos);
        CHECK(msg.find("column 3") != std::string::npos);
    }
    std::stringstream header("s,p\n");
    CHECK_THROWS_AS(parse_scenarios_csv(header), InputError);
    std::stringstream neg("state,prob,r_a\n1,-0.5,1.0\n2,1.5,1.0\n");
    CHECK_THROWS_AS(parse_scenarios_csv(neg), InputError);
}

TEST_CASE("student t generator is deterministic and seeded") {
    StudentTParams p;
    p.n_assets = 4;
    p.n_states = 200;
    auto a = generate_student_t(p);
    auto b = generate_student_t(p);
    CHECK(a == b);
    p.seed = 43;
    auto c = generate_student_t(p);
    CHECK_FALSE(a.returns() == c.returns());
    for (const auto& row : a.returns())
        for (double r : row) CHECK(r >= p.floor);
}

TEST_CASE("student t sample moments") {
    // Scale matrix Sigma gives covariance Sigma * nu / (nu - 2).
    StudentTParams p;
    p.n_assets = 2;
    p.n_states = 40000;
    p.dof = 8.0;
    p.scale = {4e-4, 1e-4, 1e-4, 2e-4};
    auto m = generate_student_t(p);
    auto mean = [&](std::size_t j) {
        double s = 0.0;
        for (std::size_t w = 0; w < m.n_states(); ++w) s += m.gross_return(j, w);
        return s / m.n_states();
    };
    double m0 = mean(0), m1 = mean(1);
    CHECK(m0 == doctest::Approx(1.002).epsilon(1e-3));
    double c00 = 0.0, c01 = 0.0;
    for (std::size_t w = 0; w < m.n_states(); ++w) {
        c00 += (m.gross_return(0, w) - m0) * (m.gross_return(0, w) - m0);
        c01 += (m.gross_return(0, w) - m0) * (m.gross_return(1, w) - m1);
    }
    c00 /= m.n_states();
    c01 /= m.n_states();
    const double k = p.dof / (p.dof - 2.0);
    CHECK(c00 == doctest::Approx(4e-4 * k).epsilon(0.08));
    CHECK(c01 == doctest::Approx(1e-4 * k).epsilon(0.15));
}

TEST_CASE("student t rejects bad parameters") {
    StudentTParams p;
    p.dof = 2.0;
    CHECK_THROWS(generate_student_t(p));
    p.dof = 5.0;
    p.n_assets = 2;
    p.scale = {1.0, 2.0, 2.0, 1.0};
    CHECK_THROWS(generate_student_t(p));
}

TEST_CASE("pnl of weights") {
    auto m = toy_market();
    std::vector<double> h{0.5, 0.5};
    auto d = pnl_of_weights(m, h, false);
    CHECK(d[0] == doctest::Approx(0.0425));
    CHECK(d[3] == doctest::Approx(-0.0175));
    std::vector<double> bad{0.5, 0.4};
    CHECK_THROWS(pnl_of_weights(m, bad, false));
    std::vector<double> shorted{1.5, -0.5};
    CHECK_THROWS(pnl_of_weights(m, shorted, false));
    CHECK_NOTHROW(pnl_of_weights(m, shorted, true));
}

TEST_CASE("tree indexing") {
    TreeModel tree(3, toy_market());
    CHECK(tree.node_count() == 1 + 4 + 16 + 64);
    CHECK(tree.nonterminal_count() == 21);
    for (NodeId n = 1; n < tree.node_count(); ++n) {
        NodeId p = tree.parent(n);
        CHECK(tree.child(p, tree.branch_of(n)) == n);
        CHECK(tree.node_from_path(tree.path(n)) == n);
        CHECK(tree.node_from_address(tree.address(n)) == n);
    }
    CHECK(tree.address(tree.child(tree.child(0, 2), 1)) == "2.1");
    double total = 0.0;
    for (NodeId l : tree.leaves_under(0)) total += tree.path_probability(l);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    NodeId mid = tree.child(0, 3);
    double sub = 0.0;
    for (NodeId l : tree.leaves_under(mid)) sub += tree.conditional_probability(mid, l);
    CHECK(sub == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS(tree.node_from_address("9"));
}

TEST_CASE("tree json round trip") {
    TreeModel tree(4, toy_market());
    auto back = parse_tree_json(tree_to_json(tree));
    CHECK(back.horizon() == 4);
    CHECK(back.step() == tree.step());
    CHECK_THROWS_AS(parse_tree_json("{\"horizon\": 2}"), InputError);
}

TEST_CASE("overrides make the tree non-iid") {
    TreeModel tree(2, toy_market());
    CHECK(tree.is_iid());
    tree.override_step(1, ScenarioModel({0.25, 0.25, 0.25, 0.25}, {{1, 1, 1, 1}, {1, 1, 1, 1}}));
    CHECK_FALSE(tree.is_iid());
    CHECK(tree.step_at(1).gross_return(0, 0) == 1.0);
    CHECK(tree.step_at(2) == toy_market());
    CHECK_THROWS(tree.override_step(1, ScenarioModel({1.0}, {{1.0}})));
}
