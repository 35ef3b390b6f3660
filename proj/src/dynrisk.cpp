#include "accmax/dynrisk.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "accmax/risk.hpp"

namespace accmax {

double one_step_risk(const OneStepRisk& step, const ScenarioModel& branch_model, const std::vector<double>& payoff) {
    PnlVector x{payoff};
    switch (step.kind) {
        case OneStepKind::tvar: return tvar(branch_model, x, step.q);
        case OneStepKind::expectation_of_loss: return expected_loss(branch_model, x);
    }
    return 0.0;
}

namespace {

void check_stream(const TreeModel& tree, const DividendStream& stream) {
    if (stream.values.size() != tree.node_count())
        throw std::invalid_argument("dividend stream does not cover the tree");
}

}  // namespace

NodeValuation recursive_risk(const TreeModel& tree, const DividendStream& stream, const OneStepRisk& step) {
    check_stream(tree, stream);
    NodeValuation v;
    v.values.assign(tree.node_count(), 0.0);
    for (NodeId n = tree.level_offset(tree.horizon()); n < tree.node_count(); ++n) v.values[n] = -stream.values[n];
    std::vector<double> payoff(tree.branching());
    for (NodeId n = tree.nonterminal_count(); n-- > 0;) {
        for (std::size_t i = 0; i < tree.branching(); ++i) payoff[i] = -v.values[tree.child(n, i)];
        v.values[n] = one_step_risk(step, tree.step_at(n), payoff) - stream.values[n];
    }
    return v;
}

NodeValuation conditional_tail_mean(const TreeModel& tree, const DividendStream& stream) {
    check_stream(tree, stream);
    NodeValuation v;
    v.values.assign(tree.node_count(), 0.0);
    for (NodeId n = tree.level_offset(tree.horizon()); n < tree.node_count(); ++n) v.values[n] = stream.values[n];
    for (NodeId n = tree.nonterminal_count(); n-- > 0;) {
        const auto& m = tree.step_at(n);
        double e = 0.0;
        for (std::size_t i = 0; i < tree.branching(); ++i) e += m.probability(i) * v.values[tree.child(n, i)];
        v.values[n] = e + stream.values[n];
    }
    return v;
}

NodeValuation flat_tail_tvar(const TreeModel& tree, const DividendStream& stream, double q) {
    check_stream(tree, stream);
    NodeValuation v;
    v.values.assign(tree.node_count(), 0.0);
    for (NodeId n = 0; n < tree.node_count(); ++n) {
        int t = tree.depth(n);
        auto leaves = tree.leaves_under(n);
        std::vector<double> probs, sums;
        for (NodeId l : leaves) {
            probs.push_back(tree.conditional_probability(n, l));
            sums.push_back(path_sum(tree, stream, l, t));
        }
        // Renormalise against rounding in long products.
        double tot = 0.0;
        for (double p : probs) tot += p;
        for (double& p : probs) p /= tot;
        probs.back() = 1.0 - [&] {
            double s = 0.0;
            for (std::size_t k = 0; k + 1 < probs.size(); ++k) s += probs[k];
            return s;
        }();
        ScenarioModel m(probs, {std::vector<double>(probs.size(), 1.0)});
        v.values[n] = tvar(m, PnlVector{sums}, q);
    }
    return v;
}

ConsistencyReport check_strong_consistency(const TreeModel& tree, const OneStepRisk& step, std::size_t samples,
                                           std::uint64_t seed, Valuation valuation) {
    if (!valuation) {
        valuation = [step](const TreeModel& tr, const DividendStream& s) { return recursive_risk(tr, s, step); };
    }
    ConsistencyReport rep;
    if (tree.horizon() < 2) return rep;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> draw(0.0, 1.0);
    std::uniform_int_distribution<int> pick_t(0, tree.horizon() - 2);
    for (std::size_t k = 0; k < samples; ++k) {
        int t = pick_t(rng);
        std::uniform_int_distribution<std::size_t> pick_n(0, tree.nodes_at(t + 1) - 1);
        NodeId pivot = tree.node(t + 1, pick_n(rng));

        DividendStream a;
        a.values.assign(tree.node_count(), 0.0);
        for (NodeId n = 1; n < tree.node_count(); ++n) a.values[n] = draw(rng);
        // Redraw everything strictly below the pivot, then shift its leaves so
        // the pivot's time-(t+1) value is unchanged.
        DividendStream b = a;
        auto leaves = tree.leaves_under(pivot);
        for (NodeId n = tree.child(pivot, 0); n < tree.node_count(); ++n) {
            NodeId anc = n;
            while (tree.depth(anc) > t + 1) anc = tree.parent(anc);
            if (anc == pivot) b.values[n] = 2.0 * draw(rng);
        }
        double va = valuation(tree, a).values[pivot];
        double vb = valuation(tree, b).values[pivot];
        for (NodeId l : leaves) b.values[l] += vb - va;
        auto ra = valuation(tree, a);
        auto rb = valuation(tree, b);
        ++rep.checks;
        double gap_next = std::abs(ra.values[pivot] - rb.values[pivot]);
        if (gap_next > 1e-10) {
            rep.failures.push_back("surgery did not equalise node '" + tree.address(pivot) + "'");
            continue;
        }
        NodeId anchor = tree.parent(pivot);
        double gap = std::abs(ra.values[anchor] - rb.values[anchor]);
        rep.max_discrepancy = std::max(rep.max_discrepancy, gap);
        if (gap > 1e-10) {
            rep.failures.push_back("time-" + std::to_string(t) + " values differ at node '" + tree.address(anchor) +
                                   "' by " + std::to_string(gap));
        }
    }
    return rep;
}

namespace {

std::vector<double> tail_sums(const TreeModel& tree, const DividendStream& stream, NodeId node,
                              std::vector<double>& probs) {
    int t = tree.depth(node);
    auto leaves = tree.leaves_under(node);
    std::vector<double> sums;
    probs.clear();
    for (NodeId l : leaves) {
        sums.push_back(path_sum(tree, stream, l, t));
        probs.push_back(tree.conditional_probability(node, l));
    }
    return sums;
}

double ratio(double num, double den) {
    num = std::max(num, 0.0);
    den = std::max(den, 0.0);
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return num / den;
}

}  // namespace

double eval_draroc(const TreeModel& tree, const DividendStream& stream, NodeId node, const OneStepRisk& pi) {
    check_stream(tree, stream);
    int t = tree.depth(node);
    DividendStream tail = tail_dividends(tree, stream, t);
    double mean = conditional_tail_mean(tree, tail).values[node];
    double risk = recursive_risk(tree, tail, pi).values[node];
    return ratio(mean, risk);
}

double eval_dglr(const TreeModel& tree, const DividendStream& stream, NodeId node) {
    check_stream(tree, stream);
    std::vector<double> probs;
    auto sums = tail_sums(tree, stream, node, probs);
    double mean = 0.0, loss = 0.0;
    for (std::size_t k = 0; k < sums.size(); ++k) {
        mean += probs[k] * sums[k];
        loss += probs[k] * std::max(-sums[k], 0.0);
    }
    return ratio(mean, loss);
}

}  // namespace accmax
