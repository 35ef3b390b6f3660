#include "accmax/acceptability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace accmax {

const char* to_string(IndexKind k) {
    switch (k) {
        case IndexKind::ait: return "ait";
        case IndexKind::glr: return "glr";
        case IndexKind::raroc: return "raroc";
    }
    return "?";
}

IndexKind index_from_string(const std::string& s) {
    if (s == "ait") return IndexKind::ait;
    if (s == "glr") return IndexKind::glr;
    if (s == "raroc") return IndexKind::raroc;
    throw std::invalid_argument("unknown index '" + s + "' (expected ait, glr or raroc)");
}

RiskFamilySpec family_for(IndexKind kind, double pi_level) {
    switch (kind) {
        case IndexKind::ait: return tvar_family();
        case IndexKind::glr: return glr_family();
        case IndexKind::raroc: return raroc_family(pi_level);
    }
    return tvar_family();
}

namespace {

double ratio(double num, double den) {
    num = std::max(num, 0.0);
    if (den <= 0.0) return kInf;
    return num / den;
}

}  // namespace

AcceptabilityValue eval_glr(const ScenarioModel& model, const PnlVector& d) {
    return {ratio(-expected_loss(model, d), expected_shortfall(model, d)), IndexKind::glr};
}

AcceptabilityValue eval_raroc(const ScenarioModel& model, const PnlVector& d, double pi_level) {
    if (!(pi_level > 0.0) || pi_level > 1.0) throw std::invalid_argument("eval_raroc: pi level must lie in (0,1]");
    double pi = tvar(model, d, pi_level);
    return {ratio(-expected_loss(model, d), std::max(pi, 0.0)), IndexKind::raroc};
}

AcceptabilityValue eval_ait(const ScenarioModel& model, const PnlVector& d) {
    if (d.size() != model.n_states()) throw std::invalid_argument("eval_ait: pnl length differs from state count");
    if (worst_loss(d) <= 0.0) return {kInf, IndexKind::ait};
    if (expected_loss(model, d) > 0.0) return {0.0, IndexKind::ait};
    // L(q) = q TVaR_q(D) is concave and piecewise linear with L(0) = 0 and
    // L'(0) > 0; the smallest q* > 0 with L(q*) <= 0 gives x* = 1/q* - 1.
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    double mass = 0.0, L = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        double p = model.probability(idx[k]);
        double loss = -d[idx[k]];
        double next = L + p * loss;
        if (next <= 0.0 || k + 1 == idx.size()) {
            double q = loss < 0.0 ? mass - L / loss : mass + p;
            if (!(q > 0.0)) return {kInf, IndexKind::ait};
            return {std::max(0.0, 1.0 / q - 1.0), IndexKind::ait};
        }
        mass += p;
        L = next;
    }
    return {0.0, IndexKind::ait};
}

AcceptabilityValue evaluate(IndexKind kind, const ScenarioModel& model, const PnlVector& d, double pi_level) {
    switch (kind) {
        case IndexKind::ait: return eval_ait(model, d);
        case IndexKind::glr: return eval_glr(model, d);
        case IndexKind::raroc: return eval_raroc(model, d, pi_level);
    }
    return {};
}

double level_of_zero_risk(const RiskFamilySpec& spec, const ScenarioModel& model, const PnlVector& d) {
    switch (spec.kind) {
        case FamilyKind::tvar: return eval_ait(model, d).value;
        case FamilyKind::evar:
        case FamilyKind::glr_surrogate: return eval_glr(model, d).value;
        case FamilyKind::raroc: return eval_raroc(model, d, spec.base_level).value;
    }
    return 0.0;
}

}  // namespace accmax
