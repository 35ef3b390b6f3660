#include "accmax/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace accmax {

const char* to_string(FamilyKind k) {
    switch (k) {
        case FamilyKind::tvar: return "tvar";
        case FamilyKind::evar: return "evar";
        case FamilyKind::glr_surrogate: return "glr";
        case FamilyKind::raroc: return "raroc";
    }
    return "?";
}

double RiskFamilySpec::level_of(double x) const {
    if (std::isinf(x)) return 0.0;
    switch (kind) {
        case FamilyKind::tvar:
        case FamilyKind::raroc: return 1.0 / (1.0 + x);
        case FamilyKind::evar:
        case FamilyKind::glr_surrogate: return 1.0 / (2.0 + x);
    }
    return 0.0;
}

double RiskFamilySpec::x_of_level(double q) const {
    if (q <= 0.0) return kInf;
    switch (kind) {
        case FamilyKind::tvar:
        case FamilyKind::raroc: return std::max(0.0, 1.0 / q - 1.0);
        case FamilyKind::evar:
        case FamilyKind::glr_surrogate: return std::max(0.0, 1.0 / q - 2.0);
    }
    return 0.0;
}

double RiskFamilySpec::max_level() const {
    return kind == FamilyKind::tvar || kind == FamilyKind::raroc ? 1.0 : 0.5;
}

RiskFamilySpec tvar_family() { return {FamilyKind::tvar, 0.01}; }
RiskFamilySpec glr_family() { return {FamilyKind::glr_surrogate, 0.01}; }
RiskFamilySpec raroc_family(double pi_level) { return {FamilyKind::raroc, pi_level}; }

namespace {

void check_size(const ScenarioModel& model, const PnlVector& d) {
    if (d.size() != model.n_states()) throw std::invalid_argument("pnl vector length differs from state count");
}

// State indices sorted by loss -d, largest loss first.
std::vector<std::size_t> by_loss_desc(const PnlVector& d) {
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    return idx;
}

}  // namespace

double expected_loss(const ScenarioModel& model, const PnlVector& d) {
    check_size(model, d);
    return -model.expectation(d.values);
}

double expected_shortfall(const ScenarioModel& model, const PnlVector& d) {
    check_size(model, d);
    double s = 0.0;
    for (std::size_t w = 0; w < d.size(); ++w) s += model.probability(w) * std::max(-d[w], 0.0);
    return s;
}

double worst_loss(const PnlVector& d) {
    if (d.values.empty()) throw std::invalid_argument("worst_loss: empty pnl");
    return -*std::min_element(d.values.begin(), d.values.end());
}

double tvar(const ScenarioModel& model, const PnlVector& d, double q) {
    check_size(model, d);
    if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("tvar: level must lie in (0,1]");
    auto idx = by_loss_desc(d);
    double mass = 0.0, acc = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        double p = model.probability(idx[k]);
        double loss = -d[idx[k]];
        bool last = k + 1 == idx.size();
        if (mass + p >= q || last) {
            acc += (q - mass) * loss;
            return acc / q;
        }
        mass += p;
        acc += p * loss;
    }
    return acc / q;
}

double value_at_risk(const ScenarioModel& model, const PnlVector& d, double p) {
    check_size(model, d);
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("value_at_risk: level must lie in (0,1)");
    auto idx = by_loss_desc(d);  // ascending d
    double below = 0.0;
    double best = d[idx[0]];
    std::size_t k = 0;
    while (k < idx.size()) {
        double v = d[idx[k]];
        if (below > p) break;
        best = v;
        while (k < idx.size() && d[idx[k]] == v) below += model.probability(idx[k++]);
    }
    return -best;
}

double expectile(const ScenarioModel& model, const PnlVector& d, double q) {
    check_size(model, d);
    if (!(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("expectile: level must lie in (0,1)");
    auto idx = by_loss_desc(d);  // ascending d
    const std::size_t n = idx.size();
    // g(e) = q E[(D-e)^+] - (1-q) E[(D-e)^-] is decreasing and piecewise linear.
    auto g = [&](double e) {
        double up = 0.0, dn = 0.0;
        for (std::size_t w = 0; w < n; ++w) {
            double v = d[w] - e;
            if (v > 0) up += model.probability(w) * v;
            else dn -= model.probability(w) * v;
        }
        return q * up - (1.0 - q) * dn;
    };
    if (d[idx[0]] == d[idx[n - 1]]) return d[idx[0]];
    std::size_t k = 0;
    while (k + 1 < n && g(d[idx[k + 1]]) > 0.0) ++k;
    // Root lies in [d_(k), d_(k+1)]; atoms at or below d_(k) sit on the loss side.
    if (k + 1 < n && g(d[idx[k + 1]]) == 0.0) return d[idx[k + 1]];
    double A = 0.0, Pa = 0.0, B = 0.0, Pb = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double p = model.probability(idx[j]);
        double v = d[idx[j]];
        if (j <= k) {
            B += p * v;
            Pb += p;
        } else {
            A += p * v;
            Pa += p;
        }
    }
    return (q * A + (1.0 - q) * B) / (q * Pa + (1.0 - q) * Pb);
}

double family_risk(const RiskFamilySpec& spec, const ScenarioModel& model, const PnlVector& d, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("family_risk: level x must be positive");
    switch (spec.kind) {
        case FamilyKind::tvar:
            return std::isinf(x) ? worst_loss(d) : tvar(model, d, spec.level_of(x));
        case FamilyKind::evar:
            if (std::isinf(x)) throw std::invalid_argument("family_risk: evar needs finite x");
            return -expectile(model, d, spec.level_of(x));
        case FamilyKind::glr_surrogate:
            if (std::isinf(x)) throw std::invalid_argument("family_risk: glr surrogate needs finite x");
            return expected_loss(model, d) + x * expected_shortfall(model, d);
        case FamilyKind::raroc: {
            double pi = tvar(model, d, spec.base_level);
            if (std::isinf(x)) return pi;
            double e = expected_loss(model, d);
            return std::min(pi, (e + x * pi) / (1.0 + x));
        }
    }
    return 0.0;
}

double family_risk_at_level(const RiskFamilySpec& spec, const ScenarioModel& model, const PnlVector& d,
                            double q) {
    if (q < 0.0 || q > spec.max_level()) throw std::invalid_argument("family_risk_at_level: level out of range");
    switch (spec.kind) {
        case FamilyKind::tvar:
            return q == 0.0 ? worst_loss(d) : tvar(model, d, q);
        case FamilyKind::evar:
            if (q == 0.0) return worst_loss(d);
            if (q == 0.5) return expected_loss(model, d);
            return -expectile(model, d, q);
        case FamilyKind::glr_surrogate:
            return q * expected_loss(model, d) + (1.0 - 2.0 * q) * expected_shortfall(model, d);
        case FamilyKind::raroc:
            return q * expected_loss(model, d) + (1.0 - q) * tvar(model, d, spec.base_level);
    }
    return 0.0;
}

double tvar_by_lp(const ScenarioModel& model, const PnlVector& d, double q) {
    check_size(model, d);
    LinearProgram lp;
    std::size_t z = lp.add_free_variable(1.0, "z");
    for (std::size_t w = 0; w < model.n_states(); ++w) {
        std::size_t s = lp.add_variable(0.0, kInf, model.probability(w) / q, "s" + std::to_string(w));
        // s_w >= -d_w - z
        lp.add_row({{s, 1.0}, {z, 1.0}}, Relation::ge, -d[w]);
    }
    LpSolution sol = solve_lp(lp);
    if (!sol.optimal()) throw std::runtime_error("tvar_by_lp: solver status " + std::string(to_string(sol.status)));
    return sol.value;
}

namespace {

// Adds portfolio weights with sum one; returns their indices.
std::vector<std::size_t> add_weights(LinearProgram& lp, const ScenarioModel& model, bool shortselling) {
    std::vector<std::size_t> h;
    std::vector<Term> budget;
    for (std::size_t j = 0; j < model.n_assets(); ++j) {
        double lo = shortselling ? -kInf : 0.0;
        h.push_back(lp.add_variable(lo, kInf, 0.0, "h" + std::to_string(j + 1)));
        budget.push_back({h.back(), 1.0});
    }
    lp.add_row(std::move(budget), Relation::eq, 1.0, "budget");
    return h;
}

// Terms of sum_j h_j R_jw, i.e. D_w + 1.
std::vector<Term> gross_terms(const ScenarioModel& model, const std::vector<std::size_t>& h, std::size_t w) {
    std::vector<Term> t;
    for (std::size_t j = 0; j < h.size(); ++j) t.push_back({h[j], model.gross_return(j, w)});
    return t;
}

// Adds c * E[-D] to the objective.
void add_expected_loss(LinearProgram& lp, const ScenarioModel& model, const std::vector<std::size_t>& h,
                       double c) {
    for (std::size_t j = 0; j < h.size(); ++j) {
        double mean = 0.0;
        for (std::size_t w = 0; w < model.n_states(); ++w) mean += model.probability(w) * model.gross_return(j, w);
        lp.objective[h[j]] -= c * mean;
    }
    lp.offset += c;
}

// Adds c * TVaR_q(D) to the objective (worst-case loss when q = 0).
void add_tvar(LinearProgram& lp, const ScenarioModel& model, const std::vector<std::size_t>& h, double q,
              double c) {
    if (c == 0.0) return;
    std::size_t z = lp.add_free_variable(c, "z");
    for (std::size_t w = 0; w < model.n_states(); ++w) {
        auto terms = gross_terms(model, h, w);
        terms.push_back({z, 1.0});
        if (q == 0.0) {
            // z >= -D_w
            lp.add_row(std::move(terms), Relation::ge, 1.0, "worst" + std::to_string(w));
        } else {
            // s_w >= -D_w - z
            std::size_t s = lp.add_variable(0.0, kInf, c * model.probability(w) / q, "s" + std::to_string(w));
            terms.push_back({s, 1.0});
            lp.add_row(std::move(terms), Relation::ge, 1.0, "tail" + std::to_string(w));
        }
    }
}

// Adds c * E[D^-] to the objective.
void add_shortfall(LinearProgram& lp, const ScenarioModel& model, const std::vector<std::size_t>& h, double c) {
    if (c == 0.0) return;
    for (std::size_t w = 0; w < model.n_states(); ++w) {
        std::size_t m = lp.add_variable(0.0, kInf, c * model.probability(w), "m" + std::to_string(w));
        auto terms = gross_terms(model, h, w);
        terms.push_back({m, 1.0});
        // m_w >= -D_w
        lp.add_row(std::move(terms), Relation::ge, 1.0, "loss" + std::to_string(w));
    }
}

}  // namespace

MinRiskLp build_minrisk_lp(const RiskFamilySpec& spec, const ScenarioModel& model, double x, bool shortselling) {
    if (!(x > 0.0) || std::isinf(x)) throw std::invalid_argument("build_minrisk_lp: level x must be positive and finite");
    MinRiskLp out;
    auto& lp = out.lp;
    switch (spec.kind) {
        case FamilyKind::evar:
            throw std::invalid_argument("build_minrisk_lp: evar family has no linear encoding; use the glr surrogate");
        case FamilyKind::tvar:
            out.weights = add_weights(lp, model, shortselling);
            add_tvar(lp, model, out.weights, spec.level_of(x), 1.0);
            break;
        case FamilyKind::glr_surrogate:
            out.weights = add_weights(lp, model, shortselling);
            add_expected_loss(lp, model, out.weights, 1.0);
            add_shortfall(lp, model, out.weights, x);
            break;
        case FamilyKind::raroc:
            out.weights = add_weights(lp, model, shortselling);
            add_expected_loss(lp, model, out.weights, 1.0 / (1.0 + x));
            add_tvar(lp, model, out.weights, spec.base_level, x / (1.0 + x));
            break;
    }
    return out;
}

MinRiskLp build_minrisk_lp_at_level(const RiskFamilySpec& spec, const ScenarioModel& model, double q,
                                    bool shortselling) {
    if (q < 0.0 || q > spec.max_level()) throw std::invalid_argument("build_minrisk_lp_at_level: level out of range");
    MinRiskLp out;
    auto& lp = out.lp;
    switch (spec.kind) {
        case FamilyKind::evar:
            throw std::invalid_argument("build_minrisk_lp_at_level: evar family has no linear encoding");
        case FamilyKind::tvar:
            out.weights = add_weights(lp, model, shortselling);
            add_tvar(lp, model, out.weights, q, 1.0);
            break;
        case FamilyKind::glr_surrogate:
            out.weights = add_weights(lp, model, shortselling);
            if (q > 0.0) add_expected_loss(lp, model, out.weights, q);
            add_shortfall(lp, model, out.weights, 1.0 - 2.0 * q);
            break;
        case FamilyKind::raroc:
            out.weights = add_weights(lp, model, shortselling);
            if (q > 0.0) add_expected_loss(lp, model, out.weights, q);
            add_tvar(lp, model, out.weights, spec.base_level, 1.0 - q);
            break;
    }
    return out;
}

MinRiskResult solve_minrisk(const MinRiskLp& problem) {
    std::optional<LpSolution> by_dual;
    if (problem.lp.n_rows() > 4 * problem.weights.size() + 8) by_dual = solve_lp_by_dual(problem.lp);
    LpSolution sol = by_dual ? std::move(*by_dual) : solve_lp(problem.lp);
    MinRiskResult r;
    r.status = sol.status;
    if (!sol.optimal()) return r;
    r.value = sol.value;
    for (std::size_t j : problem.weights) r.weights.push_back(sol.point[j]);
    return r;
}

}  // namespace accmax
