#pragma once

// Direct evaluation of the static acceptability indices AIT, GLR and RAROC.

#include <cmath>
#include <string>

#include "accmax/risk.hpp"
#include "accmax/scenario.hpp"

namespace accmax {

enum class IndexKind { ait, glr, raroc };

const char* to_string(IndexKind k);
IndexKind index_from_string(const std::string& s);

/// The risk family whose robust representation yields the index.
RiskFamilySpec family_for(IndexKind kind, double pi_level = 0.01);

/// Nonnegative extended real; +infinity is the IEEE infinity and compares
/// above every finite value.
struct AcceptabilityValue {
    double value = 0.0;
    IndexKind kind = IndexKind::ait;

    bool infinite() const { return std::isinf(value); }
};

/// (E[D])^+ / E[D^-], with a/0 = +infinity for a >= 0.
AcceptabilityValue eval_glr(const ScenarioModel& model, const PnlVector& d);
/// (E[D])^+ / (TVaR_{pi_level}(D))^+, with a/0 = +infinity.
AcceptabilityValue eval_raroc(const ScenarioModel& model, const PnlVector& d, double pi_level = 0.01);
/// sup{x : TVaR_{1/(1+x)}(D) <= 0}, found by a breakpoint scan.
AcceptabilityValue eval_ait(const ScenarioModel& model, const PnlVector& d);

AcceptabilityValue evaluate(IndexKind kind, const ScenarioModel& model, const PnlVector& d,
                            double pi_level = 0.01);

/// Largest y with rho^y(D) <= 0 for the given family.
double level_of_zero_risk(const RiskFamilySpec& spec, const ScenarioModel& model, const PnlVector& d);

}  // namespace accmax
