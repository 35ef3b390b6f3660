#pragma once

// Static coherent risk measures and the level-x risk minimisation programs.

#include <cstddef>
#include <string>
#include <vector>

#include "accmax/lp.hpp"
#include "accmax/scenario.hpp"

namespace accmax {

enum class FamilyKind { tvar, evar, glr_surrogate, raroc };

const char* to_string(FamilyKind k);

/// An increasing family x -> rho^x. The inner level is q = 1/(1+x) for the
/// tvar and raroc families and q = 1/(2+x) for the evar and glr families.
struct RiskFamilySpec {
    FamilyKind kind = FamilyKind::tvar;
    /// Level of pi = TVaR_{base_level} inside the raroc family.
    double base_level = 0.01;

    double level_of(double x) const;
    double x_of_level(double q) const;
    /// Upper end of the level range: 1 or 1/2.
    double max_level() const;
};

RiskFamilySpec tvar_family();
RiskFamilySpec glr_family();
RiskFamilySpec raroc_family(double pi_level = 0.01);

/// Tail value-at-risk: mean loss over the worst probability mass q.
double tvar(const ScenarioModel& model, const PnlVector& d, double q);
/// Value-at-risk inf{r : P(D + r < 0) <= p}.
double value_at_risk(const ScenarioModel& model, const PnlVector& d, double p);
/// The e solving q E[(D-e)^+] = (1-q) E[(D-e)^-].
double expectile(const ScenarioModel& model, const PnlVector& d, double q);

double expected_loss(const ScenarioModel& model, const PnlVector& d);      // E[-D]
double expected_shortfall(const ScenarioModel& model, const PnlVector& d); // E[D^-]
double worst_loss(const PnlVector& d);                                     // max -D

/// rho^x(D) for x > 0.
double family_risk(const RiskFamilySpec& spec, const ScenarioModel& model, const PnlVector& d, double x);

/// A positive multiple of rho^{x(q)}(D), defined on the closed level range
/// including the limits x = 0 and x = infinity. Same sign as family_risk.
double family_risk_at_level(const RiskFamilySpec& spec, const ScenarioModel& model, const PnlVector& d,
                            double q);

/// Rockafellar-Uryasev tvar of a fixed position, solved as an LP.
double tvar_by_lp(const ScenarioModel& model, const PnlVector& d, double q);

struct MinRiskLp {
    LinearProgram lp;
    /// Variable index of each portfolio weight.
    std::vector<std::size_t> weights;
};

/// LP whose optimum is p(x) = min over fully invested portfolios of rho^x.
MinRiskLp build_minrisk_lp(const RiskFamilySpec& spec, const ScenarioModel& model, double x, bool shortselling);

/// Level-parameterised variant; q ranges over [0, spec.max_level()] and the
/// optimal value is a positive multiple of p(x(q)).
MinRiskLp build_minrisk_lp_at_level(const RiskFamilySpec& spec, const ScenarioModel& model, double q,
                                    bool shortselling);

struct MinRiskResult {
    LpStatus status = LpStatus::numerical_failure;
    double value = 0.0;
    std::vector<double> weights;
};

MinRiskResult solve_minrisk(const MinRiskLp& problem);

}  // namespace accmax
