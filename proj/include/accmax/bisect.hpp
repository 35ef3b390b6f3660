#pragma once

// Acceptability maximisation by bisection over sign-classified risk minima.

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "accmax/risk.hpp"
#include "accmax/scenario.hpp"

namespace accmax {

enum class Variant { original, modified, mixed, zero_level };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct BisectionConfig {
    double x0 = 2.0;
    /// Maximal number of Step 1 iterations.
    int max_iterations = 15;
    double epsilon = 1e-4;
    Variant variant = Variant::original;
    /// A probe value v counts as positive iff v > sign_tolerance.
    double sign_tolerance = 1e-9;
    /// Hard stop for the interval-halving loop.
    int step2_cap = 1000;

    void validate() const;
};

enum class BisectStatus { bracketed, below_lower_range, above_upper_range };

const char* to_string(BisectStatus s);

struct TraceRow {
    int phase = 1;  // 1 = bracket search, 2 = interval halving
    int iter = 0;   // 0 for the endpoint checks of the level-bisecting variants
    double x_L = 0.0;
    double x_U = kInf;
    double x = 0.0;
    /// Inner level probed; NaN when the probe was placed on x.
    double q = std::numeric_limits<double>::quiet_NaN();
    double q_L = std::numeric_limits<double>::quiet_NaN();
    double q_U = std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    bool positive = false;
    /// Zero-risk level of the probe's minimiser (zero_level variant only).
    double zero_level = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> weights;
};

struct BisectionTrace {
    std::vector<TraceRow> step1_rows;
    std::vector<TraceRow> step2_rows;
    double x_L = 0.0;
    double x_U = kInf;
    std::optional<std::vector<double>> epsilon_solution;
    BisectStatus status = BisectStatus::bracketed;
    std::size_t lp_solves = 0;
};

BisectionTrace maximize(const RiskFamilySpec& spec, const ScenarioModel& model, bool shortselling,
                        const BisectionConfig& cfg);

/// ceil(log2(x0/eps) + M - 2), clamped at zero.
int predict_step2_bound(const BisectionConfig& cfg);

/// (x0 2^(1-M), x0 2^(M-1)): the range in which Step 1 can locate the optimum.
std::pair<double, double> guard_interval(const BisectionConfig& cfg);

/// Columns: phase,iter,x_L,x_U,x,q,sign,zero_level_y.
void write_trace_csv(const BisectionTrace& trace, std::ostream& out);

/// Human-readable table in the layout of the iteration tables.
void write_trace_table(const BisectionTrace& trace, std::ostream& out);

}  // namespace accmax
