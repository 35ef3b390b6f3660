#pragma once

// Dense bounded-variable primal simplex and a dichotomic bi-objective solver.

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace accmax {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Feasibility tolerance on bounds and row activities.
inline constexpr double kFeasTol = 1e-8;
/// Optimality tolerance on reduced costs.
inline constexpr double kOptTol = 1e-9;

enum class Relation { le, eq, ge };

struct Term {
    std::size_t index;
    double coef;
};

struct Constraint {
    std::vector<Term> terms;
    Relation relation;
    double rhs;
    std::string name;
};

/// minimize objective . x + offset subject to rows and per-variable bounds.
class LinearProgram {
public:
    std::size_t add_variable(double lower, double upper, double cost = 0.0, std::string name = {});
    std::size_t add_free_variable(double cost = 0.0, std::string name = {}) {
        return add_variable(-kInf, kInf, cost, std::move(name));
    }
    std::size_t add_row(std::vector<Term> terms, Relation rel, double rhs, std::string name = {});

    std::size_t n_vars() const { return objective.size(); }
    std::size_t n_rows() const { return rows.size(); }

    /// Throws std::invalid_argument if indices, bounds or rhs are malformed.
    void validate() const;

    double evaluate_objective(const std::vector<double>& x) const;
    double row_activity(std::size_t row, const std::vector<double>& x) const;

    std::vector<double> objective;
    double offset = 0.0;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::string> names;
    std::vector<Constraint> rows;
};

enum class LpStatus { optimal, infeasible, unbounded, numerical_failure };

const char* to_string(LpStatus s);

struct LpSolution {
    LpStatus status = LpStatus::numerical_failure;
    double value = 0.0;
    std::vector<double> point;
    /// One multiplier per row, y_i = d(value)/d(rhs_i).
    std::vector<double> dual_point;
    /// c_j - sum_i y_i a_ij per variable.
    std::vector<double> reduced_costs;
    /// Improving direction in variable space when status is unbounded.
    std::vector<double> ray;
    std::size_t iterations = 0;

    bool optimal() const { return status == LpStatus::optimal; }
};

LpSolution solve_lp(const LinearProgram& lp);

/// Solves through the dual when every variable is free or in [0, inf) and each
/// column appearing in only one row is a positively priced slack of an
/// inequality. Such columns become bounds in the dual, which is then much
/// smaller than the primal for scenario LPs with one row per state. Returns
/// nullopt when the structure does not apply.
std::optional<LpSolution> solve_lp_by_dual(const LinearProgram& lp);

/// Independent a-posteriori certificate of an optimal solve.
struct LpCertificate {
    double primal_residual = 0.0;        // worst bound or row violation
    double dual_residual = 0.0;          // worst sign violation of duals / reduced costs
    double complementarity = 0.0;        // worst |multiplier| x |slack| product
    double dual_value = 0.0;             // objective of the dual at dual_point
    double gap = 0.0;                    // primal value minus dual value
};

LpCertificate certify(const LinearProgram& lp, const LpSolution& sol);

/// Human-readable dump in the CPLEX LP text format.
void write_lp_format(const LinearProgram& lp, std::ostream& out);

/// Two objectives over the constraint set and bounds of `base`; the objective
/// of `base` is ignored.
struct BiObjectiveLp {
    LinearProgram base;
    std::vector<double> f1;
    std::vector<double> f2;
    double f1_offset = 0.0;
    double f2_offset = 0.0;
};

struct BiVertex {
    double f1;
    double f2;
    std::vector<double> point;
};

/// Efficient extreme points of the upper image, ordered with f1 strictly
/// decreasing and f2 strictly increasing. When f1 is unbounded below the
/// frontier ends in a ray leaving the last vertex in direction ray (df1, df2)
/// with df1 = -1.
struct BiObjectiveResult {
    LpStatus status = LpStatus::optimal;
    std::vector<BiVertex> vertices;
    std::optional<std::pair<double, double>> ray;
    std::size_t lp_solves = 0;
};

BiObjectiveResult solve_biobjective(const BiObjectiveLp& blp);

/// Lexicographic minimum: first `primary`, then `secondary` among the
/// primary-optimal points.
LpSolution solve_lexicographic(const LinearProgram& base, const std::vector<double>& primary,
                               const std::vector<double>& secondary);

/// Builds the recession cone of the feasible set: homogeneous rows and bounds
/// reduced to their sign restrictions.
LinearProgram recession_cone(const LinearProgram& base);

}  // namespace accmax
