#include "accmax/lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <functional>
#include <ostream>
#include <stdexcept>

namespace accmax {

std::size_t LinearProgram::add_variable(double lo, double up, double cost, std::string name) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(up);
    if (name.empty()) name = "x" + std::to_string(objective.size() - 1);
    names.push_back(std::move(name));
    return objective.size() - 1;
}

std::size_t LinearProgram::add_row(std::vector<Term> terms, Relation rel, double rhs, std::string name) {
    if (name.empty()) name = "c" + std::to_string(rows.size());
    rows.push_back({std::move(terms), rel, rhs, std::move(name)});
    return rows.size() - 1;
}

void LinearProgram::validate() const {
    const std::size_t n = n_vars();
    if (lower.size() != n || upper.size() != n) throw std::invalid_argument("lp: bound vectors have wrong size");
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j])
            throw std::invalid_argument("lp: inconsistent bounds on " + names[j]);
        if (!std::isfinite(objective[j])) throw std::invalid_argument("lp: non-finite cost on " + names[j]);
    }
    for (const auto& r : rows) {
        if (!std::isfinite(r.rhs)) throw std::invalid_argument("lp: non-finite rhs in row " + r.name);
        for (const auto& t : r.terms) {
            if (t.index >= n) throw std::invalid_argument("lp: row " + r.name + " references unknown variable");
            if (!std::isfinite(t.coef)) throw std::invalid_argument("lp: non-finite coefficient in row " + r.name);
        }
    }
}

double LinearProgram::evaluate_objective(const std::vector<double>& x) const {
    double z = offset;
    for (std::size_t j = 0; j < objective.size(); ++j) z += objective[j] * x[j];
    return z;
}

double LinearProgram::row_activity(std::size_t row, const std::vector<double>& x) const {
    double a = 0.0;
    for (const auto& t : rows[row].terms) a += t.coef * x[t.index];
    return a;
}

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::numerical_failure: return "numerical_failure";
    }
    return "?";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr int kDegenerateSwitch = 50;
// Bound slack the first ratio-test pass may use.
constexpr double kHarrisTol = 1e-11;

// Condensed tableau: basic variables x_B = beta - T x_N, one row per
// constraint, one column per nonbasic variable. Variables are numbered
// structurals first, then one logical r_i = a_i x per row, then artificials.
class Simplex {
public:
    explicit Simplex(const LinearProgram& lp) : lp_(lp) {}

    LpSolution run();

private:
    enum class Step { optimal, unbounded, failure, moved };

    void build();
    void compute_reduced_costs();
    Step iterate();
    void pivot(std::size_t r, std::size_t c);
    LpSolution finish(LpStatus status);

    double* row(std::size_t i) { return &tab_[i * nc_]; }

    const LinearProgram& lp_;
    std::size_t m_ = 0, n_ = 0, nc_ = 0, nvar_ = 0;
    std::vector<double> tab_;
    std::vector<double> d_;
    std::vector<double> lb_, ub_, cost_, x_;
    std::vector<std::size_t> basis_, nonbasic_;
    std::vector<long> col_of_;  // column for nonbasic vars, -1 - row for basic vars
    std::size_t n_art_ = 0;
    std::size_t iterations_ = 0, max_iterations_ = 0;
    int degenerate_run_ = 0;
    bool stalling_ = false;
    std::vector<double> ray_;
    std::vector<std::size_t> nz_;
    std::mt19937_64 rng_{0x5eed};
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

void Simplex::build() {
    m_ = lp_.n_rows();
    n_ = lp_.n_vars();

    // Initial nonbasic structural values.
    std::vector<double> xs(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        if (std::isfinite(lp_.lower[j])) xs[j] = lp_.lower[j];
        else if (std::isfinite(lp_.upper[j])) xs[j] = lp_.upper[j];
        else xs[j] = 0.0;
    }

    std::vector<double> act(m_, 0.0), rlb(m_), rub(m_);
    std::vector<int> sigma(m_, 0);
    for (std::size_t i = 0; i < m_; ++i) {
        const auto& r = lp_.rows[i];
        for (const auto& t : r.terms) act[i] += t.coef * xs[t.index];
        rlb[i] = r.relation == Relation::le ? -kInf : r.rhs;
        rub[i] = r.relation == Relation::ge ? kInf : r.rhs;
        if (act[i] < rlb[i] - kFeasTol) sigma[i] = 1;
        else if (act[i] > rub[i] + kFeasTol) sigma[i] = -1;
        if (sigma[i] != 0) ++n_art_;
    }

    nvar_ = n_ + m_ + n_art_;
    nc_ = n_ + n_art_;
    lb_.assign(nvar_, 0.0);
    ub_.assign(nvar_, 0.0);
    cost_.assign(nvar_, 0.0);
    x_.assign(nvar_, 0.0);
    col_of_.assign(nvar_, 0);
    basis_.assign(m_, 0);
    nonbasic_.clear();
    tab_.assign(m_ * nc_, 0.0);

    for (std::size_t j = 0; j < n_; ++j) {
        lb_[j] = lp_.lower[j];
        ub_[j] = lp_.upper[j];
        x_[j] = xs[j];
        col_of_[j] = static_cast<long>(nonbasic_.size());
        nonbasic_.push_back(j);
    }
    std::size_t art = n_ + m_;
    for (std::size_t i = 0; i < m_; ++i) {
        std::size_t logical = n_ + i;
        lb_[logical] = rlb[i];
        ub_[logical] = rub[i];
        double* ti = row(i);
        if (sigma[i] == 0) {
            basis_[i] = logical;
            col_of_[logical] = -1 - static_cast<long>(i);
            x_[logical] = act[i];
            for (const auto& t : lp_.rows[i].terms) ti[t.index] -= t.coef;
        } else {
            // art = sigma (r_i - a_i x) with r_i parked at its violated bound.
            double b = sigma[i] > 0 ? rlb[i] : rub[i];
            x_[logical] = b;
            std::size_t c = nonbasic_.size();
            col_of_[logical] = static_cast<long>(c);
            nonbasic_.push_back(logical);
            lb_[art] = 0.0;
            ub_[art] = kInf;
            cost_[art] = 1.0;
            x_[art] = sigma[i] * (b - act[i]);
            basis_[i] = art;
            col_of_[art] = -1 - static_cast<long>(i);
            for (const auto& t : lp_.rows[i].terms) ti[t.index] += sigma[i] * t.coef;
            ti[c] = -sigma[i];
            ++art;
        }
    }
    max_iterations_ = 50 * (m_ + nc_) + 10000;
}

void Simplex::compute_reduced_costs() {
    d_.assign(nc_, 0.0);
    for (std::size_t c = 0; c < nc_; ++c) d_[c] = cost_[nonbasic_[c]];
    for (std::size_t i = 0; i < m_; ++i) {
        double cb = cost_[basis_[i]];
        if (cb == 0.0) continue;
        const double* ti = row(i);
        for (std::size_t c = 0; c < nc_; ++c) d_[c] -= cb * ti[c];
    }
}

void Simplex::pivot(std::size_t r, std::size_t c) {
    double* tr = row(r);
    const double a = tr[c];
    const double inv = 1.0 / a;
    nz_.clear();
    for (std::size_t k = 0; k < nc_; ++k) {
        if (k == c) continue;
        if (tr[k] != 0.0) {
            tr[k] *= inv;
            nz_.push_back(k);
        }
    }
    tr[c] = inv;
    const bool sparse = nz_.size() * 3 < nc_;
    auto update = [&](double* ti) {
        const double f = ti[c];
        if (f == 0.0) return;
        if (sparse) {
            for (std::size_t k : nz_) ti[k] -= f * tr[k];
        } else {
            for (std::size_t k = 0; k < nc_; ++k) ti[k] -= f * tr[k];
        }
        ti[c] = -f * inv;
    };
    for (std::size_t i = 0; i < m_; ++i) {
        if (i != r) update(row(i));
    }
    update(d_.data());

    std::size_t entering = nonbasic_[c];
    std::size_t leaving = basis_[r];
    basis_[r] = entering;
    nonbasic_[c] = leaving;
    col_of_[entering] = -1 - static_cast<long>(r);
    col_of_[leaving] = static_cast<long>(c);
}

Simplex::Step Simplex::iterate() {
    // Pricing.
    std::size_t best_c = nc_;
    int dir = 0;
    double best = 0.0;
    for (std::size_t c = 0; c < nc_; ++c) {
        std::size_t v = nonbasic_[c];
        if (lb_[v] == ub_[v]) continue;
        double dc = d_[c];
        int cand = 0;
        if (dc < -kOptTol && x_[v] < ub_[v]) cand = 1;
        else if (dc > kOptTol && x_[v] > lb_[v]) cand = -1;
        if (cand == 0) continue;
        if (stalling_) {
            // Randomised choice among improving columns breaks long degenerate runs.
            double u = std::abs(dc) * (0.5 + 0.5 * unit_(rng_));
            if (u > best) {
                best = u;
                best_c = c;
                dir = cand;
            }
        } else if (std::abs(dc) > best) {
            best = std::abs(dc);
            best_c = c;
            dir = cand;
        }
    }
    if (best_c == nc_) return Step::optimal;
    const std::size_t c = best_c;
    const std::size_t ev = nonbasic_[c];

    // Harris two-pass ratio test.
    double theta_max = kInf;
    for (std::size_t i = 0; i < m_; ++i) {
        double alpha = -tab_[i * nc_ + c] * dir;
        if (std::abs(alpha) <= kPivotTol) continue;
        std::size_t bv = basis_[i];
        double lim;
        if (alpha < 0) {
            if (!std::isfinite(lb_[bv])) continue;
            lim = (x_[bv] - lb_[bv] + kHarrisTol) / -alpha;
        } else {
            if (!std::isfinite(ub_[bv])) continue;
            lim = (ub_[bv] - x_[bv] + kHarrisTol) / alpha;
        }
        theta_max = std::min(theta_max, lim);
    }
    const double flip = ub_[ev] - lb_[ev];
    if (!std::isfinite(theta_max) && !std::isfinite(flip)) {
        // A ray whose gain per unit length is below tolerance is noise from an
        // ill-conditioned column; price it out instead.
        double len = 1.0;
        for (std::size_t i = 0; i < m_; ++i) len = std::max(len, std::abs(tab_[i * nc_ + c]));
        if (std::abs(d_[c]) <= kOptTol * len) {
            d_[c] = 0.0;
            return Step::moved;
        }
        ray_.assign(n_, 0.0);
        if (ev < n_) ray_[ev] = dir;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) ray_[basis_[i]] = -tab_[i * nc_ + c] * dir;
        }
        return Step::unbounded;
    }
    std::size_t r = m_;
    double r_alpha = 0.0, r_theta = kInf;
    for (std::size_t i = 0; i < m_; ++i) {
        double alpha = -tab_[i * nc_ + c] * dir;
        if (std::abs(alpha) <= kPivotTol) continue;
        std::size_t bv = basis_[i];
        double ratio;
        if (alpha < 0) {
            if (!std::isfinite(lb_[bv])) continue;
            ratio = (x_[bv] - lb_[bv]) / -alpha;
        } else {
            if (!std::isfinite(ub_[bv])) continue;
            ratio = (ub_[bv] - x_[bv]) / alpha;
        }
        if (ratio > theta_max) continue;
        bool take;
        if (r == m_) take = true;
        else take = std::abs(alpha) > std::abs(r_alpha);
        if (take) {
            r = i;
            r_alpha = alpha;
            r_theta = ratio;
        }
    }

    if (std::isfinite(flip) && (r == m_ || flip <= r_theta)) {
        // Bound flip of the entering variable; no basis change.
        double theta = flip;
        x_[ev] = dir > 0 ? ub_[ev] : lb_[ev];
        for (std::size_t i = 0; i < m_; ++i) {
            double t = tab_[i * nc_ + c];
            if (t != 0.0) x_[basis_[i]] -= t * dir * theta;
        }
        degenerate_run_ = 0;
        stalling_ = false;
        return Step::moved;
    }
    if (r == m_) return Step::failure;

    double theta = std::max(0.0, r_theta);
    x_[ev] += dir * theta;
    if (theta != 0.0) {
        for (std::size_t i = 0; i < m_; ++i) {
            double t = tab_[i * nc_ + c];
            if (t != 0.0) x_[basis_[i]] -= t * dir * theta;
        }
    }
    std::size_t lv = basis_[r];
    x_[lv] = r_alpha < 0 ? lb_[lv] : ub_[lv];

    if (theta < 1e-12) {
        if (++degenerate_run_ >= kDegenerateSwitch) stalling_ = true;
    } else {
        degenerate_run_ = 0;
        stalling_ = false;
    }
    pivot(r, c);
    return Step::moved;
}

LpSolution Simplex::finish(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iterations_;
    sol.point.assign(x_.begin(), x_.begin() + static_cast<long>(n_));
    if (status == LpStatus::unbounded) sol.ray = ray_;
    if (status != LpStatus::optimal) {
        sol.value = status == LpStatus::unbounded ? -kInf : kInf;
        return sol;
    }
    sol.value = lp_.evaluate_objective(sol.point);
    sol.dual_point.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
        long cpos = col_of_[n_ + i];
        if (cpos >= 0) sol.dual_point[i] = d_[static_cast<std::size_t>(cpos)];
    }
    sol.reduced_costs.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        long cpos = col_of_[j];
        if (cpos >= 0) sol.reduced_costs[j] = d_[static_cast<std::size_t>(cpos)];
    }
    return sol;
}

LpSolution Simplex::run() {
    lp_.validate();
    build();

    if (n_art_ > 0) {
        compute_reduced_costs();
        while (true) {
            if (++iterations_ > max_iterations_) return finish(LpStatus::numerical_failure);
            Step s = iterate();
            if (s == Step::optimal) break;
            if (s == Step::failure) return finish(LpStatus::numerical_failure);
            if (s == Step::unbounded) return finish(LpStatus::numerical_failure);
        }
        double infeas = 0.0;
        for (std::size_t v = n_ + m_; v < nvar_; ++v) infeas += x_[v];
        if (infeas > kFeasTol) return finish(LpStatus::infeasible);
        for (std::size_t v = n_ + m_; v < nvar_; ++v) {
            ub_[v] = 0.0;
            cost_[v] = 0.0;
            if (col_of_[v] >= 0) x_[v] = 0.0;
        }
        degenerate_run_ = 0;
        stalling_ = false;
    }

    for (std::size_t j = 0; j < n_; ++j) cost_[j] = lp_.objective[j];
    compute_reduced_costs();
    while (true) {
        if (++iterations_ > max_iterations_) return finish(LpStatus::numerical_failure);
        Step s = iterate();
        if (s == Step::optimal) break;
        if (s == Step::failure) return finish(LpStatus::numerical_failure);
        if (s == Step::unbounded) return finish(LpStatus::unbounded);
    }
    LpSolution sol = finish(LpStatus::optimal);
    for (double v : sol.point) {
        if (!std::isfinite(v)) return finish(LpStatus::numerical_failure);
    }
    return sol;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    Simplex s(lp);
    return s.run();
}

std::optional<LpSolution> solve_lp_by_dual(const LinearProgram& lp) {
    lp.validate();
    const std::size_t m = lp.n_rows(), n = lp.n_vars();
    std::vector<std::vector<Term>> cols(n);
    for (std::size_t i = 0; i < m; ++i) {
        for (const auto& t : lp.rows[i].terms) {
            if (t.coef != 0.0) cols[t.index].push_back({i, t.coef});
        }
    }
    // Column singletons that are priced slacks of one inequality row.
    std::vector<long> slack_row(n, -1);
    std::vector<int> slacks_in_row(m, 0);
    for (std::size_t j = 0; j < n; ++j) {
        const bool nonneg = lp.lower[j] == 0.0 && std::isinf(lp.upper[j]);
        const bool free = std::isinf(lp.lower[j]) && lp.lower[j] < 0 && std::isinf(lp.upper[j]);
        if (!nonneg && !free) return std::nullopt;
        if (nonneg && cols[j].size() == 1 && lp.objective[j] > 0.0) {
            std::size_t i = cols[j][0].index;
            double a = cols[j][0].coef;
            Relation rel = lp.rows[i].relation;
            if ((rel == Relation::ge && a > 0.0) || (rel == Relation::le && a < 0.0)) {
                slack_row[j] = static_cast<long>(i);
                ++slacks_in_row[i];
            }
        }
    }
    for (int k : slacks_in_row) {
        if (k > 1) return std::nullopt;
    }

    // Dual: min -b.y, A_j . y <= c_j (x_j >= 0) or = c_j (free); y signed by row type.
    LinearProgram d;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& r = lp.rows[i];
        double lo = r.relation == Relation::ge ? 0.0 : -kInf;
        double up = r.relation == Relation::le ? 0.0 : kInf;
        d.add_variable(lo, up, -r.rhs);
    }
    std::vector<long> dual_row(n, -1);
    for (std::size_t j = 0; j < n; ++j) {
        if (slack_row[j] >= 0) {
            // a y_i <= c_j with a > 0 on a >= row, a < 0 on a <= row.
            auto i = static_cast<std::size_t>(slack_row[j]);
            double a = cols[j][0].coef, bound = lp.objective[j] / a;
            if (a > 0.0) d.upper[i] = std::min(d.upper[i], bound);
            else d.lower[i] = std::max(d.lower[i], bound);
            continue;
        }
        Relation rel = std::isinf(lp.lower[j]) ? Relation::eq : Relation::le;
        dual_row[j] = static_cast<long>(d.add_row(cols[j], rel, lp.objective[j]));
    }
    LpSolution ds = solve_lp(d);

    LpSolution sol;
    sol.iterations = ds.iterations;
    if (ds.status == LpStatus::unbounded) {
        sol.status = LpStatus::infeasible;
        sol.value = kInf;
        return sol;
    }
    if (ds.status == LpStatus::infeasible) {
        // Primal unbounded or infeasible; the primal simplex tells which.
        return std::nullopt;
    }
    if (!ds.optimal()) return std::nullopt;

    sol.point.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (dual_row[j] >= 0) sol.point[j] = -ds.dual_point[static_cast<std::size_t>(dual_row[j])];
    }
    // Slacks take the least value their row allows.
    for (std::size_t j = 0; j < n; ++j) {
        if (slack_row[j] < 0) continue;
        auto i = static_cast<std::size_t>(slack_row[j]);
        double a = cols[j][0].coef, rest = 0.0;
        for (const auto& t : lp.rows[i].terms) {
            if (t.index != j) rest += t.coef * sol.point[t.index];
        }
        sol.point[j] = std::max(0.0, (lp.rows[i].rhs - rest) / a);
    }
    sol.status = LpStatus::optimal;
    sol.value = lp.evaluate_objective(sol.point);
    sol.dual_point.assign(ds.point.begin(), ds.point.begin() + static_cast<long>(m));
    sol.reduced_costs = lp.objective;
    for (std::size_t i = 0; i < m; ++i) {
        for (const auto& t : lp.rows[i].terms) sol.reduced_costs[t.index] -= sol.dual_point[i] * t.coef;
    }
    return sol;
}

LpCertificate certify(const LinearProgram& lp, const LpSolution& sol) {
    LpCertificate cert;
    const auto& x = sol.point;
    for (std::size_t j = 0; j < lp.n_vars(); ++j) {
        cert.primal_residual = std::max(cert.primal_residual, lp.lower[j] - x[j]);
        cert.primal_residual = std::max(cert.primal_residual, x[j] - lp.upper[j]);
    }
    cert.dual_value = lp.offset;
    std::vector<double> rc = lp.objective;
    for (std::size_t i = 0; i < lp.n_rows(); ++i) {
        const auto& r = lp.rows[i];
        double a = lp.row_activity(i, x);
        double slack = a - r.rhs;
        if (r.relation != Relation::le) cert.primal_residual = std::max(cert.primal_residual, -slack);
        if (r.relation != Relation::ge) cert.primal_residual = std::max(cert.primal_residual, slack);
        double y = sol.dual_point.empty() ? 0.0 : sol.dual_point[i];
        if (r.relation == Relation::le) cert.dual_residual = std::max(cert.dual_residual, y);
        if (r.relation == Relation::ge) cert.dual_residual = std::max(cert.dual_residual, -y);
        cert.complementarity = std::max(cert.complementarity, std::abs(y * slack));
        cert.dual_value += y * r.rhs;
        for (const auto& t : r.terms) rc[t.index] -= y * t.coef;
    }
    for (std::size_t j = 0; j < lp.n_vars(); ++j) {
        const double lo = lp.lower[j], up = lp.upper[j];
        const double scale = 1.0 + std::abs(x[j]);
        const bool at_lo = std::isfinite(lo) && std::abs(x[j] - lo) <= kFeasTol * scale;
        const bool at_up = std::isfinite(up) && std::abs(x[j] - up) <= kFeasTol * scale;
        double viol = 0.0;
        if (at_lo && at_up) viol = 0.0;
        else if (at_lo) viol = std::max(0.0, -rc[j]);
        else if (at_up) viol = std::max(0.0, rc[j]);
        else viol = std::abs(rc[j]);
        cert.dual_residual = std::max(cert.dual_residual, viol);
        double bound = at_lo ? lo : (at_up ? up : x[j]);
        cert.dual_value += rc[j] * bound;
        if (!at_lo && !at_up) {
            double dist = 1.0;
            if (std::isfinite(lo)) dist = std::min(dist, x[j] - lo);
            if (std::isfinite(up)) dist = std::min(dist, up - x[j]);
            cert.complementarity = std::max(cert.complementarity, std::abs(rc[j]) * dist);
        }
    }
    cert.gap = sol.value - cert.dual_value;
    return cert;
}

void write_lp_format(const LinearProgram& lp, std::ostream& out) {
    auto term = [&](double coef, std::size_t j, bool first) {
        if (coef >= 0 && !first) out << " + ";
        else if (coef < 0) out << (first ? "- " : " - ");
        out << std::abs(coef) << ' ' << lp.names[j];
    };
    out << "Minimize\n obj: ";
    bool first = true;
    for (std::size_t j = 0; j < lp.n_vars(); ++j) {
        if (lp.objective[j] == 0.0) continue;
        term(lp.objective[j], j, first);
        first = false;
    }
    if (first) out << "0 " << (lp.n_vars() ? lp.names[0] : "x0");
    if (lp.offset != 0.0) out << (lp.offset >= 0 ? " + " : " - ") << std::abs(lp.offset);
    out << "\nSubject To\n";
    for (const auto& r : lp.rows) {
        out << ' ' << r.name << ": ";
        bool f = true;
        for (const auto& t : r.terms) {
            term(t.coef, t.index, f);
            f = false;
        }
        if (f) out << "0 " << (lp.n_vars() ? lp.names[0] : "x0");
        const char* rel = r.relation == Relation::le ? " <= " : (r.relation == Relation::ge ? " >= " : " = ");
        out << rel << r.rhs << '\n';
    }
    out << "Bounds\n";
    for (std::size_t j = 0; j < lp.n_vars(); ++j) {
        const double lo = lp.lower[j], up = lp.upper[j];
        out << ' ';
        if (!std::isfinite(lo) && !std::isfinite(up)) out << lp.names[j] << " free";
        else if (lo == up) out << lp.names[j] << " = " << lo;
        else {
            if (std::isfinite(lo)) out << lo;
            else out << "-inf";
            out << " <= " << lp.names[j] << " <= ";
            if (std::isfinite(up)) out << up;
            else out << "+inf";
        }
        out << '\n';
    }
    out << "End\n";
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<Term> dense_terms(const std::vector<double>& c) {
    std::vector<Term> t;
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (c[j] != 0.0) t.push_back({j, c[j]});
    }
    return t;
}

LpSolution solve_with_objective(LinearProgram lp, const std::vector<double>& c) {
    lp.objective = c;
    lp.offset = 0.0;
    return solve_lp(lp);
}

}  // namespace

LpSolution solve_lexicographic(const LinearProgram& base, const std::vector<double>& primary,
                               const std::vector<double>& secondary) {
    LpSolution first = solve_with_objective(base, primary);
    if (!first.optimal()) return first;
    // The primary-optimal face: complementary slackness against the duals found.
    LinearProgram face = base;
    for (std::size_t j = 0; j < face.n_vars(); ++j) {
        const double rc = first.reduced_costs[j];
        if (rc > kOptTol && std::isfinite(face.lower[j])) face.upper[j] = face.lower[j];
        else if (rc < -kOptTol && std::isfinite(face.upper[j])) face.lower[j] = face.upper[j];
    }
    for (std::size_t i = 0; i < face.n_rows(); ++i) {
        if (std::abs(first.dual_point[i]) > kOptTol) face.rows[i].relation = Relation::eq;
    }
    LpSolution second = solve_with_objective(std::move(face), secondary);
    if (!second.optimal()) {
        LinearProgram lp = base;
        const double v = dot(primary, first.point);
        lp.add_row(dense_terms(primary), Relation::le, v + 1e-9 * std::max(1.0, std::abs(v)), "lex");
        second = solve_with_objective(std::move(lp), secondary);
        if (!second.optimal()) return first;
    }
    second.dual_point.resize(base.n_rows());
    return second;
}

LinearProgram recession_cone(const LinearProgram& base) {
    LinearProgram cone = base;
    for (std::size_t j = 0; j < cone.n_vars(); ++j) {
        const bool lo = std::isfinite(base.lower[j]);
        const bool up = std::isfinite(base.upper[j]);
        cone.lower[j] = lo ? 0.0 : -kInf;
        cone.upper[j] = up ? 0.0 : kInf;
    }
    for (auto& r : cone.rows) r.rhs = 0.0;
    cone.offset = 0.0;
    return cone;
}

BiObjectiveResult solve_biobjective(const BiObjectiveLp& blp) {
    const auto& base = blp.base;
    if (blp.f1.size() != base.n_vars() || blp.f2.size() != base.n_vars())
        throw std::invalid_argument("solve_biobjective: objective width mismatch");

    BiObjectiveResult res;
    auto make_vertex = [&](const LpSolution& s) {
        return BiVertex{dot(blp.f1, s.point) + blp.f1_offset, dot(blp.f2, s.point) + blp.f2_offset, s.point};
    };
    auto weighted = [&](double w1, double w2) {
        std::vector<double> c(base.n_vars());
        for (std::size_t j = 0; j < c.size(); ++j) c[j] = w1 * blp.f1[j] + w2 * blp.f2[j];
        return c;
    };

    LpSolution q = solve_lexicographic(base, blp.f2, blp.f1);
    res.lp_solves += 2;
    if (!q.optimal()) {
        res.status = q.status;
        return res;
    }
    BiVertex Q = make_vertex(q);

    LpSolution p1 = solve_with_objective(base, blp.f1);
    res.lp_solves += 1;
    BiVertex P;
    if (p1.status == LpStatus::unbounded) {
        LinearProgram cone = recession_cone(base);
        cone.add_row(dense_terms(blp.f1), Relation::le, -1.0, "ray_norm");
        LpSolution rs = solve_with_objective(std::move(cone), blp.f2);
        res.lp_solves += 1;
        if (!rs.optimal()) {
            res.status = rs.status == LpStatus::unbounded ? LpStatus::unbounded : LpStatus::numerical_failure;
            return res;
        }
        const double slope = rs.value;
        LpSolution ps = solve_lexicographic(base, weighted(slope, 1.0), blp.f2);
        res.lp_solves += 2;
        if (!ps.optimal()) {
            res.status = LpStatus::numerical_failure;
            return res;
        }
        P = make_vertex(ps);
        res.ray = std::make_pair(-1.0, slope);
    } else if (p1.optimal()) {
        LpSolution ps = solve_lexicographic(base, blp.f1, blp.f2);
        res.lp_solves += 2;
        P = make_vertex(ps);
    } else {
        res.status = p1.status;
        return res;
    }

    std::vector<BiVertex> out;
    out.push_back(Q);
    std::function<void(const BiVertex&, const BiVertex&)> recurse = [&](const BiVertex& A, const BiVertex& B) {
        double l1 = B.f2 - A.f2;
        double l2 = A.f1 - B.f1;
        if (l1 <= 1e-12 || l2 <= 1e-12) return;
        double s = l1 + l2;
        l1 /= s;
        l2 /= s;
        LpSolution sol = solve_with_objective(base, weighted(l1, l2));
        res.lp_solves += 1;
        if (!sol.optimal()) return;
        BiVertex N = make_vertex(sol);
        double chord = l1 * A.f1 + l2 * A.f2;
        double val = l1 * N.f1 + l2 * N.f2;
        if (val < chord - 1e-9) {
            recurse(A, N);
            out.push_back(N);
            recurse(N, B);
        }
    };
    recurse(Q, P);
    out.push_back(P);

    // Drop duplicates and collinear interior points.
    std::vector<BiVertex> clean;
    for (auto& v : out) {
        if (!clean.empty()) {
            const auto& b = clean.back();
            if (std::abs(v.f1 - b.f1) <= 1e-9 * (1 + std::abs(b.f1)) &&
                std::abs(v.f2 - b.f2) <= 1e-9 * (1 + std::abs(b.f2)))
                continue;
        }
        clean.push_back(std::move(v));
    }
    std::vector<BiVertex> hull;
    for (auto& v : clean) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull.back();
            double cross = (b.f1 - a.f1) * (v.f2 - a.f2) - (b.f2 - a.f2) * (v.f1 - a.f1);
            double scale = std::hypot(b.f1 - a.f1, b.f2 - a.f2) * std::hypot(v.f1 - a.f1, v.f2 - a.f2);
            if (std::abs(cross) <= 1e-9 * std::max(scale, 1e-300)) hull.pop_back();
            else break;
        }
        hull.push_back(std::move(v));
    }
    res.vertices = std::move(hull);
    return res;
}

}  // namespace accmax
