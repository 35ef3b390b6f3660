#include "accmax/bisect.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "accmax/acceptability.hpp"

namespace accmax {

const char* to_string(Variant v) {
    switch (v) {
        case Variant::original: return "original";
        case Variant::modified: return "modified";
        case Variant::mixed: return "mixed";
        case Variant::zero_level: return "zero_level";
    }
    return "?";
}

Variant variant_from_string(const std::string& s) {
    if (s == "original") return Variant::original;
    if (s == "modified") return Variant::modified;
    if (s == "mixed") return Variant::mixed;
    if (s == "zero_level" || s == "zero-level") return Variant::zero_level;
    throw std::invalid_argument("unknown variant '" + s + "'");
}

const char* to_string(BisectStatus s) {
    switch (s) {
        case BisectStatus::bracketed: return "bracketed";
        case BisectStatus::below_lower_range: return "below_lower_range";
        case BisectStatus::above_upper_range: return "above_upper_range";
    }
    return "?";
}

void BisectionConfig::validate() const {
    if (!(x0 > 0.0) || !std::isfinite(x0)) throw std::invalid_argument("bisect: x0 must be positive and finite");
    if (!(epsilon > 0.0)) throw std::invalid_argument("bisect: epsilon must be positive");
    if (max_iterations < 1) throw std::invalid_argument("bisect: max_iterations must be at least 1");
    if (!(sign_tolerance >= 0.0)) throw std::invalid_argument("bisect: sign tolerance must be nonnegative");
}

int predict_step2_bound(const BisectionConfig& cfg) {
    double v = std::log2(cfg.x0 / cfg.epsilon) + cfg.max_iterations - 2;
    // Guard against log2 rounding pushing an exact integer over.
    double r = std::round(v);
    int out = std::abs(v - r) < 1e-12 ? static_cast<int>(r) : static_cast<int>(std::ceil(v));
    return std::max(out, 0);
}

std::pair<double, double> guard_interval(const BisectionConfig& cfg) {
    return {std::ldexp(cfg.x0, 1 - cfg.max_iterations), std::ldexp(cfg.x0, cfg.max_iterations - 1)};
}

namespace {

class Runner {
public:
    Runner(const RiskFamilySpec& spec, const ScenarioModel& model, bool shortselling, const BisectionConfig& cfg)
        : spec_(spec), model_(model), shortselling_(shortselling), cfg_(cfg) {}

    BisectionTrace run();

private:
    // Solves the risk minimisation at x (or at inner level q when given).
    TraceRow probe(double x, std::optional<double> q);
    void accept_lower(const TraceRow& row);
    void run_original_step1();
    void run_level_step1();
    void halve_on_x(int first_iter);
    void halve_on_level();
    bool wide() const { return !(x_U_ - x_L_ < cfg_.epsilon); }

    const RiskFamilySpec& spec_;
    const ScenarioModel& model_;
    bool shortselling_;
    const BisectionConfig& cfg_;
    BisectionTrace trace_;
    double x_L_ = 0.0, x_U_ = kInf;
    double q_L_ = 0.0, q_U_ = 0.0;
};

TraceRow Runner::probe(double x, std::optional<double> q) {
    TraceRow row;
    row.x_L = x_L_;
    row.x_U = x_U_;
    row.x = x;
    MinRiskLp lp = q ? build_minrisk_lp_at_level(spec_, model_, *q, shortselling_)
                     : build_minrisk_lp(spec_, model_, x, shortselling_);
    MinRiskResult res = solve_minrisk(lp);
    ++trace_.lp_solves;
    if (res.status == LpStatus::unbounded)
        throw std::runtime_error("bisect: risk minimisation unbounded; feasible set is not compact");
    if (res.status != LpStatus::optimal)
        throw std::runtime_error(std::string("bisect: risk minimisation failed (") + to_string(res.status) + ")");
    row.q = q ? *q : std::numeric_limits<double>::quiet_NaN();
    row.value = res.value;
    row.positive = res.value > cfg_.sign_tolerance;
    row.weights = res.weights;
    if (cfg_.variant == Variant::zero_level) {
        PnlVector d = pnl_of_allocation(model_, res.weights);
        row.zero_level = level_of_zero_risk(spec_, model_, d);
    }
    return row;
}

void Runner::accept_lower(const TraceRow& row) {
    x_L_ = row.x;
    if (cfg_.variant == Variant::zero_level && row.zero_level > x_L_) x_L_ = row.zero_level;
    trace_.epsilon_solution = row.weights;
}

void Runner::run_original_step1() {
    int n = 0;
    double x = cfg_.x0;
    while ((x_L_ == 0.0 || std::isinf(x_U_)) && n < cfg_.max_iterations) {
        TraceRow row = probe(x, std::nullopt);
        row.phase = 1;
        row.iter = n + 1;
        if (row.positive) {
            x_U_ = x;
            x = x_U_ / 2.0;
        } else {
            accept_lower(row);
            x = 2.0 * x_L_;
        }
        trace_.step1_rows.push_back(std::move(row));
        ++n;
        if (std::isinf(x_L_)) break;
    }
}

void Runner::halve_on_x(int first_iter) {
    int k = first_iter;
    while (wide() && k - first_iter < cfg_.step2_cap) {
        double x = 0.5 * (x_L_ + x_U_);
        if (!(x > x_L_ && x < x_U_)) break;
        TraceRow row = probe(x, std::nullopt);
        row.phase = 2;
        row.iter = k++;
        if (row.positive) x_U_ = x;
        else accept_lower(row);
        trace_.step2_rows.push_back(std::move(row));
    }
}

void Runner::run_level_step1() {
    // Endpoint checks at x = infinity (q = 0) and x = 0 (q = q_max).
    q_L_ = 0.0;
    q_U_ = spec_.max_level();
    TraceRow top = probe(kInf, 0.0);
    top.phase = 1;
    top.q_L = top.q_U = std::numeric_limits<double>::quiet_NaN();
    bool top_positive = top.positive;
    if (!top_positive) {
        x_L_ = kInf;
        trace_.epsilon_solution = top.weights;
    }
    trace_.step1_rows.push_back(top);
    if (!top_positive) return;
    x_U_ = kInf;

    TraceRow bottom = probe(0.0, q_U_);
    bottom.phase = 1;
    bool bottom_positive = bottom.positive;
    if (!bottom_positive) trace_.epsilon_solution = bottom.weights;
    trace_.step1_rows.push_back(bottom);
    if (bottom_positive) x_U_ = 0.0;
}

void Runner::halve_on_level() {
    int k = 1;
    while (wide() && k <= cfg_.step2_cap) {
        if (cfg_.variant == Variant::mixed && std::isfinite(x_U_)) {
            halve_on_x(k);
            return;
        }
        double q = 0.5 * (q_L_ + q_U_);
        if (!(q > q_L_ && q < q_U_)) break;
        double x = spec_.x_of_level(q);
        TraceRow row = probe(x, q);
        row.phase = 2;
        row.iter = k++;
        row.q_L = q_L_;
        row.q_U = q_U_;
        if (row.positive) {
            x_U_ = x;
            q_L_ = q;
        } else {
            accept_lower(row);
            q_U_ = q;
        }
        trace_.step2_rows.push_back(std::move(row));
    }
}

BisectionTrace Runner::run() {
    cfg_.validate();
    if (cfg_.variant == Variant::original || cfg_.variant == Variant::zero_level) {
        run_original_step1();
        if (x_L_ == 0.0) {
            trace_.status = BisectStatus::below_lower_range;
        } else if (std::isinf(x_U_)) {
            trace_.status = BisectStatus::above_upper_range;
        } else {
            halve_on_x(1);
        }
    } else {
        run_level_step1();
        if (std::isinf(x_L_)) {
            trace_.status = BisectStatus::above_upper_range;
        } else if (x_U_ == 0.0) {
            trace_.status = BisectStatus::below_lower_range;
        } else {
            halve_on_level();
        }
    }
    trace_.x_L = x_L_;
    trace_.x_U = x_U_;
    return std::move(trace_);
}

std::string num(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

std::string short_num(double v, int prec = 4) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(prec + 1) << v;
    return os.str();
}

}  // namespace

BisectionTrace maximize(const RiskFamilySpec& spec, const ScenarioModel& model, bool shortselling,
                        const BisectionConfig& cfg) {
    Runner r(spec, model, shortselling, cfg);
    return r.run();
}

void write_trace_csv(const BisectionTrace& trace, std::ostream& out) {
    out << "phase,iter,x_L,x_U,x,q,sign,zero_level_y\n";
    auto emit = [&](const TraceRow& r) {
        out << r.phase << ',' << r.iter << ',' << num(r.x_L) << ',' << num(r.x_U) << ',' << num(r.x) << ','
            << num(r.q) << ',' << (r.positive ? '+' : '-') << ',' << num(r.zero_level) << '\n';
    };
    for (const auto& r : trace.step1_rows) emit(r);
    for (const auto& r : trace.step2_rows) emit(r);
    out << "final,," << num(trace.x_L) << ',' << num(trace.x_U) << ",,," << to_string(trace.status) << ",\n";
}

void write_trace_table(const BisectionTrace& trace, std::ostream& out) {
    auto line = [&](const TraceRow& r) {
        out << std::setw(5) << (r.iter ? std::to_string(r.iter) : std::string()) << std::setw(11) << short_num(r.x_L)
            << std::setw(11) << short_num(r.x_U) << std::setw(11) << short_num(r.x);
        if (!std::isnan(r.q)) out << std::setw(9) << short_num(r.q);
        if (!std::isnan(r.zero_level)) out << std::setw(9) << short_num(r.zero_level);
        out << "  " << (r.positive ? '+' : '-') << '\n';
    };
    out << "Step 1\n";
    for (const auto& r : trace.step1_rows) line(r);
    out << "Step 2\n";
    if (trace.step2_rows.empty()) out << "  (none)\n";
    for (const auto& r : trace.step2_rows) line(r);
    out << std::fixed << std::setprecision(5) << "interval [" << trace.x_L << ", " << trace.x_U << "]  "
        << to_string(trace.status) << '\n';
    if (trace.epsilon_solution) {
        out << "h_eps = (";
        for (std::size_t j = 0; j < trace.epsilon_solution->size(); ++j)
            out << (j ? ", " : "") << std::setprecision(2) << 100.0 * (*trace.epsilon_solution)[j] << "%";
        out << ")\n";
    }
    out.unsetf(std::ios::fixed);
}

}  // namespace accmax
