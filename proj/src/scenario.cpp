#include "accmax/scenario.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace accmax {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        auto b = field.find_first_not_of(" \t\r");
        auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, std::size_t row, std::size_t col) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
        throw InputError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                         ": not a number: '" + s + "'");
    }
    return v;
}

}  // namespace

ScenarioModel::ScenarioModel(std::vector<double> probabilities,
                             std::vector<std::vector<double>> returns,
                             std::vector<std::string> asset_names)
    : probabilities_(std::move(probabilities)),
      returns_(std::move(returns)),
      asset_names_(std::move(asset_names)) {
    if (probabilities_.empty()) throw InputError("model has no states");
    if (returns_.empty()) throw InputError("model has no assets");
    double sum = 0.0;
    for (std::size_t w = 0; w < probabilities_.size(); ++w) {
        double p = probabilities_[w];
        if (!(p > 0.0) || p > 1.0) {
            throw InputError("state " + std::to_string(w + 1) + ": probability " + fmt_double(p) +
                             " outside (0,1]");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "probabilities sum to " << std::setprecision(12) << sum;
        throw InputError(os.str());
    }
    for (std::size_t j = 0; j < returns_.size(); ++j) {
        if (returns_[j].size() != probabilities_.size()) {
            throw InputError("asset " + std::to_string(j + 1) + " has " +
                             std::to_string(returns_[j].size()) + " returns, expected " +
                             std::to_string(probabilities_.size()));
        }
        for (std::size_t w = 0; w < returns_[j].size(); ++w) {
            double r = returns_[j][w];
            if (!(r > 0.0) || !std::isfinite(r)) {
                throw InputError("row " + std::to_string(w + 1) + ", column " +
                                 std::to_string(j + 3) + ": non-positive return " +
                                 fmt_double(r));
            }
        }
    }
    if (asset_names_.empty()) {
        for (std::size_t j = 0; j < returns_.size(); ++j)
            asset_names_.push_back("a" + std::to_string(j + 1));
    } else if (asset_names_.size() != returns_.size()) {
        throw InputError("asset name count does not match asset count");
    }
}

double ScenarioModel::portfolio_return(std::span<const double> weights, std::size_t state) const {
    double r = 0.0;
    for (std::size_t j = 0; j < returns_.size(); ++j) r += weights[j] * returns_[j][state];
    return r;
}

double ScenarioModel::expectation(std::span<const double> values) const {
    double e = 0.0;
    for (std::size_t w = 0; w < probabilities_.size(); ++w) e += probabilities_[w] * values[w];
    return e;
}

ScenarioModel toy_market() {
    return ScenarioModel({0.25, 0.25, 0.25, 0.25},
                         {{1.04, 1.045, 0.98, 0.985}, {1.045, 0.975, 1.055, 0.98}},
                         {"asset1", "asset2"});
}

ScenarioFormat format_from_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".json") return ScenarioFormat::json;
    return ScenarioFormat::csv;
}

ScenarioModel parse_scenarios_csv(std::istream& in) {
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") != std::string::npos) break;
    }
    header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "state" || header[1] != "prob") {
        throw InputError("row 1: expected header 'state,prob,r_<asset>,...'");
    }
    std::vector<std::string> names;
    for (std::size_t c = 2; c < header.size(); ++c) {
        const auto& h = header[c];
        names.push_back(h.rfind("r_", 0) == 0 ? h.substr(2) : h);
    }
    std::vector<double> probs;
    std::vector<std::vector<double>> returns(names.size());
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw InputError("row " + std::to_string(row) + ": expected " +
                             std::to_string(header.size()) + " columns, found " +
                             std::to_string(fields.size()));
        }
        double p = parse_number(fields[1], row, 2);
        if (!(p > 0.0)) {
            throw InputError("row " + std::to_string(row) + ", column 2: non-positive probability");
        }
        probs.push_back(p);
        for (std::size_t c = 2; c < fields.size(); ++c) {
            double r = parse_number(fields[c], row, c + 1);
            if (!(r > 0.0)) {
                throw InputError("row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                                 ": non-positive return " + fields[c]);
            }
            returns[c - 2].push_back(r);
        }
    }
    if (probs.empty()) throw InputError("no state rows");
    return ScenarioModel(std::move(probs), std::move(returns), std::move(names));
}

ScenarioModel parse_scenarios_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("json parse error: ") + e.what());
    }
    try {
        auto probs = j.at("probabilities").get<std::vector<double>>();
        auto returns = j.at("returns").get<std::vector<std::vector<double>>>();
        std::vector<std::string> names;
        if (j.contains("asset_names")) names = j.at("asset_names").get<std::vector<std::string>>();
        return ScenarioModel(std::move(probs), std::move(returns), std::move(names));
    } catch (const json::exception& e) {
        throw InputError(std::string("json schema error: ") + e.what());
    }
}

ScenarioModel load_scenarios(const std::filesystem::path& path, ScenarioFormat format) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    if (format == ScenarioFormat::csv) return parse_scenarios_csv(in);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenarios_json(buf.str());
}

ScenarioModel load_scenarios(const std::filesystem::path& path) {
    return load_scenarios(path, format_from_path(path));
}

void write_scenarios_csv(const ScenarioModel& model, std::ostream& out) {
    out << "state,prob";
    for (const auto& n : model.asset_names()) out << ",r_" << n;
    out << '\n';
    for (std::size_t w = 0; w < model.n_states(); ++w) {
        out << (w + 1) << ',' << fmt_double(model.probability(w));
        for (std::size_t j = 0; j < model.n_assets(); ++j)
            out << ',' << fmt_double(model.gross_return(j, w));
        out << '\n';
    }
}

std::string scenarios_to_json(const ScenarioModel& model) {
    json j;
    j["n_states"] = model.n_states();
    j["n_assets"] = model.n_assets();
    j["probabilities"] = model.probabilities();
    j["returns"] = model.returns();
    j["asset_names"] = model.asset_names();
    return j.dump(2);
}

void save_scenarios(const ScenarioModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    if (format_from_path(path) == ScenarioFormat::json) {
        out << scenarios_to_json(model) << '\n';
    } else {
        write_scenarios_csv(model, out);
    }
}

ScenarioModel generate_student_t(const StudentTParams& params) {
    const std::size_t d = params.n_assets;
    const std::size_t n = params.n_states;
    if (d == 0 || n == 0) throw std::invalid_argument("generate_student_t: empty model requested");
    if (!(params.dof > 2.0)) throw std::invalid_argument("generate_student_t: dof must exceed 2");

    Eigen::VectorXd mu = Eigen::VectorXd::Constant(d, 1.002);
    if (!params.location.empty()) {
        if (params.location.size() != d)
            throw std::invalid_argument("generate_student_t: location has wrong size");
        mu = Eigen::Map<const Eigen::VectorXd>(params.location.data(), d);
    }
    Eigen::MatrixXd scale = 0.0004 * Eigen::MatrixXd::Identity(d, d);
    if (!params.scale.empty()) {
        if (params.scale.size() != d * d)
            throw std::invalid_argument("generate_student_t: scale has wrong size");
        scale = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            params.scale.data(), d, d);
    }
    if (!scale.isApprox(scale.transpose(), 1e-12))
        throw std::invalid_argument("generate_student_t: scale matrix is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(scale);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("generate_student_t: scale matrix is not positive definite");
    Eigen::MatrixXd L = llt.matrixL();

    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::chi_squared_distribution<double> chi2(params.dof);

    std::vector<std::vector<double>> returns(d, std::vector<double>(n));
    Eigen::VectorXd z(d);
    for (std::size_t w = 0; w < n; ++w) {
        for (std::size_t j = 0; j < d; ++j) z[j] = normal(rng);
        double s = std::sqrt(params.dof / chi2(rng));
        Eigen::VectorXd x = mu + s * (L * z);
        for (std::size_t j = 0; j < d; ++j) returns[j][w] = std::max(x[j], params.floor);
    }
    std::vector<double> probs(n, 1.0 / static_cast<double>(n));
    // Renormalise the last entry so the sum is exact in floating point.
    double head = 0.0;
    for (std::size_t w = 0; w + 1 < n; ++w) head += probs[w];
    probs[n - 1] = 1.0 - head;
    return ScenarioModel(std::move(probs), std::move(returns));
}

PnlVector pnl_of_weights(const ScenarioModel& model, std::span<const double> weights,
                         bool shortselling) {
    if (weights.size() != model.n_assets())
        throw std::invalid_argument("pnl_of_weights: weight vector has wrong size");
    double sum = 0.0;
    for (double h : weights) {
        if (!shortselling && h < -1e-12)
            throw std::invalid_argument("pnl_of_weights: negative weight without shortselling");
        sum += h;
    }
    if (std::abs(sum - 1.0) > 1e-10) {
        throw std::invalid_argument("pnl_of_weights: weights sum to " + fmt_double(sum));
    }
    PnlVector out;
    out.values.resize(model.n_states());
    for (std::size_t w = 0; w < model.n_states(); ++w)
        out.values[w] = model.portfolio_return(weights, w) - 1.0;
    return out;
}

PnlVector pnl_of_allocation(const ScenarioModel& model, std::span<const double> weights) {
    if (weights.size() != model.n_assets())
        throw std::invalid_argument("pnl_of_allocation: weight vector has wrong size");
    PnlVector out;
    out.values.resize(model.n_states());
    for (std::size_t w = 0; w < model.n_states(); ++w)
        out.values[w] = model.portfolio_return(weights, w) - 1.0;
    return out;
}

TreeModel::TreeModel(int horizon, ScenarioModel step) : horizon_(horizon), step_(std::move(step)) {
    if (horizon_ < 1) throw std::invalid_argument("tree horizon must be at least 1");
    double leaves = std::pow(static_cast<double>(step_.n_states()), horizon_);
    if (leaves > 1e8) throw std::invalid_argument("tree too large");
}

const ScenarioModel& TreeModel::step_at(NodeId node) const {
    auto it = overrides_.find(node);
    return it == overrides_.end() ? step_ : it->second;
}

void TreeModel::override_step(NodeId node, ScenarioModel model) {
    if (node >= nonterminal_count()) throw std::out_of_range("override_step: not an inner node");
    if (model.n_states() != step_.n_states() || model.n_assets() != step_.n_assets())
        throw std::invalid_argument("override_step: shape mismatch");
    overrides_.insert_or_assign(node, std::move(model));
}

std::size_t TreeModel::nodes_at(int depth) const {
    std::size_t n = 1;
    for (int t = 0; t < depth; ++t) n *= branching();
    return n;
}

std::size_t TreeModel::level_offset(int depth) const {
    std::size_t off = 0, width = 1;
    for (int t = 0; t < depth; ++t) {
        off += width;
        width *= branching();
    }
    return off;
}

int TreeModel::depth(NodeId node) const {
    std::size_t off = 0, width = 1;
    for (int t = 0; t <= horizon_; ++t) {
        if (node < off + width) return t;
        off += width;
        width *= branching();
    }
    throw std::out_of_range("node id " + std::to_string(node) + " outside tree");
}

NodeId TreeModel::child(NodeId node, std::size_t branch) const {
    int t = depth(node);
    if (t >= horizon_) throw std::out_of_range("leaf has no children");
    if (branch >= branching()) throw std::out_of_range("branch index out of range");
    return level_offset(t + 1) + (node - level_offset(t)) * branching() + branch;
}

NodeId TreeModel::parent(NodeId node) const {
    int t = depth(node);
    if (t == 0) throw std::out_of_range("root has no parent");
    return level_offset(t - 1) + (node - level_offset(t)) / branching();
}

std::size_t TreeModel::branch_of(NodeId node) const {
    int t = depth(node);
    if (t == 0) throw std::out_of_range("root has no branch index");
    return (node - level_offset(t)) % branching();
}

std::vector<std::size_t> TreeModel::path(NodeId node) const {
    int t = depth(node);
    std::vector<std::size_t> out(static_cast<std::size_t>(t));
    std::size_t idx = node - level_offset(t);
    for (int k = t - 1; k >= 0; --k) {
        out[static_cast<std::size_t>(k)] = idx % branching();
        idx /= branching();
    }
    return out;
}

NodeId TreeModel::node_from_path(std::span<const std::size_t> p) const {
    if (p.size() > static_cast<std::size_t>(horizon_)) throw std::out_of_range("path longer than horizon");
    NodeId n = root();
    for (auto b : p) n = child(n, b);
    return n;
}

std::string TreeModel::address(NodeId node) const {
    auto p = path(node);
    std::string s;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (k) s += '.';
        s += std::to_string(p[k]);
    }
    return s;
}

NodeId TreeModel::node_from_address(const std::string& address) const {
    std::vector<std::size_t> p;
    if (!address.empty()) {
        std::istringstream ss(address);
        std::string part;
        while (std::getline(ss, part, '.')) {
            std::size_t used = 0;
            unsigned long v = 0;
            try {
                v = std::stoul(part, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != part.size())
                throw InputError("bad node address '" + address + "'");
            p.push_back(v);
        }
    }
    try {
        return node_from_path(p);
    } catch (const std::out_of_range&) {
        throw InputError("node address '" + address + "' outside tree");
    }
}

double TreeModel::path_probability(NodeId node) const {
    return conditional_probability(root(), node);
}

double TreeModel::conditional_probability(NodeId ancestor, NodeId descendant) const {
    double p = 1.0;
    NodeId n = descendant;
    int ta = depth(ancestor);
    while (depth(n) > ta) {
        NodeId par = parent(n);
        p *= step_at(par).probability(branch_of(n));
        n = par;
    }
    if (n != ancestor) throw std::invalid_argument("conditional_probability: not an ancestor");
    return p;
}

std::vector<NodeId> TreeModel::leaves_under(NodeId node) const {
    int t = depth(node);
    std::size_t span = nodes_at(horizon_ - t);
    std::size_t first = level_offset(horizon_) + (node - level_offset(t)) * span;
    std::vector<NodeId> out(span);
    std::iota(out.begin(), out.end(), first);
    return out;
}

TreeModel parse_tree_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("json parse error: ") + e.what());
    }
    if (!j.contains("horizon") || !j.contains("step")) throw InputError("tree spec needs 'horizon' and 'step'");
    int horizon = j.at("horizon").get<int>();
    return TreeModel(horizon, parse_scenarios_json(j.at("step").dump()));
}

TreeModel load_tree(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_tree_json(buf.str());
}

std::string tree_to_json(const TreeModel& tree) {
    json j;
    j["horizon"] = tree.horizon();
    j["step"] = json::parse(scenarios_to_json(tree.step()));
    return j.dump(2);
}

}  // namespace accmax
