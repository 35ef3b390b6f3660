// accmax: command-line front end.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "accmax/acceptability.hpp"
#include "accmax/bisect.hpp"
#include "accmax/frontier.hpp"
#include "accmax/recursive.hpp"
#include "accmax/report.hpp"
#include "accmax/risk.hpp"
#include "accmax/scenario.hpp"
#include "json.hpp"

using namespace accmax;

namespace {

struct Failure : std::runtime_error {
    Failure(std::string module, const std::string& msg) : std::runtime_error(msg), module(std::move(module)) {}
    std::string module;
};

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure("io", "cannot open '" + path + "' for writing");
    body(out);
    out.flush();
    if (!out) throw Failure("io", "write to '" + path + "' failed");
}

std::string fmt(double x, int prec = 10) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s << std::setprecision(prec) << x;
    return s.str();
}

std::string full(double x) { return fmt(x, 17); }

std::string percent(const std::vector<double>& w) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << '(';
    for (std::size_t j = 0; j < w.size(); ++j) s << (j ? ", " : "") << 100.0 * w[j] << '%';
    s << ')';
    return s.str();
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            double v = std::stod(item, &used);
            if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos) throw 0;
            out.push_back(v);
        } catch (...) {
            throw Failure("cli", std::string("bad number '") + item + "' in --" + what);
        }
    }
    if (out.empty()) throw Failure("cli", std::string("--") + what + " is empty");
    return out;
}

struct Options {
    std::string scenario = "toy";
    std::string tree;
    int horizon = 0;
    std::string index = "ait";
    std::string variant = "original";
    double x0 = 2.0;
    double eps = 1e-4;
    int maxiter = 15;
    double x = 1.0;
    bool shortselling = false;
    double pi_level = 0.01;
    std::string weights;
    std::string trace_csv, lp_dump, svg, csv, json;
    double q = 0.01;
    double wealth = 1.0;
    std::string path;
    double v0 = 0.0;
    int depth_cap = 1 << 20;
    std::uint64_t seed = 42;
    std::size_t assets = 10, states = 1000;
    double dof = 5.0;
    double location = 1.002;
    double scale = 4e-4;
    double floor = 1e-3;
    std::string out;
    bool quiet = false;
};

ScenarioModel load_market(const Options& o) {
    if (o.scenario == "toy") return toy_market();
    return load_scenarios(o.scenario);
}

TreeModel load_tree_source(const Options& o) {
    if (!o.tree.empty()) return load_tree(o.tree);
    if (o.horizon < 1) throw Failure("cli", "--horizon must be at least 1 (or pass --tree)");
    return TreeModel(o.horizon, load_market(o));
}

BisectionConfig bisection_config(const Options& o) {
    BisectionConfig cfg;
    cfg.x0 = o.x0;
    cfg.epsilon = o.eps;
    cfg.max_iterations = o.maxiter;
    cfg.variant = variant_from_string(o.variant);
    cfg.validate();
    return cfg;
}

int cmd_maximize(const Options& o) {
    auto model = load_market(o);
    auto cfg = bisection_config(o);
    auto spec = family_for(index_from_string(o.index), o.pi_level);
    if (!o.lp_dump.empty()) {
        auto lp = build_minrisk_lp(spec, model, cfg.x0, o.shortselling);
        write_file(o.lp_dump, [&](std::ostream& out) { write_lp_format(lp.lp, out); });
    }
    auto trace = maximize(spec, model, o.shortselling, cfg);
    if (!o.quiet) write_trace_table(trace, std::cout);
    if (!o.trace_csv.empty()) write_file(o.trace_csv, [&](std::ostream& out) { write_trace_csv(trace, out); });
    if (!o.json.empty()) {
        nlohmann::json j;
        j["index"] = o.index;
        j["variant"] = o.variant;
        j["status"] = to_string(trace.status);
        j["x_L"] = full(trace.x_L);
        j["x_U"] = full(trace.x_U);
        j["step1_iterations"] = trace.step1_rows.size();
        j["step2_iterations"] = trace.step2_rows.size();
        j["lp_solves"] = trace.lp_solves;
        if (trace.epsilon_solution) j["weights"] = *trace.epsilon_solution;
        write_file(o.json, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
    }
    return 0;
}

int cmd_minrisk(const Options& o) {
    auto model = load_market(o);
    auto spec = family_for(index_from_string(o.index), o.pi_level);
    if (!(o.x > 0.0)) throw Failure("minrisk", "--x must be positive");
    auto lp = build_minrisk_lp(spec, model, o.x, o.shortselling);
    if (!o.lp_dump.empty()) write_file(o.lp_dump, [&](std::ostream& out) { write_lp_format(lp.lp, out); });
    auto r = solve_minrisk(lp);
    if (r.status != LpStatus::optimal) throw Failure("lp", std::string("min-risk LP ended ") + to_string(r.status));
    std::cout << "p(x) = " << full(r.value) << "\nweights " << percent(r.weights) << '\n';
    return 0;
}

int cmd_evaluate(const Options& o) {
    auto model = load_market(o);
    if (o.weights.empty()) throw Failure("cli", "--weights is required");
    auto w = parse_list(o.weights, "weights");
    if (w.size() != model.n_assets())
        throw Failure("evaluate", "expected " + std::to_string(model.n_assets()) + " weights, got " +
                                      std::to_string(w.size()));
    double sum = 0.0;
    for (double v : w) sum += v;
    for (double& v : w) v /= sum;
    auto d = pnl_of_weights(model, w, o.shortselling);
    auto v = evaluate(index_from_string(o.index), model, d, o.pi_level);
    std::cout << full(v.value) << '\n';
    return 0;
}

int cmd_frontier(const Options& o) {
    auto tree = load_tree_source(o);
    auto seq = meanrisk_frontiers(tree, o.q, o.shortselling, o.wealth);
    if (!o.quiet) {
        for (std::size_t t = 0; t < seq.frontiers.size(); ++t) {
            const auto& f = seq.frontiers[t];
            auto best = max_ratio_point(f);
            std::cout << "t=" << t << "  vertices " << f.size() << "  max ratio " << fmt(best.ratio, 6) << '\n';
            for (const auto& [r, m] : f.vertices) std::cout << "  " << fmt(r, 8) << "  " << fmt(m, 8) << '\n';
            if (f.ray) std::cout << "  ray (" << fmt(f.ray->first, 8) << ", " << fmt(f.ray->second, 8) << ")\n";
        }
    }
    if (!o.csv.empty()) write_file(o.csv, [&](std::ostream& out) { write_frontiers_csv(seq, out); });
    if (!o.svg.empty())
        write_file(o.svg, [&](std::ostream& out) { write_svg(frontier_series(seq), "Mean-risk frontiers", out); });
    return 0;
}

int cmd_dglr(const Options& o, bool shortselling) {
    auto tree = load_tree_source(o);
    auto res = meanloss_frontier_dglr(tree, o.v0, shortselling);
    if (!o.quiet) {
        std::cout << "max ratio " << fmt(res.max_ratio, 8) << "  lp solves " << res.lp_solves << '\n';
        for (const auto& [l, m] : res.frontier.vertices) std::cout << "  " << fmt(l, 8) << "  " << fmt(m, 8) << '\n';
        if (res.frontier.ray)
            std::cout << "  ray (" << fmt(res.frontier.ray->first, 8) << ", " << fmt(res.frontier.ray->second, 8)
                      << ")\n";
    }
    if (!o.csv.empty()) {
        write_file(o.csv, [&](std::ostream& out) {
            out << "kind,loss,mean\n";
            for (const auto& [l, m] : res.frontier.vertices) out << "vertex," << full(l) << ',' << full(m) << '\n';
            if (res.frontier.ray)
                out << "ray," << full(res.frontier.ray->first) << ',' << full(res.frontier.ray->second) << '\n';
        });
    }
    if (!o.json.empty()) write_file(o.json, [&](std::ostream& out) { out << strategy_to_json(tree, res.optimal) << '\n'; });
    if (!o.svg.empty()) {
        SvgSeries s;
        s.label = "dGLR frontier";
        s.points = res.frontier.vertices;
        if (res.frontier.ray && !s.points.empty()) {
            auto [l, m] = s.points.back();
            double scale = 1.0;
            for (const auto& p : s.points) scale = std::max(scale, p.first);
            s.points.push_back({l + scale * res.frontier.ray->first, m + scale * res.frontier.ray->second});
        }
        write_file(o.svg, [&](std::ostream& out) { write_svg({s}, "E[(V_T - V_0)^-] vs E[V_T - V_0]", out); });
    }
    return 0;
}

int cmd_verify(const Options& o) {
    auto tree = load_tree_source(o);
    VerifyOptions vo;
    vo.epsilon = o.eps;
    vo.depth_cap = o.depth_cap;
    auto rep = verify_constant_acceptability(tree, vo);
    if (!o.quiet) {
        std::cout << "one-period alpha* " << fmt(rep.one_period.alpha_star, 8) << "  weights "
                  << percent(rep.one_period.weights) << '\n';
        for (const auto& r : rep.rows)
            std::cout << "  t=" << r.depth << " node '" << r.node << "' v=" << fmt(r.wealth, 4) << "  ["
                      << fmt(r.bracket.x_L, 8) << ", " << fmt(r.bracket.x_U, 8) << "]\n";
        std::cout << "max deviation " << fmt(rep.max_deviation, 4) << "  constant strategy ["
                  << fmt(rep.constant_strategy.x_L, 8) << ", " << fmt(rep.constant_strategy.x_U, 8) << "]\n";
    }
    if (!o.json.empty()) write_file(o.json, [&](std::ostream& out) { out << rep.to_json() << '\n'; });
    if (!rep.ok())
        throw Failure("recursive", "optimal index not constant across nodes (max deviation " +
                                       fmt(rep.max_deviation, 4) + ")");
    return 0;
}

int cmd_simulate(const Options& o) {
    auto tree = load_tree_source(o);
    std::vector<std::size_t> path;
    if (!o.path.empty()) {
        for (double v : parse_list(o.path, "path")) {
            if (v < 0 || v != std::floor(v) || v >= static_cast<double>(tree.branching()))
                throw Failure("cli", "--path entries must be branch indices below " +
                                         std::to_string(tree.branching()));
            path.push_back(static_cast<std::size_t>(v));
        }
    }
    auto seq = meanrisk_frontiers(tree, o.q, o.shortselling);
    auto profiles = simulate_policies(tree, seq, path);
    if (!o.quiet) {
        std::cout << std::left << std::setw(12) << "policy" << std::setw(4) << "t" << std::setw(14) << "risk"
                  << std::setw(14) << "mean" << std::setw(12) << "ratio" << "dominated\n"
                  << std::right;
        for (const auto& p : profiles) {
            for (std::size_t k = 0; k < p.points.size(); ++k) {
                const auto& pt = p.points[k];
                std::cout << std::left << std::setw(12) << to_string(p.policy) << std::setw(4) << pt.t
                          << std::setw(14) << fmt(pt.risk, 7) << std::setw(14) << fmt(pt.mean, 7) << std::setw(12)
                          << fmt(pt.ratio, 6) << (p.dominated[k] ? "yes" : "no") << '\n'
                          << std::right;
            }
        }
    }
    if (!o.csv.empty()) {
        write_file(o.csv, [&](std::ostream& out) {
            out << "policy,t,node,risk,mean,ratio,dominated\n";
            for (const auto& p : profiles)
                for (std::size_t k = 0; k < p.points.size(); ++k) {
                    const auto& pt = p.points[k];
                    out << to_string(p.policy) << ',' << pt.t << ',' << pt.node << ',' << full(pt.risk) << ','
                        << full(pt.mean) << ',' << full(pt.ratio) << ',' << (p.dominated[k] ? 1 : 0) << '\n';
                }
        });
    }
    if (!o.svg.empty())
        write_file(o.svg, [&](std::ostream& out) {
            write_svg(frontier_series(seq, profiles), "Frontiers and realised profiles", out);
        });
    for (const auto& p : profiles) {
        if (p.policy != Policy::consistent) continue;
        for (std::size_t k = 0; k < p.points.size(); ++k)
            if (p.dominated[k]) throw Failure("frontier", "consistent profile left the frontier at t=" +
                                                               std::to_string(p.points[k].t));
    }
    return 0;
}

int cmd_gen(const Options& o) {
    StudentTParams p;
    p.n_assets = o.assets;
    p.n_states = o.states;
    p.dof = o.dof;
    p.seed = o.seed;
    p.floor = o.floor;
    p.location.assign(o.assets, o.location);
    p.scale.assign(o.assets * o.assets, 0.0);
    for (std::size_t j = 0; j < o.assets; ++j) p.scale[j * o.assets + j] = o.scale;
    auto model = generate_student_t(p);
    if (o.out.empty()) {
        write_scenarios_csv(model, std::cout);
    } else {
        save_scenarios(model, o.out);
    }
    return 0;
}

// Appends the keys of a JSON config file that are not already given on the
// command line; the explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config") {
            if (k + 1 >= args.size()) throw Failure("cli", "--config needs a path");
            path = args[k + 1];
            args.erase(args.begin() + k, args.begin() + k + 2);
            break;
        }
        if (args[k].rfind("--config=", 0) == 0) {
            path = args[k].substr(9);
            args.erase(args.begin() + k);
            break;
        }
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw Failure("cli", "cannot read config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Failure("cli", "config '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw Failure("cli", "config '" + path + "' must be a JSON object");
    auto given = [&](const std::string& flag) {
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::string flag = "--" + it.key();
        if (given(flag)) continue;
        const auto& v = it.value();
        if (v.is_boolean()) {
            if (v.get<bool>()) args.push_back(flag);
            continue;
        }
        args.push_back(flag);
        if (v.is_string()) {
            args.push_back(v.get<std::string>());
        } else if (v.is_array()) {
            std::string joined;
            for (std::size_t k = 0; k < v.size(); ++k) joined += (k ? "," : "") + (v[k].is_string() ? v[k].get<std::string>() : v[k].dump());
            args.push_back(joined);
        } else {
            args.push_back(v.dump());
        }
    }
    return args;
}

void check_thread_env() {
    const char* env = std::getenv("ACCMAX_THREADS");
    if (!env) return;
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) throw Failure("cli", "ACCMAX_THREADS must be a positive integer");
}

}  // namespace

int main(int argc, char** argv) {
    std::string command = "cli";
    try {
        check_thread_env();
        std::vector<std::string> args(argv + 1, argv + argc);
        if (!args.empty() && args[0].rfind("-", 0) != 0) command = args[0];
        args = expand_config(std::move(args));

        Options o;
        bool dglr_shortselling = true;
        double verify_eps = 1e-3;
        CLI::App app{"Acceptability index maximisation on scenario markets and trees", "accmax"};
        app.require_subcommand(1);

        auto market_opts = [&](CLI::App* c) {
            c->add_option("--scenario", o.scenario, "Scenario file (.csv/.json) or 'toy'");
            c->add_option("--pi-level", o.pi_level, "Level of the risk measure inside RAROC");
            c->add_flag("--shortselling", o.shortselling, "Allow negative weights");
        };
        auto tree_opts = [&](CLI::App* c) {
            auto* sc = c->add_option("--scenario", o.scenario, "One-step model (.csv/.json) or 'toy'");
            auto* tr = c->add_option("--tree", o.tree, "Tree JSON file");
            c->add_option("--horizon", o.horizon, "Tree depth T");
            tr->excludes(sc);
        };
        auto index_opt = [&](CLI::App* c) {
            c->add_option("--index", o.index, "ait, glr or raroc")->check(CLI::IsMember({"ait", "glr", "raroc"}));
        };

        auto* mx = app.add_subcommand("maximize", "Bisection for the maximal acceptability index");
        market_opts(mx);
        index_opt(mx);
        mx->add_option("--variant", o.variant, "original, modified, mixed or zero_level");
        mx->add_option("--x0", o.x0, "Initial level");
        mx->add_option("--eps", o.eps, "Target interval width");
        mx->add_option("--maxiter", o.maxiter, "Maximal Step 1 iterations");
        mx->add_option("--trace-csv", o.trace_csv, "Write the iteration trace as CSV");
        mx->add_option("--lp-dump", o.lp_dump, "Write the min-risk LP at x0 in LP format");
        mx->add_option("--json", o.json, "Write a JSON summary");
        mx->add_flag("--quiet", o.quiet, "No table on stdout");

        auto* mr = app.add_subcommand("minrisk", "Minimal level-x risk over fully invested portfolios");
        market_opts(mr);
        index_opt(mr);
        mr->add_option("--x", o.x, "Family parameter x > 0");
        mr->add_option("--lp-dump", o.lp_dump, "Write the LP in LP format");

        auto* ev = app.add_subcommand("evaluate", "Index of a fixed portfolio");
        market_opts(ev);
        index_opt(ev);
        ev->add_option("--weights", o.weights, "Comma-separated weights (renormalised to sum 1)");

        auto* fr = app.add_subcommand("frontier", "Mean-risk frontiers by backward recursion");
        tree_opts(fr);
        fr->add_option("--q", o.q, "Level of the one-step tvar");
        fr->add_option("--wealth", o.wealth, "Wealth for the time-0 frontier");
        fr->add_flag("--shortselling", o.shortselling, "Allow negative weights");
        fr->add_option("--csv", o.csv, "Write vertices as CSV");
        fr->add_option("--svg", o.svg, "Write a plot");
        fr->add_flag("--quiet", o.quiet, "No table on stdout");

        auto* dg = app.add_subcommand("dglr", "Dynamic gain-loss frontier of terminal wealth");
        tree_opts(dg);
        dg->add_option("--v0", o.v0, "Initial wealth");
        dg->add_flag("--shortselling,!--long-only", dglr_shortselling, "Allow negative weights (default on)");
        dg->add_option("--csv", o.csv, "Write vertices as CSV");
        dg->add_option("--svg", o.svg, "Write a plot");
        dg->add_option("--json", o.json, "Write the optimal strategy as JSON");
        dg->add_flag("--quiet", o.quiet, "No table on stdout");

        auto* vr = app.add_subcommand("verify-recursive", "Check that the optimal dynamic AIT is constant");
        tree_opts(vr);
        vr->add_option("--eps", verify_eps, "Bracket width");
        vr->add_option("--depth-cap", o.depth_cap, "Deepest time checked");
        vr->add_option("--json", o.json, "Write the report as JSON");
        vr->add_flag("--quiet", o.quiet, "No table on stdout");

        auto* sp = app.add_subcommand("simulate-path", "Consistent, switching and myopic profiles along a path");
        tree_opts(sp);
        sp->add_option("--q", o.q, "Level of the one-step tvar");
        sp->add_flag("--shortselling", o.shortselling, "Allow negative weights");
        sp->add_option("--path", o.path, "Comma-separated branch indices, length T-1 (default all 0)");
        sp->add_option("--csv", o.csv, "Write profiles as CSV");
        sp->add_option("--svg", o.svg, "Write a plot");
        sp->add_flag("--quiet", o.quiet, "No table on stdout");

        auto* gs = app.add_subcommand("gen-scenarios", "Multivariate Student t scenarios");
        gs->add_option("--assets", o.assets, "Number of assets");
        gs->add_option("--states", o.states, "Number of equally likely states");
        gs->add_option("--dof", o.dof, "Degrees of freedom");
        gs->add_option("--location", o.location, "Location of every gross return");
        gs->add_option("--scale", o.scale, "Diagonal of the scale matrix");
        gs->add_option("--floor", o.floor, "Lower clip of gross returns");
        gs->add_option("--seed", o.seed, "Random seed");
        gs->add_option("--out", o.out, "Output file (.csv/.json); stdout when absent");

        std::reverse(args.begin(), args.end());
        try {
            app.parse(args);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            throw Failure("cli", e.what());
        }

        if (*mx) return cmd_maximize(o);
        if (*mr) return cmd_minrisk(o);
        if (*ev) return cmd_evaluate(o);
        if (*fr) return cmd_frontier(o);
        if (*dg) return cmd_dglr(o, dglr_shortselling);
        if (*vr) {
            o.eps = verify_eps;
            return cmd_verify(o);
        }
        if (*sp) return cmd_simulate(o);
        if (*gs) return cmd_gen(o);
        return 2;
    } catch (const Failure& e) {
        std::cerr << "error: " << e.module << ": " << one_line(e.what()) << '\n';
        return e.module == "cli" ? 2 : 1;
    } catch (const InputError& e) {
        std::cerr << "error: input: " << one_line(e.what()) << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << command << ": " << one_line(e.what()) << '\n';
        return 1;
    }
}
