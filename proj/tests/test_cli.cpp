#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "accmax/acceptability.hpp"

namespace fs = std::filesystem;
using namespace accmax;

namespace {

const std::string kBin = ACCMAX_BIN;
const std::string kData = ACCMAX_DATA;

fs::path scratch() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("accmax_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct Run {
    int status;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Run run(const std::string& args, const std::string& env = "") {
    auto o = scratch() / "stdout.txt", e = scratch() / "stderr.txt";
    std::string cmd = env + (env.empty() ? "" : " ") + "\"" + kBin + "\" " + args + " >\"" + o.string() + "\" 2>\"" +
                      e.string() + "\"";
    int rc = std::system(cmd.c_str());
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, slurp(o), slurp(e)};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

std::string last_line(const std::string& text) {
    auto lines = split(text, '\n');
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines.empty() ? "" : lines.back();
}

}  // namespace

TEST_CASE("maximize writes the glr trace") {
    auto csv = scratch() / "glr.csv";
    auto r = run("maximize --index glr --scenario \"" + kData + "/toy.csv\" --x0 2 --eps 1e-4 --maxiter 15 --trace-csv \"" +
                 csv.string() + "\"");
    REQUIRE(r.status == 0);
    CHECK(r.out.find("interval [3.14282, 3.14288]") != std::string::npos);
    CHECK(r.out.find("73.33%") != std::string::npos);
    auto f = split(last_line(slurp(csv)), ',');
    REQUIRE(f.size() >= 4);
    CHECK(f[0] == "final");
    CHECK(std::round(std::stod(f[2]) * 1e5) / 1e5 == doctest::Approx(3.14282).epsilon(1e-12));
    CHECK(std::round(std::stod(f[3]) * 1e5) / 1e5 == doctest::Approx(3.14288).epsilon(1e-12));
}

TEST_CASE("evaluate at rounded weights") {
    auto r = run("evaluate --index glr --scenario \"" + kData + "/toy.csv\" --weights 0.7333,0.2667");
    REQUIRE(r.status == 0);
    double got = std::stod(r.out);
    auto m = toy_market();
    std::vector<double> w{0.7333, 0.2667};
    double ref = eval_glr(m, pnl_of_weights(m, w, false)).value;
    CHECK(got == doctest::Approx(ref).epsilon(1e-12));
    CHECK(std::abs(got - 3.1428) < 1e-3);
}

TEST_CASE("gen-scenarios is deterministic") {
    auto a = scratch() / "a.csv", b = scratch() / "b.csv";
    REQUIRE(run("gen-scenarios --assets 10 --states 1000 --seed 42 --out \"" + a.string() + "\"").status == 0);
    REQUIRE(run("gen-scenarios --assets 10 --states 1000 --seed 42 --out \"" + b.string() + "\"").status == 0);
    auto sa = slurp(a);
    CHECK(sa.size() > 1000);
    CHECK(sa == slurp(b));
    auto model = load_scenarios(a);
    CHECK(model.n_assets() == 10);
    CHECK(model.n_states() == 1000);
}

TEST_CASE("frontier csv is byte stable") {
    auto a = scratch() / "f1.csv", b = scratch() / "f2.csv", svg = scratch() / "f.svg";
    REQUIRE(run("frontier --horizon 2 --quiet --csv \"" + a.string() + "\" --svg \"" + svg.string() + "\"").status == 0);
    REQUIRE(run("frontier --horizon 2 --quiet --csv \"" + b.string() + "\"").status == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).rfind("t,vertex,risk,mean,ratio,max_ratio", 0) == 0);
    CHECK(slurp(svg).find("<svg") != std::string::npos);
}

TEST_CASE("config file supplies missing flags") {
    auto cfg = scratch() / "run.json";
    auto a = scratch() / "cfg.csv", b = scratch() / "flags.csv";
    {
        std::ofstream out(cfg);
        out << "{\"index\": \"raroc\", \"x0\": 2, \"eps\": 1e-4, \"maxiter\": 15, \"scenario\": \"" << kData
            << "/toy.csv\", \"trace-csv\": \"" << a.string() << "\", \"quiet\": true}";
    }
    REQUIRE(run("maximize --config \"" + cfg.string() + "\"").status == 0);
    REQUIRE(run("maximize --index raroc --quiet --trace-csv \"" + b.string() + "\"").status == 0);
    CHECK(slurp(a) == slurp(b));
    // Explicit flags override the file.
    auto c = scratch() / "over.csv";
    REQUIRE(run("maximize --config \"" + cfg.string() + "\" --index glr --trace-csv \"" + c.string() + "\"").status == 0);
    CHECK(slurp(c).find("3.1428") != std::string::npos);
}

TEST_CASE("errors are one machine-readable line") {
    auto check_error = [](const Run& r, const std::string& module) {
        CHECK(r.status != 0);
        auto lines = split(r.err, '\n');
        while (!lines.empty() && lines.back().empty()) lines.pop_back();
        REQUIRE(lines.size() == 1);
        CHECK(lines[0].rfind("error: " + module + ": ", 0) == 0);
    };
    check_error(run("maximize --scenario /nonexistent/x.csv"), "input");
    check_error(run("maximize --index sharpe"), "cli");
    check_error(run("frontier --tree t.json --scenario toy --horizon 2"), "cli");
    check_error(run("maximize --eps 0"), "maximize");
    check_error(run("evaluate --weights 1,2,3"), "evaluate");
    check_error(run("simulate-path --horizon 3 --path 0,9"), "cli");
    check_error(run("frontier --horizon 2", "ACCMAX_THREADS=zero"), "cli");
    check_error(run("nonsense"), "cli");
}

TEST_CASE("thread cap is accepted") {
    CHECK(run("frontier --horizon 1 --quiet", "ACCMAX_THREADS=2").status == 0);
}

TEST_CASE("tree file source") {
    auto tree = scratch() / "tree.json";
    {
        std::ofstream out(tree);
        out << "{\"horizon\": 2, \"step\": {\"probabilities\": [0.25, 0.25, 0.25, 0.25], "
               "\"returns\": [[1.04, 1.045, 0.98, 0.985], [1.045, 0.975, 1.055, 0.98]]}}";
    }
    auto a = scratch() / "t1.csv", b = scratch() / "t2.csv";
    REQUIRE(run("frontier --tree \"" + tree.string() + "\" --quiet --csv \"" + a.string() + "\"").status == 0);
    REQUIRE(run("frontier --horizon 2 --quiet --csv \"" + b.string() + "\"").status == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("verify-recursive and dglr") {
    auto j = scratch() / "verify.json";
    auto r = run("verify-recursive --horizon 2 --quiet --json \"" + j.string() + "\"");
    CHECK(r.status == 0);
    CHECK(slurp(j).find("\"ok\": true") != std::string::npos);
    auto d = run("dglr --horizon 1 --v0 1 --long-only");
    REQUIRE(d.status == 0);
    CHECK(d.out.find("max ratio 3.142857") != std::string::npos);
}

TEST_CASE("simulate-path profiles") {
    auto csv = scratch() / "paths.csv";
    auto r = run("simulate-path --horizon 3 --path 1,2 --quiet --csv \"" + csv.string() + "\"");
    REQUIRE(r.status == 0);
    auto lines = split(slurp(csv), '\n');
    CHECK(lines[0] == "policy,t,node,risk,mean,ratio,dominated");
    CHECK(lines.size() >= 10);
}
