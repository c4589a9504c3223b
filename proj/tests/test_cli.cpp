#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "couplesim/cli.hpp"

using namespace couplesim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("couplesim_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    f << text;
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "couplesim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

RunConfig parse(const std::string& text, const std::string& base = ".") {
    std::istringstream is(text);
    return parse_config(is, "test.config", base);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config sections") {
    const RunConfig c = parse(
        "# run\n[params]\ndelta = 0.5 ; inline comment\nphi = 10\n"
        "[population]\nn = 500\nseed = 18446744073709551615\nthreads = 2\n"
        "[scenarios]\nrun = baseline, outsourcing\noutsourcing_price = 0.02\n"
        "[sweep]\ndelta_grid = 0:1:3\n"
        "[calibration]\nstarts = 2\nfree = phi, delta\nn = 100\n"
        "[targets]\nshare_R_male = 0.8\n"
        "[regional]\nnational_gaps = 0.1, 0.2, 0.3, 0.4\n"
        "[output]\ndir = results\ngnuplot = yes\noccupation_gap = among_workers\n");
    CHECK(c.params.delta() == 0.5);
    CHECK(c.params.phi() == 10.0);
    CHECK(c.params.theta() == 2.62);
    CHECK(c.population.n_couples == 500);
    CHECK(c.population.seed == 18446744073709551615ull);
    CHECK(c.population.threads == 2);
    REQUIRE(c.scenarios.size() == 2);
    CHECK(c.scenarios[1].kind == ScheduleKind::Outsourcing);
    CHECK(*c.outsourcing_price == 0.02);
    CHECK(c.sweep_grid_or_default().size() == 3);
    CHECK(c.curve_grid_or_default().size() == 21);
    CHECK(c.calibration.starts == 2);
    CHECK(c.calibration.free[3]);
    CHECK_FALSE(c.calibration.free[0]);
    CHECK(c.calibration_config().population.n_couples == 100);
    CHECK(c.targets.values[0] == 0.8);
    CHECK(c.national_gaps.wage == 0.4);
    CHECK(c.out_dir == "results");
    CHECK(c.gnuplot);
    CHECK(c.gap_options.occupation_among_workers);
}

TEST_CASE("config errors name the offending key") {
    CHECK(error_of("[population]\nsize = 5\n").find("'size'") != std::string::npos);
    CHECK(error_of("[population]\nsize = 5\n").find("test.config:2") != std::string::npos);
    CHECK(error_of("[params]\nkappa = 1\n").find("'kappa'") != std::string::npos);
    CHECK(error_of("[targets]\nshare_X = 1\n").find("'share_X'") != std::string::npos);
    CHECK(error_of("[extras]\nx = 1\n").find("[extras]") != std::string::npos);
    CHECK(error_of("n = 5\n").find("before any section") != std::string::npos);
    CHECK(error_of("[population]\nn = 5\nn = 6\n").find("duplicate") != std::string::npos);
    CHECK(error_of("[population]\nn = -5\n").find("'n'") != std::string::npos);
    CHECK(error_of("[population]\nseed = 12abc\n").find("'seed'") != std::string::npos);
    CHECK(error_of("[params]\nsigma = 0\n").find("sigma") != std::string::npos);
    CHECK(error_of("[scenarios]\nrun = baseline, subsidy\n").find("subsidy") != std::string::npos);
    CHECK(error_of("[calibration]\nfree = phi, kappa\n").find("kappa") != std::string::npos);
    CHECK(error_of("[population\nn = 5\n").find("malformed") != std::string::npos);
    CHECK(error_of("[population]\njust text\n").find("key = value") != std::string::npos);
}

TEST_CASE("params files round trip exactly and resolve relative to the config") {
    TempDir dir("params");
    ParamValues v;
    v.phi = 12.345678901234567;
    v.delta = 0.1 + 0.2;
    const ModelParams p(v);
    {
        std::ofstream f(dir / "p.txt");
        write_params(f, p);
    }
    std::ifstream f(dir / "p.txt");
    CHECK(read_params(f, "p.txt") == p);

    write_text(dir / "run.config", "[params]\nfile = p.txt\neta = 0.3\n");
    const RunConfig c = load_config(dir / "run.config");
    CHECK(c.params.phi() == v.phi);
    CHECK(c.params.delta() == v.delta);
    CHECK(c.params.eta() == 0.3);

    write_text(dir / "missing.config", "[params]\nfile = nowhere.txt\n");
    CHECK_THROWS_AS(load_config(dir / "missing.config"), std::invalid_argument);
}

TEST_CASE("command-line overrides") {
    CliOverrides o;
    o.n = 77;
    o.seed = 5;
    o.out = "elsewhere";
    o.scenario = "flexible";
    o.delta_grid = "0:2:5";
    o.threads = 1;
    const RunConfig c = resolve_config(std::nullopt, o);
    CHECK(c.population.n_couples == 77);
    CHECK(c.population.seed == 5);
    CHECK(c.out_dir == "elsewhere");
    REQUIRE(c.scenarios.size() == 1);
    CHECK(c.scenarios[0].kind == ScheduleKind::FlexibleRegular);
    CHECK(c.sweep_grid->size() == 5);
    CHECK(c.curve_grid->size() == 5);
    CHECK(c.population.threads == 1);

    CliOverrides bad;
    bad.delta_grid = "0:2";
    try {
        resolve_config(std::nullopt, bad);
        FAIL("expected an error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "config");
    }
}

TEST_CASE("help and usage errors") {
    const Run help = cli({"--help"});
    CHECK(help.code == 0);
    for (const char* flag : {"--config", "--out", "--seed", "--n", "--scenario", "--delta-grid",
                             "--prefecture-data", "--threads"})
        CHECK(help.out.find(flag) != std::string::npos);
    CHECK(cli({}).code != 0);
    CHECK(cli({"simulate", "--bogus"}).code != 0);
    CHECK(cli({"simulate", "--n", "0"}).code != 0);
}

TEST_CASE("missing config file") {
    const Run r = cli({"simulate", "--config", "/nonexistent/run.config"});
    CHECK(r.code == exit_code_for("config"));
    CHECK(r.err.find("/nonexistent/run.config") != std::string::npos);
    CHECK(r.err.find("config") != std::string::npos);
}

TEST_CASE("invalid target key") {
    TempDir dir("badtarget");
    write_text(dir / "run.config", "[targets]\nshare_R_mail = 0.9\n");
    const Run r = cli({"calibrate", "--config", dir / "run.config", "--out", dir / "out"});
    CHECK(r.code != 0);
    CHECK(r.err.find("share_R_mail") != std::string::npos);
}

TEST_CASE("small simulate run emits every table quickly") {
    TempDir dir("smoke");
    const auto t0 = std::chrono::steady_clock::now();
    const Run r = cli({"simulate", "--n", "100", "--out", dir / "out"});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    REQUIRE(r.code == 0);
    CHECK(secs < 5.0);
    for (const char* f : {"moments.csv", "occupation_matrix.csv", "hours.csv", "gaps.csv",
                          "relative_earnings.csv", "params.txt"})
        CHECK(fs::exists(dir.path / "out" / f));
    CHECK(read_text(dir / "out/gaps.csv").rfind("scenario,participation,occupation,hours,wage\nbaseline,", 0) == 0);
    CHECK(count_lines(read_text(dir / "out/moments.csv")) == 10);
    CHECK(count_lines(read_text(dir / "out/occupation_matrix.csv")) == 4);

    std::ifstream pf(dir / "out/params.txt");
    CHECK(read_params(pf, "params.txt") == ModelParams::calibrated());
}

TEST_CASE("counterfactual, sweep and regional outputs") {
    TempDir dir("cmds");
    const std::string out = dir / "out";
    REQUIRE(cli({"counterfactual", "--n", "30", "--out", out}).code == 0);
    const std::string occ = read_text(out + "/counterfactual_occupations.csv");
    CHECK(count_lines(occ) == 1 + 3 * 3);
    CHECK(occ.find("\nflexible,R,") != std::string::npos);
    CHECK(occ.find("\noutsourcing,NW,") != std::string::npos);
    CHECK(count_lines(read_text(out + "/counterfactual_gaps.csv")) == 4);
    CHECK(count_lines(read_text(out + "/counterfactual_hours.csv")) == 1 + 3 * 4);

    REQUIRE(cli({"sweep", "--n", "20", "--delta-grid", "0:1:3", "--scenario", "baseline,flexible",
                 "--out", out})
                .code == 0);
    CHECK(count_lines(read_text(out + "/sweep.csv")) == 1 + 2 * 3 * 4);

    const std::string data = std::string(COUPLESIM_SOURCE_DIR) + "/data/prefectures_illustrative.csv";
    REQUIRE(cli({"regional", "--n", "30", "--delta-grid", "0:1.6:5", "--prefecture-data", data,
                 "--out", out})
                .code == 0);
    CHECK(count_lines(read_text(out + "/curve.csv")) == 1 + 6);
    CHECK(fs::exists(out + "/fit.csv"));
    CHECK(read_text(out + "/regional_summary.csv").find("g0_wage,") != std::string::npos);

    const Run no_data = cli({"regional", "--n", "10", "--out", out});
    CHECK(no_data.code == exit_code_for("regional"));
    CHECK(no_data.err.find("prefecture") != std::string::npos);
}

TEST_CASE("repeated runs are byte-identical") {
    TempDir dir("repeat");
    for (const char* run : {"a", "b"})
        REQUIRE(cli({"simulate", "--n", "40", "--seed", "3", "--out", dir / run}).code == 0);
    for (const char* f : {"moments.csv", "occupation_matrix.csv", "hours.csv", "gaps.csv",
                          "relative_earnings.csv", "params.txt"})
        CHECK(read_text(dir / (std::string("a/") + f)) == read_text(dir / (std::string("b/") + f)));
}

TEST_CASE("calibration resumes from its own params file") {
    TempDir dir("resume");
    write_text(dir / "first.config",
               "[population]\nn = 40\n[calibration]\nstarts = 1\nmax_evals = 12\nfree = phi, delta\n");
    REQUIRE(cli({"calibrate", "--config", dir / "first.config", "--out", dir / "first"}).code == 0);
    write_text(dir / "second.config",
               "[params]\nfile = first/params.txt\n"
               "[population]\nn = 40\n[calibration]\nstarts = 1\nmax_evals = 1\nfree = phi, delta\n");
    REQUIRE(cli({"calibrate", "--config", dir / "second.config", "--out", dir / "second"}).code == 0);
    auto objective = [&](const std::string& run) {
        const std::string s = read_text(dir / (run + "/calibration_summary.csv"));
        const auto at = s.find("objective,");
        return s.substr(at, s.find('\n', at) - at);
    };
    CHECK(objective("first") == objective("second"));
    CHECK(read_text(dir / "first/params.txt") == read_text(dir / "second/params.txt"));
}
