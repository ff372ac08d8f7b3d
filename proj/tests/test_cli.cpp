// End-to-end tests of the command-line runner plus unit tests of the config
// parser and the output writers. The runner is driven in-process through
// run_cli, with outputs written under a scratch directory.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sepwalk/commands.hpp"
#include "sepwalk/config.hpp"
#include "sepwalk/errors.hpp"
#include "sepwalk/heat_kernel.hpp"
#include "sepwalk/io.hpp"

using namespace sepwalk;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
    static fs::path root = [] {
        fs::path p = fs::temp_directory_path() / "sepwalk-cli-tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

fs::path scratch(const std::string& name) {
    fs::path p = scratch_root() / name;
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
    fs::path dir;  // output directory printed on success
};

CliResult cli(const std::vector<std::string>& args) {
    setenv("SEPWALK_THREADS", "1", 1);
    std::ostringstream out, err;
    CliResult r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    if (r.code == 0 && !r.out.empty() && r.out.back() == '\n') {
        std::string line = r.out.substr(0, r.out.size() - 1);
        const size_t nl = line.find_last_of('\n');
        if (nl != std::string::npos) line = line.substr(nl + 1);
        r.dir = line;
    }
    return r;
}

struct Csv {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

Csv parse_csv(const std::string& text) {
    Csv csv;
    std::istringstream in(text);
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') {
            csv.comments.push_back(line);
        } else if (!saw_header) {
            csv.header = split_cells(line);
            saw_header = true;
        } else {
            csv.rows.push_back(split_cells(line));
        }
    }
    return csv;
}

// Drops the one field that legitimately differs between identical runs.
std::string strip_timestamps(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
        if (line.rfind("# timestamp", 0) == 0) continue;
        if (line.find("\"timestamp\":") != std::string::npos) continue;
        out += line + "\n";
    }
    return out;
}

std::string base_config(const std::string& outdir) {
    return "model.alpha = 0.7\n"
           "model.beta = 0.7\n"
           "model.rho = 0.5\n"
           "model.gamma = 0.3\n"
           "run.horizon = 100\n"
           "run.replicas = 2\n"
           "run.master_seed = 7\n"
           "output.directory = " +
           outdir + "\n";
}

}  // namespace

TEST_CASE("config parser: happy path and failure modes") {
    const auto cfg = parse_config(
        "# leading comment\n"
        "model.alpha = 0.25\n"
        "run.replicas = 100   # trailing comment\n"
        "\n"
        "output.directory = runs/today\n"
        "engine.follow = true\n"
        "scan.gammas = 0.1, 0.5,2\n");
    CHECK(get_double(cfg, "model.alpha", 0.0) == 0.25);
    CHECK(get_long(cfg, "run.replicas", 1) == 100);
    CHECK(get_string(cfg, "output.directory") == "runs/today");
    CHECK(get_bool(cfg, "engine.follow", false));
    CHECK(get_bool(cfg, "engine.absent", true));
    const auto list = get_double_list(cfg, "scan.gammas");
    REQUIRE(list.size() == 3);
    CHECK(list[2] == 2.0);
    CHECK(get_long(cfg, "run.horizon", 1, 500) == 500);
    CHECK_FALSE(cfg.has("model.beta"));

    CHECK_THROWS_WITH_AS(get_string(cfg, "run.seed"),
                         doctest::Contains("run.seed"), ConfigError);
    CHECK_THROWS_WITH_AS(get_long(cfg, "run.replicas", 200),
                         doctest::Contains("run.replicas"), ConfigError);
    CHECK_THROWS_WITH_AS(get_double(cfg, "output.directory", 0.0),
                         doctest::Contains("output.directory"), ConfigError);
    CHECK_THROWS_AS(parse_config("model.alpha = 0.5\nmodel.alpha = 0.6\n"),
                    ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("just some words\n"),
                         doctest::Contains("line 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("bad key! = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("model.alpha =\n"), ConfigError);

    const auto model = parse_config(
        "model.alpha = 0.25\nmodel.beta = 0.8\nmodel.rho = 0.9\n"
        "model.gamma = 2\n");
    const auto p = params_from_config(model);
    CHECK(p.alpha == 0.25);
    CHECK(p.gamma == 2.0);
    const auto bad = parse_config(
        "model.alpha = 1.25\nmodel.beta = 0.8\nmodel.rho = 0.9\n"
        "model.gamma = 2\n");
    CHECK_THROWS_AS(params_from_config(bad), ConfigError);
}

TEST_CASE("double formatting round-trips exactly") {
    const double cases[] = {0.0,           -0.0,       1.0 / 3.0,
                            0.1,           0.84,       6.02214076e23,
                            5e-324,        -2.5e-11,   3.141592653589793,
                            12.706204736,  1e308,      -7.0};
    for (double v : cases) {
        const std::string s = format_double(v);
        const double back = std::strtod(s.c_str(), nullptr);
        CHECK(back == v);
    }
    CHECK(format_double(0.84) == "0.84");
    CHECK(std::isnan(std::strtod(format_double(std::nan("")).c_str(),
                                 nullptr)));
}

TEST_CASE("output directories are never reused") {
    const auto base = scratch("fresh-dirs");
    const auto d1 = fresh_output_dir(base, "simulate", "20260818-120000");
    const auto d2 = fresh_output_dir(base, "simulate", "20260818-120000");
    CHECK(d1 != d2);
    CHECK(fs::exists(d1));
    CHECK(fs::exists(d2));
    CHECK(d2.filename().string().find("-2") != std::string::npos);
}

TEST_CASE("simulate: smoke run writes trajectories and a summary") {
    const auto dir = scratch("simulate-smoke");
    const auto cfg_path = dir / "run.cfg";
    write_file(cfg_path, base_config((dir / "out").string()));
    const auto r = cli({"simulate", "--config", cfg_path.string()});
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(r.dir));

    const auto traj0 = parse_csv(read_file(r.dir / "trajectory-0000.csv"));
    CHECK(fs::exists(r.dir / "trajectory-0001.csv"));
    CHECK_FALSE(fs::exists(r.dir / "trajectory-0002.csv"));
    REQUIRE(traj0.header ==
            std::vector<std::string>{"k", "X_k", "occ_bit"});
    REQUIRE(traj0.rows.size() == 101);
    CHECK(traj0.rows[0][0] == "0");
    CHECK(traj0.rows[0][1] == "0");
    CHECK(traj0.rows[100][0] == "100");
    CHECK(traj0.rows[100][2].empty());  // endpoint row has no step bit
    for (size_t k = 0; k < 100; ++k) {
        const long long x = std::stoll(traj0.rows[k][1]);
        const long long next = std::stoll(traj0.rows[k + 1][1]);
        CHECK(std::llabs(next - x) == 1);
        CHECK((traj0.rows[k][2] == "0" || traj0.rows[k][2] == "1"));
    }
    // The config is echoed verbatim inside the commented preamble.
    const std::string raw = read_file(r.dir / "trajectory-0000.csv");
    CHECK(raw.find("# model.alpha = 0.7") != std::string::npos);
    CHECK(raw.find("# seed = 7") != std::string::npos);

    const auto summary =
        nlohmann::json::parse(read_file(r.dir / "summary.json"));
    CHECK(summary["command"] == "simulate");
    CHECK(summary["seed"] == 7);
    CHECK(summary["config"] == base_config((dir / "out").string()));
    CHECK(summary["summary"]["n_replicas"] == 2);
    CHECK(summary["summary"]["horizon"] == 100);
    const double v = summary["summary"]["v_direct"];
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
}

TEST_CASE("simulate: reruns are byte-identical apart from timestamps") {
    const auto dir = scratch("simulate-determinism");
    const auto cfg_path = dir / "run.cfg";
    write_file(cfg_path, base_config((dir / "out").string()));
    const auto r1 = cli({"simulate", "--config", cfg_path.string()});
    const auto r2 = cli({"simulate", "--config", cfg_path.string()});
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(r1.dir != r2.dir);
    for (const char* name :
         {"trajectory-0000.csv", "trajectory-0001.csv", "summary.json"}) {
        CHECK(strip_timestamps(read_file(r1.dir / name)) ==
              strip_timestamps(read_file(r2.dir / name)));
    }
    // A different seed changes the sample.
    const auto r3 =
        cli({"simulate", "--config", cfg_path.string(), "--seed", "8"});
    REQUIRE(r3.code == 0);
    CHECK(strip_timestamps(read_file(r1.dir / "trajectory-0000.csv")) !=
          strip_timestamps(read_file(r3.dir / "trajectory-0000.csv")));
}

TEST_CASE("cli: usage and validation exit codes") {
    const auto dir = scratch("exit-codes");
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate", "--config", "x"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"simulate"}).code == 2);  // --config is required
    CHECK(cli({"simulate", "--config", (dir / "missing.cfg").string()}).code ==
          2);

    const auto cfg_path = dir / "zero-replicas.cfg";
    write_file(cfg_path,
               "model.alpha = 0.7\nmodel.beta = 0.7\nmodel.rho = 0.5\n"
               "model.gamma = 0.3\nrun.horizon = 50\nrun.replicas = 0\n"
               "output.directory = " +
                   (dir / "out").string() + "\n");
    const auto r = cli({"simulate", "--config", cfg_path.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("run.replicas") != std::string::npos);

    const auto bad_model = dir / "bad-model.cfg";
    write_file(bad_model,
               "model.alpha = 1.7\nmodel.beta = 0.7\nmodel.rho = 0.5\n"
               "model.gamma = 0.3\nrun.horizon = 50\nrun.replicas = 2\n"
               "output.directory = " +
                   (dir / "out").string() + "\n");
    CHECK(cli({"simulate", "--config", bad_model.string()}).code == 2);

    // A walker that marches off a narrow fixed window is a runtime failure.
    const auto runtime = dir / "runtime.cfg";
    write_file(runtime,
               "model.alpha = 1\nmodel.beta = 1\nmodel.rho = 0.5\n"
               "model.gamma = 0\nmodel.allow_degenerate = true\n"
               "engine.backend = reservoir_window\nengine.extent = 3\n"
               "run.horizon = 10\nrun.replicas = 1\n"
               "output.directory = " +
                   (dir / "out").string() + "\n");
    CHECK(cli({"simulate", "--config", runtime.string()}).code == 3);

    setenv("SEPWALK_THREADS", "zero", 1);
    std::ostringstream out, err;
    const auto cfg_ok = dir / "ok.cfg";
    write_file(cfg_ok, base_config((dir / "out").string()));
    CHECK(run_cli({"simulate", "--config", cfg_ok.string()}, out, err) == 2);
    setenv("SEPWALK_THREADS", "1", 1);
}

TEST_CASE("scan: documented columns, exact round-trip, independent rows") {
    const auto dir = scratch("scan");
    const auto cfg_path = dir / "scan.cfg";
    write_file(cfg_path,
               "model.alpha = 0.7\nmodel.beta = 0.7\nmodel.rho = 0.5\n"
               "model.gamma = 1\nengine.backend = reservoir_window\n"
               "engine.follow = true\nengine.extent = 256\n"
               "engine.record_max_visited = true\n"
               "run.horizon = 400\nrun.replicas = 5\nrun.master_seed = 3\n"
               "scan.gammas = 0.2, 1.0, -4\n"
               "output.directory = " +
                   (dir / "out").string() + "\n");
    const auto r = cli({"scan", "--config", cfg_path.string()});
    REQUIRE(r.code == 0);

    const auto csv = parse_csv(read_file(r.dir / "scan.csv"));
    REQUIRE(csv.header ==
            std::vector<std::string>{"gamma", "v_direct", "v_lo", "v_hi",
                                     "v_renewal", "sigma2", "n_renewals",
                                     "ks_stat"});
    REQUIRE(csv.rows.size() == 3);
    for (const auto& row : csv.rows) {
        REQUIRE(row.size() == 8);
        for (const auto& cell : row) {
            if (cell == "nan") continue;
            // Every numeric cell reparses to the identical double.
            const double v = std::strtod(cell.c_str(), nullptr);
            CHECK(format_double(v) == cell);
        }
    }
    const double v0 = std::strtod(csv.rows[0][1].c_str(), nullptr);
    CHECK(std::abs(v0 - 0.4) < 0.2);

    const auto rows_json =
        nlohmann::json::parse(read_file(r.dir / "rows.json"));
    REQUIRE(rows_json["rows"].size() == 3);
    CHECK(rows_json["rows"][0]["ok"] == true);
    CHECK(rows_json["rows"][1]["ok"] == true);
    CHECK(rows_json["rows"][2]["ok"] == false);
    const std::string msg = rows_json["rows"][2]["error"];
    CHECK(!msg.empty());
}

TEST_CASE("renewal: record files plus pooled diagnostics") {
    const auto dir = scratch("renewal");
    const auto cfg_path = dir / "renewal.cfg";
    write_file(cfg_path,
               "model.alpha = 0.6\nmodel.beta = 0.8\nmodel.rho = 0.5\n"
               "model.gamma = 0.1\nengine.backend = reservoir_window\n"
               "engine.follow = true\nengine.extent = 1024\n"
               "run.horizon = 4000\nrun.replicas = 2\nrun.master_seed = 5\n"
               "output.directory = " +
                   (dir / "out").string() + "\n");
    const auto r = cli({"renewal", "--config", cfg_path.string()});
    REQUIRE(r.code == 0);

    const auto rec0 = parse_csv(read_file(r.dir / "renewal-0000.csv"));
    REQUIRE(rec0.header ==
            std::vector<std::string>{"k", "tau", "X_tau", "dt", "dX",
                                     "provisional"});
    CHECK(rec0.rows.size() >= 20);
    CHECK(rec0.rows[0][0] == "0");
    CHECK(rec0.rows[0][3] == "0");  // first record carries no gap
    CHECK(fs::exists(r.dir / "renewal-0001.csv"));

    const auto diag =
        nlohmann::json::parse(read_file(r.dir / "diagnostics.json"));
    CHECK(diag["cone_source"] == "estimated");
    CHECK(diag["cone_slope"].get<double>() > 0.0);
    REQUIRE(diag["replicas"].size() == 2);
    CHECK(diag["replicas"][0]["n_records"].get<long long>() >= 20);
    REQUIRE(!diag["pooled"].is_null());
    const double v_hat = diag["pooled"]["v_hat"];
    CHECK(v_hat > 0.2);
    CHECK(v_hat < 0.6);
    CHECK(diag["pooled"]["n_used"].get<long long>() >= 30);
    REQUIRE(!diag["iid"].is_null());
    const double perm_p = diag["iid"]["perm_p_dt"];
    CHECK(perm_p >= 0.0);
    CHECK(perm_p <= 1.0);
    CHECK(diag["iid"]["dt_tail"].size() >= 1);

    // Regeneration detection needs label tracking, which a fixed reservoir
    // window cannot provide.
    const auto fixed = dir / "fixed-window.cfg";
    write_file(fixed,
               "model.alpha = 0.6\nmodel.beta = 0.8\nmodel.rho = 0.5\n"
               "model.gamma = 0.1\nengine.backend = reservoir_window\n"
               "run.horizon = 400\nrun.replicas = 1\n"
               "output.directory = " +
                   (dir / "out").string() + "\n");
    const auto r2 = cli({"renewal", "--config", fixed.string()});
    CHECK(r2.code == 2);
    CHECK(r2.err.find("engine.follow") != std::string::npos);
}

TEST_CASE("traps: dissipation tables and median scaling") {
    const auto dir = scratch("traps");
    const auto cfg_path = dir / "traps.cfg";
    write_file(cfg_path,
               "model.alpha = 0.5\nmodel.beta = 0.5\nmodel.rho = 0.5\n"
               "model.gamma = 1\nrun.replicas = 60\nrun.master_seed = 9\n"
               "traps.l = 4, 8\ntraps.j = 2\ntraps.t_points = 8\n"
               "traps.t_max_factor = 8\n"
               "output.directory = " +
                   (dir / "out").string() + "\n");
    const auto r = cli({"traps", "--config", cfg_path.string()});
    REQUIRE(r.code == 0);

    for (const char* name : {"dissipation-l4.csv", "dissipation-l8.csv"}) {
        const auto csv = parse_csv(read_file(r.dir / name));
        REQUIRE(csv.header ==
                std::vector<std::string>{"t", "prob", "ci_lo", "ci_hi"});
        REQUIRE(csv.rows.size() == 8);
        double prev_t = 0.0;
        for (const auto& row : csv.rows) {
            const double t = std::strtod(row[0].c_str(), nullptr);
            const double p = std::strtod(row[1].c_str(), nullptr);
            const double lo = std::strtod(row[2].c_str(), nullptr);
            const double hi = std::strtod(row[3].c_str(), nullptr);
            CHECK(t > prev_t);
            prev_t = t;
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            CHECK(lo <= p);
            CHECK(p <= hi);
        }
    }
    const auto med = nlohmann::json::parse(read_file(r.dir / "medians.json"));
    REQUIRE(med["rows"].size() == 2);
    CHECK(med["rows"][0]["l"] == 4);
    CHECK(med["rows"][0]["median_first_good"].get<double>() > 0.0);
    CHECK(med["rows"][1]["median_first_good"].get<double>() > 0.0);
    CHECK(!med["median_exponent"].is_null());
}

TEST_CASE("kernel-check: invariants hold and tables match the library") {
    const auto dir = scratch("kernel");
    const auto cfg_path = dir / "kernel.cfg";
    write_file(cfg_path,
               "model.alpha = 0.5\nmodel.beta = 0.5\nmodel.rho = 0.5\n"
               "model.gamma = 0.5\nkernel.t = 2\nkernel.radius = 30\n"
               "kernel.concentration_L = 10\nkernel.concentration_t = 1\n"
               "kernel.concentration_a = 0.04, 0.05, 0.06\n"
               "kernel.concentration_replicas = 2000\n"
               "output.directory = " +
                   (dir / "out").string() + "\n");
    const auto r = cli({"kernel-check", "--config", cfg_path.string()});
    REQUIRE(r.code == 0);

    const auto checks =
        nlohmann::json::parse(read_file(r.dir / "checks.json"));
    CHECK(checks["mass_error"].get<double>() < 1e-10);
    CHECK(checks["symmetry_error"].get<double>() < 1e-12);
    CHECK(checks["semigroup_error"].get<double>() < 1e-10);
    CHECK(checks["concentration_c_hat"].get<double>() > 0.0);

    const auto csv = parse_csv(read_file(r.dir / "kernel.csv"));
    REQUIRE(csv.header == std::vector<std::string>{"x", "value"});
    REQUIRE(csv.rows.size() == 61);
    const double center = std::strtod(csv.rows[30][1].c_str(), nullptr);
    CHECK(center == doctest::Approx(heat_kernel(0.5, 2.0, 0)).epsilon(1e-12));

    const auto conc = parse_csv(read_file(r.dir / "concentration.csv"));
    REQUIRE(conc.rows.size() == 3);
    double prev = 2.0;
    for (const auto& row : conc.rows) {
        const double freq = std::strtod(row[1].c_str(), nullptr);
        CHECK(freq <= prev);
        prev = freq;
    }
}

TEST_CASE("static: classification and exit tables, generated and from file") {
    const auto dir = scratch("static");
    const auto cfg_path = dir / "static.cfg";
    write_file(cfg_path,
               "model.alpha = 0.25\nmodel.beta = 0.99999\nmodel.rho = 0.9\n"
               "model.gamma = 0\nstatic.sites = 2001\nstatic.depth = 20\n"
               "run.master_seed = 13\n"
               "output.directory = " +
                   (dir / "out").string() + "\n");
    const auto r = cli({"static", "--config", cfg_path.string()});
    REQUIRE(r.code == 0);

    const auto cls =
        nlohmann::json::parse(read_file(r.dir / "classification.json"));
    CHECK(cls["classification"] == "transient-right-subballistic");
    CHECK(cls["log_slope"].get<double>() < 0.0);
    CHECK(cls["mean_ratio"].get<double>() > 1.0);
    CHECK(cls["environment_sites"] == 2001);
    CHECK(cls["annealed"]["classification"] == "mixed-regime");

    const auto probs = parse_csv(read_file(r.dir / "exit-probs.csv"));
    REQUIRE(probs.rows.size() == 20);
    double prev = 1.0;
    for (const auto& row : probs.rows) {
        const double p = std::strtod(row[1].c_str(), nullptr);
        CHECK(p > 0.0);
        CHECK(p <= prev);  // deeper exits are harder
        prev = p;
    }

    // 2001 probabilities, one per line, all in (0,1).
    std::istringstream env(read_file(r.dir / "environment.txt"));
    std::string line;
    long count = 0;
    while (std::getline(env, line)) {
        const double w = std::strtod(line.c_str(), nullptr);
        CHECK(w > 0.0);
        CHECK(w < 1.0);
        ++count;
    }
    CHECK(count == 2001);

    // Frozen homogeneous environment from a file: gambler's ruin numbers.
    const auto env_path = dir / "flat.env";
    write_file(env_path,
               "0.75\n0.75\n0.75\n0.75\n0.75\n0.75\n0.75\n0.75\n0.75\n");
    const auto file_cfg = dir / "static-file.cfg";
    write_file(file_cfg,
               "model.alpha = 0.75\nmodel.beta = 0.75\nmodel.rho = 0.5\n"
               "model.gamma = 0\nstatic.env_file = " +
                   env_path.string() + "\nstatic.depth = 10\n" +
                   "output.directory = " + (dir / "out").string() + "\n");
    const auto r2 = cli({"static", "--config", file_cfg.string()});
    REQUIRE(r2.code == 0);
    const auto probs2 = parse_csv(read_file(r2.dir / "exit-probs.csv"));
    REQUIRE(probs2.rows.size() == 4);  // clamped to the file's span
    const double p3 = std::strtod(probs2.rows[2][1].c_str(), nullptr);
    CHECK(p3 == doctest::Approx(0.025).epsilon(1e-12));

    const auto bad_env = dir / "broken.env";
    write_file(bad_env, "0.5\n0.5x\n");
    const auto bad_cfg = dir / "static-bad.cfg";
    write_file(bad_cfg,
               "model.alpha = 0.75\nmodel.beta = 0.75\nmodel.rho = 0.5\n"
               "model.gamma = 0\nstatic.env_file = " +
                   bad_env.string() + "\noutput.directory = " +
                   (dir / "out").string() + "\n");
    CHECK(cli({"static", "--config", bad_cfg.string()}).code == 2);
}

TEST_CASE("output overrides: --out and output.formats") {
    const auto dir = scratch("overrides");
    const auto cfg_path = dir / "run.cfg";
    write_file(cfg_path, base_config((dir / "out").string()));
    const auto elsewhere = dir / "elsewhere";
    const auto r = cli({"simulate", "--config", cfg_path.string(), "--out",
                        elsewhere.string()});
    REQUIRE(r.code == 0);
    CHECK(r.dir.parent_path() == elsewhere);

    const auto json_only = dir / "json-only.cfg";
    write_file(json_only, base_config((dir / "out").string()) +
                              "output.formats = json\n");
    const auto r2 = cli({"simulate", "--config", json_only.string()});
    REQUIRE(r2.code == 0);
    CHECK(fs::exists(r2.dir / "summary.json"));
    CHECK_FALSE(fs::exists(r2.dir / "trajectory-0000.csv"));

    const auto bad_fmt = dir / "bad-fmt.cfg";
    write_file(bad_fmt, base_config((dir / "out").string()) +
                            "output.formats = parquet\n");
    CHECK(cli({"simulate", "--config", bad_fmt.string()}).code == 2);
}
