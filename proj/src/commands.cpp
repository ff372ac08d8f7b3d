#include "sepwalk/commands.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sepwalk/config.hpp"
#include "sepwalk/errors.hpp"
#include "sepwalk/estimators.hpp"
#include "sepwalk/heat_kernel.hpp"
#include "sepwalk/io.hpp"
#include "sepwalk/renewal.hpp"
#include "sepwalk/rng.hpp"
#include "sepwalk/static_rwre.hpp"
#include "sepwalk/walker.hpp"

namespace sepwalk {

namespace {

using nlohmann::ordered_json;

std::string zpad(long long v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*lld", width, v);
    return buf;
}

struct Formats {
    bool csv = true;
    bool json = true;
};

Formats formats_from(const Config& cfg) {
    const std::string raw = get_string(cfg, "output.formats", "csv,json");
    Formats f{false, false};
    std::istringstream in(raw);
    std::string token;
    while (std::getline(in, token, ',')) {
        token.erase(0, token.find_first_not_of(" \t"));
        const size_t last = token.find_last_not_of(" \t");
        token.resize(last == std::string::npos ? 0 : last + 1);
        if (token == "csv") {
            f.csv = true;
        } else if (token == "json") {
            f.json = true;
        } else {
            throw ConfigError("config key 'output.formats': unknown format '" +
                              token + "'");
        }
    }
    if (!f.csv && !f.json) {
        throw ConfigError("config key 'output.formats': empty");
    }
    return f;
}

Backend backend_from(const Config& cfg) {
    const std::string b = get_string(cfg, "engine.backend", "torus");
    if (b == "torus") return Backend::torus;
    if (b == "reservoir_window") return Backend::reservoir_window;
    throw ConfigError("config key 'engine.backend': unknown backend '" + b +
                      "'");
}

RunOptions engine_from(const Config& cfg, bool default_record) {
    RunOptions o;
    o.backend = backend_from(cfg);
    o.extent = get_long(cfg, "engine.extent", 3, 0);
    o.follow_walker = get_bool(cfg, "engine.follow", false);
    o.record_max_visited =
        get_bool(cfg, "engine.record_max_visited", default_record);
    if (o.follow_walker && o.backend != Backend::reservoir_window) {
        throw ConfigError(
            "config key 'engine.follow': needs engine.backend = "
            "reservoir_window");
    }
    return o;
}

SummaryOptions summary_from(const Config& cfg) {
    SummaryOptions s;
    s.level = get_double(cfg, "summary.level", 1e-9, s.level);
    if (s.level >= 1.0) {
        throw ConfigError("config key 'summary.level': must lie in (0, 1)");
    }
    s.try_renewal = get_bool(cfg, "summary.try_renewal", s.try_renewal);
    s.cone_slope = get_double(cfg, "summary.cone_slope", 0.0, s.cone_slope);
    s.fwd_horizon = get_long(cfg, "summary.fwd_horizon", 1, s.fwd_horizon);
    s.guard = get_long(cfg, "summary.guard", 0, s.guard);
    return s;
}

ordered_json interval_json(const Interval& iv) {
    return ordered_json{iv.lo, iv.hi};
}

void cmd_simulate(const Config& cfg, const RunMeta& meta,
                  const std::filesystem::path& dir, const Formats& fmts) {
    const auto params = params_from_config(cfg);
    const auto opts = engine_from(cfg, false);
    const long long horizon = get_long(cfg, "run.horizon", 1);
    const long long replicas = get_long(cfg, "run.replicas", 1);
    const auto ens = run_replicas(params, replicas, horizon, meta.seed, opts,
                                  meta.threads);
    if (fmts.csv) {
        for (long long i = 0; i < replicas; ++i) {
            write_trajectory_csv(dir / ("trajectory-" + zpad(i, 4) + ".csv"),
                                 meta, ens.trajectories[i]);
        }
    }
    if (fmts.json) {
        auto j = meta_json(meta);
        if (replicas >= 2) {
            j["summary"] = summary_to_json(summarize_replicas(
                ens.trajectories, ens.records, summary_from(cfg)));
        } else {
            // One replica carries no spread; report the point estimate only.
            ordered_json s;
            s["n_replicas"] = 1;
            s["horizon"] = horizon;
            s["v_direct"] =
                static_cast<double>(ens.trajectories[0].positions.back()) /
                static_cast<double>(horizon);
            j["summary"] = s;
        }
        write_json_file(dir / "summary.json", j);
    }
}

void cmd_scan(const Config& cfg, const RunMeta& meta,
              const std::filesystem::path& dir, const Formats& fmts) {
    const auto base = params_from_config(cfg);
    const auto gammas = get_double_list(cfg, "scan.gammas");
    ScanOptions so;
    so.horizon = get_long(cfg, "run.horizon", 1);
    so.replicas = get_long(cfg, "run.replicas", 1);
    so.master_seed = meta.seed;
    so.run = engine_from(cfg, false);
    so.summary = summary_from(cfg);
    so.threads = meta.threads;
    const auto rows = gamma_scan(base, gammas, so);
    if (fmts.csv) write_scan_csv(dir / "scan.csv", meta, rows);
    if (fmts.json) {
        auto j = meta_json(meta);
        auto arr = ordered_json::array();
        for (const auto& row : rows) {
            ordered_json r;
            r["gamma"] = row.gamma;
            r["ok"] = row.ok;
            if (row.ok) {
                r["summary"] = summary_to_json(row.stats);
            } else {
                r["error"] = row.error;
            }
            arr.push_back(std::move(r));
        }
        j["rows"] = std::move(arr);
        write_json_file(dir / "rows.json", j);
    }
}

void cmd_renewal(const Config& cfg, const RunMeta& meta,
                 const std::filesystem::path& dir, const Formats& fmts) {
    const auto params = params_from_config(cfg);
    const auto opts = engine_from(cfg, true);
    if (opts.backend == Backend::reservoir_window && !opts.follow_walker) {
        throw ConfigError(
            "config key 'engine.follow': regeneration detection on "
            "reservoir_window needs a following window");
    }
    const long long horizon = get_long(cfg, "run.horizon", 1);
    const long long replicas = get_long(cfg, "run.replicas", 1);
    const double cone_in = get_double(cfg, "renewal.cone_slope", 0.0, 0.0);
    const long long fwd = get_long(cfg, "renewal.horizon", 1, 300);
    const long long guard = get_long(cfg, "renewal.guard", 0, 300);
    const double level = get_double(cfg, "renewal.level", 1e-9, 0.95);
    if (level >= 1.0) {
        throw ConfigError("config key 'renewal.level': must lie in (0, 1)");
    }

    const auto ens = run_replicas(params, replicas, horizon, meta.seed, opts,
                                  meta.threads);
    ConeParams cone;
    if (cone_in > 0.0) {
        cone.slope = cone_in;
        cone.source = ConeParams::Source::user;
    } else {
        double pilot = 0.0;
        for (const auto& t : ens.trajectories) {
            pilot += static_cast<double>(t.positions.back());
        }
        pilot /= static_cast<double>(replicas) * static_cast<double>(horizon);
        cone = default_cone(pilot);
    }

    std::vector<std::vector<RenewalRecord>> per_run;
    per_run.reserve(replicas);
    for (long long i = 0; i < replicas; ++i) {
        try {
            per_run.push_back(extract_renewals(ens.trajectories[i],
                                               ens.records[i], cone, fwd,
                                               guard));
        } catch (const NoRenewalFound&) {
            per_run.emplace_back();
        }
        if (fmts.csv) {
            write_renewal_csv(dir / ("renewal-" + zpad(i, 4) + ".csv"), meta,
                              per_run.back());
        }
    }

    if (!fmts.json) return;
    auto j = meta_json(meta);
    j["cone_slope"] = cone.slope;
    j["cone_source"] =
        cone.source == ConeParams::Source::user ? "user" : "estimated";
    auto arr = ordered_json::array();
    long long best = 0, best_count = -1;
    for (long long i = 0; i < replicas; ++i) {
        long long nonprov = 0;
        for (const auto& r : per_run[i]) nonprov += !r.provisional;
        ordered_json r;
        r["replica"] = i;
        r["n_records"] = per_run[i].size();
        r["n_nonprovisional"] = nonprov;
        arr.push_back(std::move(r));
        if (nonprov > best_count) {
            best_count = nonprov;
            best = i;
        }
    }
    j["replicas"] = std::move(arr);

    try {
        const auto est = renewal_estimates(per_run, level);
        ordered_json p;
        p["v_hat"] = est.v_hat;
        p["v_ci"] = interval_json(est.v_ci);
        p["sigma2_hat"] = est.sigma2_hat;
        p["sigma2_ci"] = interval_json(est.sigma2_ci);
        p["n_records"] = est.n_records;
        p["n_used"] = est.n_used;
        j["pooled"] = std::move(p);
    } catch (const InsufficientRecords&) {
        j["pooled"] = nullptr;
    }

    try {
        const auto iid =
            renewal_iid_tests(per_run[best], split_seed(meta.seed, 9001));
        ordered_json d;
        d["replica"] = best;
        d["dx_lag1_corr"] = iid.dx_lag1.corr;
        d["dx_lag1_z"] = iid.dx_lag1.z;
        d["dt_lag1_corr"] = iid.dt_lag1.corr;
        d["dt_lag1_z"] = iid.dt_lag1.z;
        d["perm_p_dx"] = iid.perm_p_dx;
        d["perm_p_dt"] = iid.perm_p_dt;
        auto tail = ordered_json::array();
        for (const auto& tp : iid.dt_tail) {
            tail.push_back(ordered_json{
                {"n", tp.n}, {"empirical", tp.empirical}, {"guide", tp.guide}});
        }
        d["dt_tail"] = std::move(tail);
        j["iid"] = std::move(d);
    } catch (const InsufficientRecords&) {
        j["iid"] = nullptr;
    }
    write_json_file(dir / "diagnostics.json", j);
}

void cmd_traps(const Config& cfg, const RunMeta& meta,
               const std::filesystem::path& dir, const Formats& fmts) {
    const auto params = params_from_config(cfg);
    if (params.gamma <= 0.0) {
        throw ConfigError(
            "config key 'model.gamma': trap relaxation needs a positive "
            "swap rate");
    }
    const auto l_raw = get_double_list(cfg, "traps.l");
    std::vector<long> halfwidths;
    for (double v : l_raw) {
        if (v < 1.0 || v != std::floor(v)) {
            throw ConfigError(
                "config key 'traps.l': entries must be positive integers");
        }
        halfwidths.push_back(static_cast<long>(v));
    }
    const long long j_cfg = get_long(cfg, "traps.j", 1, 0);
    const long long points = get_long(cfg, "traps.t_points", 2, 16);
    const double factor = get_double(cfg, "traps.t_max_factor", 1e-9, 3.0);
    const long long replicas = get_long(cfg, "run.replicas", 1);

    auto j = meta_json(meta);
    auto rows_out = ordered_json::array();
    std::vector<double> log_l, log_median;
    for (size_t li = 0; li < halfwidths.size(); ++li) {
        const long l = halfwidths[li];
        const long J =
            j_cfg > 0 ? static_cast<long>(j_cfg) : std::max(1L, l / 2);
        const double t_max =
            factor * static_cast<double>(l) * static_cast<double>(l) /
            params.gamma;
        std::vector<double> grid;
        for (long long k = 1; k <= points; ++k) {
            grid.push_back(t_max * static_cast<double>(k) /
                           static_cast<double>(points));
        }
        const auto res =
            dissipation_check(l, J, params, grid, replicas,
                              split_seed(meta.seed, static_cast<uint64_t>(li)));
        if (fmts.csv) {
            std::vector<std::vector<double>> table;
            for (const auto& row : res.rows) {
                table.push_back({row.t, row.prob_bad, row.ci_lo, row.ci_hi});
            }
            write_table_csv(dir / ("dissipation-l" + std::to_string(l) +
                                   ".csv"),
                            meta, {"t", "prob", "ci_lo", "ci_hi"}, table);
        }
        ordered_json r;
        r["l"] = l;
        r["J"] = J;
        r["median_first_good"] = res.median_first_good;
        rows_out.push_back(std::move(r));
        if (res.median_first_good > 0.0) {
            log_l.push_back(std::log(static_cast<double>(l)));
            log_median.push_back(std::log(res.median_first_good));
        }
    }
    j["rows"] = std::move(rows_out);
    if (log_l.size() >= 2) {
        j["median_exponent"] = fit_line(log_l, log_median).slope;
    } else {
        j["median_exponent"] = nullptr;
    }
    if (fmts.json) write_json_file(dir / "medians.json", j);
}

void cmd_kernel_check(const Config& cfg, const RunMeta& meta,
                      const std::filesystem::path& dir, const Formats& fmts) {
    const auto params = params_from_config(cfg);
    const double t = get_double(cfg, "kernel.t", 0.0);
    const double gamma = get_double(cfg, "kernel.gamma", 0.0, params.gamma);
    const long long user_radius = get_long(cfg, "kernel.radius", 1, 0);

    const auto table = kernel_table(gamma, t);
    const long long r_out =
        user_radius > 0 ? std::min(user_radius, table.radius)
                        : std::min<long long>(table.radius, 400);
    if (fmts.csv) {
        std::vector<std::vector<double>> rows;
        for (long long x = -r_out; x <= r_out; ++x) {
            rows.push_back({static_cast<double>(x), table.at(x)});
        }
        write_table_csv(dir / "kernel.csv", meta, {"x", "value"}, rows);
    }

    double mass = 0.0;
    for (double v : table.values) mass += v;
    double symmetry = 0.0;
    for (long long x = 1; x <= table.radius; ++x) {
        symmetry = std::max(symmetry, std::abs(table.at(x) - table.at(-x)));
    }
    const auto half = kernel_table(gamma, t / 2.0);
    double semigroup = 0.0;
    const long long check_r = std::min<long long>(table.radius, 60);
    for (long long x = -check_r; x <= check_r; ++x) {
        double conv = 0.0;
        for (long long y = -half.radius; y <= half.radius; ++y) {
            conv += half.at(y) * half.at(x - y);
        }
        semigroup = std::max(semigroup, std::abs(conv - table.at(x)));
    }

    auto j = meta_json(meta);
    j["gamma"] = gamma;
    j["t"] = t;
    j["radius"] = table.radius;
    j["truncation_eps"] = table.truncation_eps;
    j["mass_error"] = std::abs(mass - 1.0);
    j["symmetry_error"] = symmetry;
    j["semigroup_error"] = semigroup;

    if (cfg.has("kernel.concentration_L")) {
        const long long L = get_long(cfg, "kernel.concentration_L", 1);
        const double tc = get_double(cfg, "kernel.concentration_t", 0.0, t);
        const auto a_grid = get_double_list(cfg, "kernel.concentration_a");
        const long long reps =
            get_long(cfg, "kernel.concentration_replicas", 1000, 2000);
        const auto conc = concentration_check(
            params, static_cast<long>(L), tc, a_grid,
            static_cast<long>(reps), split_seed(meta.seed, 101));
        if (fmts.csv) {
            std::vector<std::vector<double>> rows;
            for (const auto& row : conc.rows) {
                rows.push_back({row.a, row.freq});
            }
            write_table_csv(dir / "concentration.csv", meta, {"a", "freq"},
                            rows);
        }
        j["concentration_c_hat"] = conc.c_hat;
        j["concentration_replicas"] = conc.replicas;
    }
    if (fmts.json) write_json_file(dir / "checks.json", j);
}

void cmd_static(const Config& cfg, const RunMeta& meta,
                const std::filesystem::path& dir, const Formats& fmts) {
    const auto params = params_from_config(cfg);
    const auto cls = static_classify(params);
    const auto report = regime_report(params);

    std::vector<double> omega;
    bool generated = false;
    if (cfg.has("static.env_file")) {
        omega = read_env_file(get_string(cfg, "static.env_file"));
    } else {
        const long long sites = get_long(cfg, "static.sites", 3, 4001);
        Rng rng(split_seed(meta.seed, 1));
        std::vector<uint8_t> bits(static_cast<size_t>(sites));
        for (auto& b : bits) b = rng.next_bernoulli(params.rho) ? 1 : 0;
        omega = omega_from_bits(params, bits);
        generated = true;
    }
    write_env_file(dir / "environment.txt", omega);

    const long long span_lo =
        -static_cast<long long>(omega.size()) / 2;
    const auto pot = potential(omega, span_lo);
    if (pot.span_hi < 1) {
        throw ConfigError(
            "config key 'static.env_file': environment too small to exit "
            "rightward");
    }
    long long depth = get_long(cfg, "static.depth", 1, 30);
    depth = std::min(depth, -pot.span_lo);
    if (depth < 1) {
        throw ConfigError(
            "config key 'static.depth': environment has no sites left of "
            "the origin");
    }
    if (fmts.csv) {
        std::vector<std::vector<double>> rows;
        for (long long d = 1; d <= depth; ++d) {
            rows.push_back({static_cast<double>(d), exit_left_prob(pot, d)});
        }
        write_table_csv(dir / "exit-probs.csv", meta,
                        {"depth", "exit_left_prob"}, rows);
    }
    if (fmts.json) {
        auto j = meta_json(meta);
        j["classification"] = regime_name(cls.regime);
        j["log_slope"] = cls.log_slope;
        j["mean_ratio"] = cls.mean_ratio;
        j["mean_ratio_inv"] = cls.mean_ratio_inv;
        j["boundary"] = cls.boundary;
        j["annealed"] = ordered_json::parse(to_json(report));
        j["environment_sites"] = omega.size();
        j["environment_generated"] = generated;
        j["exit_depth"] = depth;
        write_json_file(dir / "classification.json", j);
    }
}

int resolve_threads() {
    const char* raw = std::getenv("SEPWALK_THREADS");
    if (raw == nullptr || *raw == '\0') {
        const unsigned hc = std::thread::hardware_concurrency();
        return hc == 0 ? 1 : static_cast<int>(hc);
    }
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (end == raw || *end != '\0' || errno == ERANGE || v < 1 || v > 4096) {
        throw ConfigError(
            "SEPWALK_THREADS must be a positive integer (thread count)");
    }
    return static_cast<int>(v);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{
        "Monte Carlo toolkit for a random walk driven by particle "
        "exclusion dynamics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    uint64_t seed_override = 0;
    const struct {
        const char* name;
        const char* desc;
    } cmds[] = {
        {"simulate", "run a replica ensemble, persist trajectories and a "
                     "summary"},
        {"scan", "sweep the swap rate and tabulate velocity estimates"},
        {"renewal", "extract regeneration records and their diagnostics"},
        {"traps", "measure how planted particle blocks dissipate"},
        {"kernel-check", "tabulate the lattice heat kernel and verify its "
                         "invariants"},
        {"static", "classify the frozen-environment walk and tabulate exit "
                   "odds"},
    };
    for (const auto& c : cmds) {
        auto* sub = app.add_subcommand(c.name, c.desc);
        sub->add_option("--config", config_path, "scenario file")->required();
        sub->add_option("--seed", seed_override, "override run.master_seed");
        sub->add_option("--out", out_dir, "override output.directory");
    }

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("sepwalk");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().at(0);
    const std::string command = sub->get_name();
    try {
        const Config cfg = load_config(config_path);
        RunMeta meta;
        meta.command = command;
        meta.config_text = cfg.raw_text;
        meta.timestamp = utc_stamp();
        meta.seed = sub->count("--seed") > 0
                        ? seed_override
                        : static_cast<uint64_t>(
                              get_long(cfg, "run.master_seed", 0, 1));
        meta.threads = resolve_threads();
        const Formats fmts = formats_from(cfg);
        const std::string base = sub->count("--out") > 0
                                     ? out_dir
                                     : get_string(cfg, "output.directory",
                                                  "out");
        const auto dir = fresh_output_dir(base, command, meta.timestamp);
        if (command == "simulate") {
            cmd_simulate(cfg, meta, dir, fmts);
        } else if (command == "scan") {
            cmd_scan(cfg, meta, dir, fmts);
        } else if (command == "renewal") {
            cmd_renewal(cfg, meta, dir, fmts);
        } else if (command == "traps") {
            cmd_traps(cfg, meta, dir, fmts);
        } else if (command == "kernel-check") {
            cmd_kernel_check(cfg, meta, dir, fmts);
        } else {
            cmd_static(cfg, meta, dir, fmts);
        }
        out << dir.string() << "\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace sepwalk
