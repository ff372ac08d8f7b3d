#include "sepwalk/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "sepwalk/errors.hpp"

namespace sepwalk {

namespace {

std::string join_csv(const std::vector<std::string>& cells) {
    std::string line;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    line += '\n';
    return line;
}

std::string format_long(long long v) { return std::to_string(v); }

}  // namespace

std::string utc_stamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

std::filesystem::path fresh_output_dir(const std::filesystem::path& base,
                                       const std::string& command,
                                       const std::string& stamp) {
    std::error_code ec;
    std::filesystem::create_directories(base, ec);
    if (ec) {
        throw IoError("cannot create output base '" + base.string() +
                      "': " + ec.message());
    }
    const std::string stem = command + "-" + stamp;
    std::filesystem::path dir = base / stem;
    for (int n = 2; std::filesystem::exists(dir); ++n) {
        dir = base / (stem + "-" + std::to_string(n));
    }
    std::filesystem::create_directory(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + dir.string() +
                      "': " + ec.message());
    }
    return dir;
}

std::string format_double(double v) {
    // 17 significant digits always round-trip; prefer the shorter forms when
    // they already parse back exactly.
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        const double back = std::strtod(buf, nullptr);
        if (back == v || (std::isnan(back) && std::isnan(v))) return buf;
    }
    return buf;
}

std::string csv_preamble(const RunMeta& meta) {
    std::string out;
    out += "# command = " + meta.command + "\n";
    out += "# seed = " + std::to_string(meta.seed) + "\n";
    out += "# threads = " + std::to_string(meta.threads) + "\n";
    out += "# timestamp = " + meta.timestamp + "\n";
    out += "# config-begin\n";
    std::istringstream in(meta.config_text);
    std::string line;
    while (std::getline(in, line)) out += "# " + line + "\n";
    out += "# config-end\n";
    return out;
}

nlohmann::ordered_json meta_json(const RunMeta& meta) {
    nlohmann::ordered_json j;
    j["command"] = meta.command;
    j["seed"] = meta.seed;
    j["threads"] = meta.threads;
    j["timestamp"] = meta.timestamp;
    j["config"] = meta.config_text;
    return j;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for write");
    out << content;
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_json_file(const std::filesystem::path& path,
                     const nlohmann::ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const RunMeta& meta, const Trajectory& traj) {
    std::string out = csv_preamble(meta);
    out += "k,X_k,occ_bit\n";
    const size_t n = traj.positions.size();
    for (size_t k = 0; k < n; ++k) {
        out += format_long(static_cast<long long>(k)) + ',' +
               format_long(traj.positions[k]) + ',';
        if (k < traj.observations.size()) {
            out += traj.observations[k] ? '1' : '0';
        }
        out += '\n';
    }
    write_text_file(path, out);
}

void write_scan_csv(const std::filesystem::path& path, const RunMeta& meta,
                    const std::vector<ScanRow>& rows) {
    std::string out = csv_preamble(meta);
    out += "gamma,v_direct,v_lo,v_hi,v_renewal,sigma2,n_renewals,ks_stat\n";
    const std::string nan = "nan";
    for (const auto& row : rows) {
        std::vector<std::string> cells;
        cells.push_back(format_double(row.gamma));
        if (row.ok) {
            const auto& s = row.stats;
            cells.push_back(format_double(s.v_direct));
            cells.push_back(format_double(s.v_direct_ci.lo));
            cells.push_back(format_double(s.v_direct_ci.hi));
            cells.push_back(s.has_renewal ? format_double(s.v_renewal) : nan);
            cells.push_back(format_double(s.sigma2));
            cells.push_back(format_long(s.n_renewals));
            cells.push_back(s.has_clt ? format_double(s.ks_stat) : nan);
        } else {
            for (int i = 0; i < 5; ++i) cells.push_back(nan);
            cells.push_back("0");
            cells.push_back(nan);
        }
        out += join_csv(cells);
    }
    write_text_file(path, out);
}

void write_renewal_csv(const std::filesystem::path& path, const RunMeta& meta,
                       const std::vector<RenewalRecord>& records) {
    std::string out = csv_preamble(meta);
    out += "k,tau,X_tau,dt,dX,provisional\n";
    for (size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        out += join_csv({format_long(static_cast<long long>(k)),
                         format_long(r.tau), format_long(r.x_tau),
                         format_long(r.dt_prev), format_long(r.dx_prev),
                         r.provisional ? "1" : "0"});
    }
    write_text_file(path, out);
}

void write_table_csv(const std::filesystem::path& path, const RunMeta& meta,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows) {
    std::string out = csv_preamble(meta);
    out += join_csv(columns);
    for (const auto& row : rows) {
        if (row.size() != columns.size()) {
            throw ParamError("table row width does not match column count");
        }
        std::vector<std::string> cells;
        cells.reserve(row.size());
        for (double v : row) cells.push_back(format_double(v));
        out += join_csv(cells);
    }
    write_text_file(path, out);
}

nlohmann::ordered_json summary_to_json(const SummaryStats& s) {
    nlohmann::ordered_json j;
    j["n_replicas"] = s.n_replicas;
    j["horizon"] = s.horizon;
    j["v_direct"] = s.v_direct;
    j["v_direct_ci"] = {s.v_direct_ci.lo, s.v_direct_ci.hi};
    j["has_renewal"] = s.has_renewal;
    if (s.has_renewal) {
        j["v_renewal"] = s.v_renewal;
        j["v_renewal_ci"] = {s.v_renewal_ci.lo, s.v_renewal_ci.hi};
        j["n_renewals"] = s.n_renewals;
    }
    j["sigma2"] = s.sigma2;
    j["sigma2_ci"] = {s.sigma2_ci.lo, s.sigma2_ci.hi};
    j["sigma2_source"] = s.sigma2_source;
    j["has_clt"] = s.has_clt;
    if (s.has_clt) {
        j["scaling_exponent"] = s.scaling_exponent;
        j["scaling_degenerate"] = s.scaling_degenerate;
        j["ks_stat"] = s.ks_stat;
        j["ks_pvalue"] = s.ks_pvalue;
    }
    return j;
}

std::vector<double> read_env_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open environment file '" + path.string() +
                           "'");
    std::vector<double> omega;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        size_t b = 0, e = line.size();
        while (b < e && std::isspace(static_cast<unsigned char>(line[b])))
            ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(line[e - 1])))
            --e;
        if (b == e) continue;
        const std::string cell = line.substr(b, e - b);
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0' || errno == ERANGE) {
            throw ConfigError("environment file '" + path.string() +
                              "' line " + std::to_string(line_no) +
                              ": expected a probability, got '" + cell + "'");
        }
        omega.push_back(v);
    }
    if (omega.empty()) {
        throw ConfigError("environment file '" + path.string() +
                          "' holds no values");
    }
    return omega;
}

void write_env_file(const std::filesystem::path& path,
                    const std::vector<double>& omega) {
    std::string out;
    for (double w : omega) out += format_double(w) + "\n";
    write_text_file(path, out);
}

}  // namespace sepwalk
