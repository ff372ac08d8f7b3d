#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sepwalk/estimators.hpp"
#include "sepwalk/renewal.hpp"
#include "sepwalk/walker.hpp"

namespace sepwalk {

// Everything an output file records about its own provenance. config_text is
// the configuration file byte for byte; CSV headers carry it as a commented
// block, JSON outputs as a single string field, so any result can be rerun
// from the file alone.
struct RunMeta {
    std::string command;
    uint64_t seed = 0;
    int threads = 1;
    std::string timestamp;  // UTC, YYYYMMDD-HHMMSS
    std::string config_text;
};

std::string utc_stamp();

// Creates <base>/<command>-<stamp> (suffixing -2, -3, ... if taken), never
// reusing an existing directory. IoError when creation fails.
std::filesystem::path fresh_output_dir(const std::filesystem::path& base,
                                       const std::string& command,
                                       const std::string& stamp);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// Commented metadata block placed above CSV column headers.
std::string csv_preamble(const RunMeta& meta);

nlohmann::ordered_json meta_json(const RunMeta& meta);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);
void write_json_file(const std::filesystem::path& path,
                     const nlohmann::ordered_json& j);

// Columns k, X_k, occ_bit: position before step k and the occupancy bit that
// drove the step. The final row carries the endpoint and no bit.
void write_trajectory_csv(const std::filesystem::path& path,
                          const RunMeta& meta, const Trajectory& traj);

// Columns gamma, v_direct, v_lo, v_hi, v_renewal, sigma2, n_renewals,
// ks_stat. Absent quantities (no regenerations, failed row) print as nan.
void write_scan_csv(const std::filesystem::path& path, const RunMeta& meta,
                    const std::vector<ScanRow>& rows);

// Columns k, tau, X_tau, dt, dX, provisional.
void write_renewal_csv(const std::filesystem::path& path, const RunMeta& meta,
                       const std::vector<RenewalRecord>& records);

// Generic numeric table; one column name per value column.
void write_table_csv(const std::filesystem::path& path, const RunMeta& meta,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows);

nlohmann::ordered_json summary_to_json(const SummaryStats& s);

// Frozen-environment files: one right-step probability per line, '#'
// comments and blank lines skipped. ConfigError on malformed numbers.
std::vector<double> read_env_file(const std::filesystem::path& path);
void write_env_file(const std::filesystem::path& path,
                    const std::vector<double>& omega);

}  // namespace sepwalk
