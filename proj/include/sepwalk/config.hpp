#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sepwalk/model.hpp"

namespace sepwalk {

// Flat key-value configuration with dotted section names, e.g.
//
//   model.alpha = 0.25
//   run.replicas = 100   # trailing comments allowed
//
// Blank lines and lines starting with '#' are skipped. Keys may not repeat.
// raw_text keeps the file byte for byte so outputs can echo it unchanged.
struct Config {
    std::map<std::string, std::string> values;
    std::string raw_text;

    bool has(const std::string& key) const;
};

// ConfigError on syntax problems, naming the offending line.
Config parse_config(const std::string& text);

// Reads and parses a file; ConfigError when it cannot be opened.
Config load_config(const std::string& path);

// Typed getters. The required forms throw ConfigError naming the key when it
// is absent or malformed; the defaulted forms fall back when absent but
// still reject malformed values. get_long/get_double also enforce the given
// closed lower bound, so range complaints carry the key path too.
std::string get_string(const Config& cfg, const std::string& key);
std::string get_string(const Config& cfg, const std::string& key,
                       const std::string& fallback);
double get_double(const Config& cfg, const std::string& key, double min_value);
double get_double(const Config& cfg, const std::string& key, double min_value,
                  double fallback);
long long get_long(const Config& cfg, const std::string& key,
                   long long min_value);
long long get_long(const Config& cfg, const std::string& key,
                   long long min_value, long long fallback);
bool get_bool(const Config& cfg, const std::string& key, bool fallback);

// Comma-separated list of numbers; required when no fallback is given.
std::vector<double> get_double_list(const Config& cfg, const std::string& key);
std::vector<double> get_double_list(const Config& cfg, const std::string& key,
                                    const std::vector<double>& fallback);

// Builds ModelParams from model.alpha, model.beta, model.rho, model.gamma
// and the optional model.allow_degenerate flag. Validation failures from
// make_params are rethrown as ConfigError naming the model block.
ModelParams params_from_config(const Config& cfg);

}  // namespace sepwalk
