#include "sepwalk/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sepwalk/errors.hpp"

namespace sepwalk {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool valid_key(const std::string& key) {
    if (key.empty() || key.front() == '.' || key.back() == '.') return false;
    bool prev_dot = false;
    for (char c : key) {
        if (c == '.') {
            if (prev_dot) return false;
            prev_dot = true;
            continue;
        }
        prev_dot = false;
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
            return false;
        }
    }
    return true;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what);
}

double parse_double(const std::string& key, const std::string& raw) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0' || errno == ERANGE) {
        bad_value(key, "expected a number, got '" + raw + "'");
    }
    return v;
}

long long parse_long(const std::string& key, const std::string& raw) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(raw.c_str(), &end, 10);
    if (end == raw.c_str() || *end != '\0' || errno == ERANGE) {
        bad_value(key, "expected an integer, got '" + raw + "'");
    }
    return v;
}

}  // namespace

bool Config::has(const std::string& key) const {
    return values.count(key) != 0;
}

Config parse_config(const std::string& text) {
    Config cfg;
    cfg.raw_text = text;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_key(key)) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": bad key '" + key + "'");
        }
        if (value.empty()) {
            throw ConfigError("config key '" + key + "': empty value");
        }
        if (!cfg.values.emplace(key, value).second) {
            throw ConfigError("config key '" + key + "': set twice");
        }
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string get_string(const Config& cfg, const std::string& key) {
    const auto it = cfg.values.find(key);
    if (it == cfg.values.end()) {
        throw ConfigError("missing config key '" + key + "'");
    }
    return it->second;
}

std::string get_string(const Config& cfg, const std::string& key,
                       const std::string& fallback) {
    const auto it = cfg.values.find(key);
    return it == cfg.values.end() ? fallback : it->second;
}

double get_double(const Config& cfg, const std::string& key,
                  double min_value) {
    const double v = parse_double(key, get_string(cfg, key));
    if (v < min_value) {
        bad_value(key, "must be >= " + std::to_string(min_value));
    }
    return v;
}

double get_double(const Config& cfg, const std::string& key, double min_value,
                  double fallback) {
    if (!cfg.has(key)) return fallback;
    return get_double(cfg, key, min_value);
}

long long get_long(const Config& cfg, const std::string& key,
                   long long min_value) {
    const long long v = parse_long(key, get_string(cfg, key));
    if (v < min_value) {
        bad_value(key, "must be >= " + std::to_string(min_value));
    }
    return v;
}

long long get_long(const Config& cfg, const std::string& key,
                   long long min_value, long long fallback) {
    if (!cfg.has(key)) return fallback;
    return get_long(cfg, key, min_value);
}

bool get_bool(const Config& cfg, const std::string& key, bool fallback) {
    if (!cfg.has(key)) return fallback;
    const std::string raw = get_string(cfg, key);
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    bad_value(key, "expected true or false, got '" + raw + "'");
}

std::vector<double> get_double_list(const Config& cfg,
                                    const std::string& key) {
    const std::string raw = get_string(cfg, key);
    std::vector<double> out;
    std::istringstream in(raw);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) bad_value(key, "empty list entry");
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) bad_value(key, "empty list");
    return out;
}

std::vector<double> get_double_list(const Config& cfg, const std::string& key,
                                    const std::vector<double>& fallback) {
    if (!cfg.has(key)) return fallback;
    return get_double_list(cfg, key);
}

ModelParams params_from_config(const Config& cfg) {
    const double alpha = get_double(cfg, "model.alpha", 0.0);
    const double beta = get_double(cfg, "model.beta", 0.0);
    const double rho = get_double(cfg, "model.rho", 0.0);
    const double gamma = get_double(cfg, "model.gamma", 0.0);
    const bool degenerate = get_bool(cfg, "model.allow_degenerate", false);
    try {
        return make_params(alpha, beta, rho, gamma, degenerate);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model block: ") + e.what());
    }
}

}  // namespace sepwalk
