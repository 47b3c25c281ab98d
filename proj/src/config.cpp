#include "hbtc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hbtc {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::uint64_t parse_uint(const std::string& text, const std::string& field) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError(field + ": expected a nonnegative integer, got '" + text + "'");
    }
    errno = 0;
    const unsigned long long v = std::strtoull(text.c_str(), nullptr, 10);
    if (errno == ERANGE) throw ConfigError(field + ": integer out of range");
    return v;
}

} // namespace

double parse_double(std::string_view text, std::string_view field) {
    const std::string s = lower(trim(text));
    if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-infinity") return -std::numeric_limits<double>::infinity();
    if (s.empty()) throw ConfigError(std::string(field) + ": empty value");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || std::isnan(v)) {
        throw ConfigError(std::string(field) + ": expected a number, got '" + std::string(text) + "'");
    }
    return v;
}

const std::vector<std::string>& KeyValueConfig::known_keys() {
    static const std::vector<std::string> keys{
        // generation
        "dims", "blocks", "snr_db", "sample_ratio", "seed", "scenario", "angle_spread_deg", "doppler_spread",
        // solver
        "lambda", "beta0", "rho_penalty", "max_iterations", "tol_rel_change", "backend", "init", "svt_threshold",
        "data_consistency",
        // sweep
        "swept", "values", "trials", "methods", "lambda_grid", "lambda_select"};
    return keys;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
    KeyValueConfig kv;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = lower(trim(std::string_view(line).substr(0, eq)));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        const auto& known = known_keys();
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(key + ": unknown key");
        if (kv.has(key)) throw ConfigError(key + ": duplicate key");
        kv.values_[key] = value;
    }
    return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void KeyValueConfig::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(it->second, key);
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_uint(it->second, key);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string v = lower(it->second);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + it->second + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(it->second)) out.push_back(parse_double(item, key));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

std::vector<std::uint64_t> KeyValueConfig::get_uints(const std::string& key,
                                                     const std::vector<std::uint64_t>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(it->second)) out.push_back(parse_uint(item, key));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

std::vector<std::string> KeyValueConfig::get_strings(const std::string& key,
                                                     const std::vector<std::string>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    auto out = split_list(it->second);
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

GenConfig gen_config_from(const KeyValueConfig& kv) {
    GenConfig base;
    const std::string scenario = lower(kv.get_string("scenario", "generic"));
    if (scenario == "csi_like" || scenario == "csi") {
        base = csi_default_config();
    } else if (scenario != "generic") {
        throw ConfigError("scenario: expected 'generic' or 'csi_like', got '" + scenario + "'");
    }
    GenConfig c = base;
    const auto dims = kv.get_uints("dims", {base.dims.I, base.dims.J, base.dims.K});
    if (dims.size() != 3) throw ConfigError("dims: expected three comma-separated sizes I,J,K");
    c.dims = {dims[0], dims[1], dims[2]};
    const auto blocks = kv.get_uints("blocks", {base.structure.sizes().begin(), base.structure.sizes().end()});
    try {
        c.structure = BlockStructure(std::vector<std::size_t>(blocks.begin(), blocks.end()));
    } catch (const ConfigError& e) {
        throw ConfigError(e.what());
    }
    c.snr_db = kv.get_double("snr_db", base.snr_db);
    c.sample_ratio = kv.get_double("sample_ratio", base.sample_ratio);
    c.seed = kv.get_uint("seed", base.seed);
    c.angle_spread_deg = kv.get_double("angle_spread_deg", base.angle_spread_deg);
    c.doppler_spread = kv.get_double("doppler_spread", base.doppler_spread);
    c.validate();
    return c;
}

SolverConfig solver_config_from(const KeyValueConfig& kv) {
    SolverConfig c;
    c.lambda = kv.get_double("lambda", c.lambda);
    c.beta0 = kv.get_double("beta0", c.beta0);
    c.rho_penalty = kv.get_double("rho_penalty", c.rho_penalty);
    c.max_iterations = kv.get_uint("max_iterations", c.max_iterations);
    c.tol_rel_change = kv.get_double("tol_rel_change", c.tol_rel_change);
    c.backend = parse_backend(kv.get_string("backend", "als"));
    c.seed = kv.get_uint("seed", c.seed);
    const std::string init = lower(kv.get_string("init", "random"));
    if (init == "random") {
        c.init = InitMode::Random;
    } else if (init == "provided") {
        c.init = InitMode::Provided;
    } else if (init == "spectral") {
        c.init = InitMode::Spectral;
    } else {
        throw ConfigError("init: expected 'random', 'provided' or 'spectral', got '" + init + "'");
    }
    const std::string svt = lower(kv.get_string("svt_threshold", "half_inv_beta"));
    if (svt == "half_inv_beta") {
        c.svt_threshold = SvtThreshold::HalfInverseBeta;
    } else if (svt == "inv_beta") {
        c.svt_threshold = SvtThreshold::InverseBeta;
    } else {
        throw ConfigError("svt_threshold: expected 'half_inv_beta' or 'inv_beta', got '" + svt + "'");
    }
    c.data_consistency = kv.get_bool("data_consistency", c.data_consistency);
    c.validate();
    return c;
}

} // namespace hbtc
