#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hbtc/admm.hpp"
#include "hbtc/synth.hpp"

namespace hbtc {

/**
 * Flat `key = value` configuration document.
 *
 * One entry per line, `#` starts a comment, keys are order-insensitive and
 * may appear once. Lists are comma separated. Unknown keys are rejected so a
 * typo cannot silently fall back to a default. All errors are ConfigError
 * with the offending key (or line) in the message.
 */
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::filesystem::path& path);

    [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, std::string value);

    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] double get_double(const std::string& key, double fallback) const;
    [[nodiscard]] std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
    [[nodiscard]] std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    [[nodiscard]] std::vector<std::uint64_t> get_uints(const std::string& key,
                                                       const std::vector<std::uint64_t>& fallback) const;
    [[nodiscard]] std::vector<std::string> get_strings(const std::string& key,
                                                       const std::vector<std::string>& fallback) const;

    [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept { return values_; }

    /// Keys accepted by parse(); anything else is an error.
    static const std::vector<std::string>& known_keys();

private:
    std::map<std::string, std::string> values_;
};

GenConfig gen_config_from(const KeyValueConfig& kv);
SolverConfig solver_config_from(const KeyValueConfig& kv);

/// Parses a real number; accepts "inf", "+inf", "-inf". Throws ConfigError naming `field`.
double parse_double(std::string_view text, std::string_view field);

} // namespace hbtc
