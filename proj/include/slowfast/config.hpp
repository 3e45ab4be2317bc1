#pragma once

#include "slowfast/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace slowfast {

// Plain-text experiment configuration: `[section]` headers followed by
// `key = value` lines, `#` comments. Diff-able, and hashable through the
// canonical form (sorted section.key=value lines), which names run output
// directories.
class Config {
public:
    static Config parse(const std::string& text);
    static Config from_file(const std::string& path);

    void set(const std::string& section, const std::string& key, const std::string& value);
    bool has(const std::string& section, const std::string& key) const;

    std::string get_str(const std::string& section, const std::string& key) const;
    std::string get_str_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_num(const std::string& section, const std::string& key) const;
    double get_num_or(const std::string& section, const std::string& key, double fallback) const;
    long get_int_or(const std::string& section, const std::string& key, long fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;

    // Apply SLOWFAST_<SECTION>__<KEY>=value environment overrides.
    void apply_env_overrides(const char* prefix = "SLOWFAST_");

    std::string canonical() const;
    std::string hash_hex() const;  // FNV-1a over the canonical form

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return data_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace slowfast
