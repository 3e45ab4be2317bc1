#include "slowfast/config.hpp"

#include "slowfast/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

extern char** environ;

namespace slowfast {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream is(text);
    std::string line;
    std::string section = "global";
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                std::ostringstream os;
                os << "config line " << lineno << ": unterminated section header";
                throw ConfigError(os.str());
            }
            section = lower(trim(t.substr(1, t.size() - 2)));
            if (section.empty()) {
                std::ostringstream os;
                os << "config line " << lineno << ": empty section name";
                throw ConfigError(os.str());
            }
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << "config line " << lineno << ": expected key = value, got '" << t << "'";
            throw ConfigError(os.str());
        }
        const std::string key = lower(trim(t.substr(0, eq)));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream os;
            os << "config line " << lineno << ": empty key";
            throw ConfigError(os.str());
        }
        cfg.data_[section][key] = value;
    }
    return cfg;
}

Config Config::from_file(const std::string& path) { return parse(read_text_file(path)); }

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    data_[lower(section)][lower(key)] = value;
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto s = data_.find(lower(section));
    return s != data_.end() && s->second.count(lower(key)) > 0;
}

std::string Config::get_str(const std::string& section, const std::string& key) const {
    auto s = data_.find(lower(section));
    if (s == data_.end() || !s->second.count(lower(key)))
        throw ConfigError("config: missing required key [" + section + "] " + key);
    return s->second.at(lower(key));
}

std::string Config::get_str_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get_str(section, key) : fallback;
}

double Config::get_num(const std::string& section, const std::string& key) const {
    const std::string v = get_str(section, key);
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (trim(v.substr(used)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("config: key [" + section + "] " + key + " is not a number: '" + v + "'");
}

double Config::get_num_or(const std::string& section, const std::string& key,
                          double fallback) const {
    return has(section, key) ? get_num(section, key) : fallback;
}

long Config::get_int_or(const std::string& section, const std::string& key, long fallback) const {
    if (!has(section, key)) return fallback;
    const double v = get_num(section, key);
    const long n = static_cast<long>(v);
    if (static_cast<double>(n) != v)
        throw ConfigError("config: key [" + section + "] " + key + " must be an integer");
    return n;
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key) const {
    const std::string v = get_str(section, key);
    std::vector<double> out;
    std::istringstream is(v);
    std::string cell;
    while (std::getline(is, cell, ',')) {
        const std::string c = trim(cell);
        if (c.empty()) continue;
        try {
            out.push_back(std::stod(c));
        } catch (const std::exception&) {
            throw ConfigError("config: list [" + section + "] " + key + " has non-number '" + c +
                              "'");
        }
    }
    if (out.empty()) throw ConfigError("config: list [" + section + "] " + key + " is empty");
    return out;
}

void Config::apply_env_overrides(const char* prefix) {
    const std::string pre(prefix);
    for (char** env = environ; env && *env; ++env) {
        const std::string entry(*env);
        if (entry.rfind(pre, 0) != 0) continue;
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos) continue;
        const std::string name = entry.substr(pre.size(), eq - pre.size());
        const std::size_t sep = name.find("__");
        if (sep == std::string::npos) continue;
        set(lower(name.substr(0, sep)), lower(name.substr(sep + 2)), entry.substr(eq + 1));
    }
}

std::string Config::canonical() const {
    std::ostringstream os;
    for (const auto& [section, kv] : data_) {
        for (const auto& [key, value] : kv) os << section << "." << key << "=" << value << "\n";
    }
    return os.str();
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string Config::hash_hex() const {
    const std::uint64_t h = fnv1a64(canonical());
    std::ostringstream os;
    os << std::hex;
    for (int shift = 60; shift >= 0; shift -= 4) os << ((h >> shift) & 0xF);
    return os.str();
}

}  // namespace slowfast
