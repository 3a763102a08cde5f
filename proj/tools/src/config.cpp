#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ergotrack::tools {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

FlatConfig FlatConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

FlatConfig FlatConfig::parse_string(const std::string& text) {
    FlatConfig cfg;
    cfg.raw_ = text;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            }
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) {
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": empty section name");
            }
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        }
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key");
        }
        std::string full = section.empty() ? key : section + "." + key;
        cfg.entries_[full] = val;
    }
    return cfg;
}

std::string FlatConfig::get_str(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw ConfigError("missing required config key: " + key);
    }
    return it->second;
}

std::string FlatConfig::get_str(const std::string& key,
                                const std::string& dflt) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? dflt : it->second;
}

double FlatConfig::get_double(const std::string& key) const {
    std::string v = get_str(key);
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
        throw ConfigError("config key " + key + ": not a number: " + v);
    }
    return d;
}

double FlatConfig::get_double(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
}

long long FlatConfig::get_int(const std::string& key, long long dflt) const {
    if (!has(key)) return dflt;
    std::string v = get_str(key);
    char* end = nullptr;
    long long i = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
        throw ConfigError("config key " + key + ": not an integer: " + v);
    }
    return i;
}

std::uint64_t FlatConfig::get_u64(const std::string& key,
                                  std::uint64_t dflt) const {
    if (!has(key)) return dflt;
    std::string v = get_str(key);
    char* end = nullptr;
    unsigned long long i = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
        throw ConfigError("config key " + key + ": not an integer: " + v);
    }
    return i;
}

bool FlatConfig::get_bool(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    std::string v = get_str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key " + key + ": not a boolean: " + v);
}

std::vector<double> FlatConfig::get_list(const std::string& key) const {
    std::string v = get_str(key);
    std::vector<double> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        char* end = nullptr;
        double d = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0') {
            throw ConfigError("config key " + key +
                              ": bad list element: " + item);
        }
        out.push_back(d);
    }
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
}

}  // namespace ergotrack::tools
