#ifndef ERGOTRACK_TOOLS_CONFIG_HPP
#define ERGOTRACK_TOOLS_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Flat line-oriented config: `key = value` entries under `[section]`
// headers, `#` comments. Keys are addressed as "section.key".

namespace ergotrack::tools {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class FlatConfig {
  public:
    static FlatConfig parse_file(const std::string& path);
    static FlatConfig parse_string(const std::string& text);

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string get_str(const std::string& key) const;  // throws if missing
    std::string get_str(const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double dflt) const;
    long long get_int(const std::string& key, long long dflt) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const;
    bool get_bool(const std::string& key, bool dflt) const;
    std::vector<double> get_list(const std::string& key) const;

    const std::string& raw() const { return raw_; }
    const std::map<std::string, std::string>& entries() const {
        return entries_;
    }

  private:
    std::map<std::string, std::string> entries_;
    std::string raw_;
};

}  // namespace ergotrack::tools

#endif
