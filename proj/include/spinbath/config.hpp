// config.hpp — Minimal INI-style configuration: [section] headers and
// key = value lines, '#' or ';' comments.

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinbath::scen {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Config {
  public:
    static Config parse(const std::string& text);
    static Config parse_file(const std::string& path);

    bool has_section(const std::string& section) const {
        return sections_.count(section) != 0;
    }
    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const;
    // Comma-separated list of doubles.
    std::vector<double> get_doubles(const std::string& section,
                                    const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& section,
                                         const std::string& key) const;

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace spinbath::scen
