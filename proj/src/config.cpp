#include "spinbath/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace spinbath::scen {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            cfg.sections_[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": key before any [section] header");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) != 0;
}

std::string Config::get_string(const std::string& section,
                               const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end())
        throw ConfigError("missing config section [" + section + "]");
    auto kv = it->second.find(key);
    if (kv == it->second.end())
        throw ConfigError("missing config key " + section + "." + key);
    return kv->second;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    const std::string value = get_string(section, key);
    try {
        std::size_t pos = 0;
        const double d = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key " + section + "." + key +
                          ": cannot parse '" + value + "' as a number");
    }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

int Config::get_int(const std::string& section, const std::string& key,
                    int fallback) const {
    if (!has(section, key)) return fallback;
    return static_cast<int>(get_double(section, key));
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string value = get_string(section, key);
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key " + section + "." + key +
                      ": expected a boolean, got '" + value + "'");
}

std::vector<std::string> Config::get_strings(const std::string& section,
                                             const std::string& key) const {
    std::vector<std::string> items;
    std::istringstream in(get_string(section, key));
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

std::vector<double> Config::get_doubles(const std::string& section,
                                        const std::string& key) const {
    std::vector<double> values;
    for (const auto& item : get_strings(section, key)) {
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("config key " + section + "." + key +
                              ": cannot parse '" + item + "' as a number");
        }
    }
    return values;
}

}  // namespace spinbath::scen
