#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fwlab/error.hpp"

namespace fwlab {

// Plain `key = value` text with `[section]` headers; `#` and `;` start comments.
// Every key must be consumed by the reader, so typos surface as errors.
class ConfigFile {
public:
    static ConfigFile parse(std::istream& in, const std::string& origin = "<config>") {
        ConfigFile cfg;
        std::string line, section;
        for (int lineno = 1; std::getline(in, line); ++lineno) {
            if (auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
            line = trim(line);
            if (line.empty()) continue;
            const auto where = origin + ":" + std::to_string(lineno);
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty()) throw ConfigError(where + ": empty section name");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError(where + ": expected `key = value`");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError(where + ": missing key");
            const std::string full = section.empty() ? key : section + "." + key;
            if (cfg.values_.count(full)) throw ConfigError(where + ": duplicate key " + full);
            cfg.values_[full] = value;
        }
        return cfg;
    }

    static ConfigFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path);
        return parse(in, path);
    }

    static ConfigFile from_string(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        return to_double(key, get_string(key, ""));
    }

    long get_int(const std::string& key, long fallback) const {
        if (!has(key)) return fallback;
        const std::string v = get_string(key, "");
        std::size_t pos = 0;
        long out = 0;
        try {
            out = std::stol(v, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != v.size() || v.empty()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
        return out;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string v = lower(get_string(key, ""));
        if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
        if (v == "false" || v == "no" || v == "0" || v == "off") return false;
        throw ConfigError(key + ": expected a boolean, got '" + v + "'");
    }

    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
        if (!has(key)) return fallback;
        std::vector<double> out;
        std::stringstream ss(get_string(key, ""));
        for (std::string item; std::getline(ss, item, ',');) {
            item = trim(item);
            if (!item.empty()) out.push_back(to_double(key, item));
        }
        return out;
    }

    // Keys present in the file that no reader asked for.
    std::vector<std::string> unused() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

    void require_all_used() const {
        const auto left = unused();
        if (left.empty()) return;
        std::string msg = "unknown config key(s):";
        for (const auto& k : left) msg += " " + k;
        throw ConfigError(msg);
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

    static double to_double(const std::string& key, const std::string& raw) {
        const std::string v = lower(trim(raw));
        if (v == "inf" || v == "infinity" || v == "+inf") return HUGE_VAL;
        std::size_t pos = 0;
        double out = 0.0;
        try {
            out = std::stod(v, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != v.size() || v.empty() || std::isnan(out))
            throw ConfigError(key + ": expected a number, got '" + raw + "'");
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    static std::string lower(std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

}  // namespace fwlab
