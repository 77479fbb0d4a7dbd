#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace risbo {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace detail

// INI-style config: [section] headers, key = value lines, '#' or ';'
// comments. Keys read through the typed getters are tracked so unknown keys
// can be rejected after loading.
class ConfigFile {
public:
    static ConfigFile parse(const std::string& text, const std::string& origin = "<string>") {
        ConfigFile cfg;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
                section = detail::lower(detail::trim(line.substr(1, line.size() - 2)));
                if (section.empty())
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
                cfg.values_[section];  // a section may legitimately stay empty
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = detail::lower(detail::trim(line.substr(0, eq)));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            cfg.values_[section][key] = value;
        }
        return cfg;
    }

    static ConfigFile parse_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << f.rdbuf();
        return parse(ss.str(), path);
    }

    std::optional<std::string> get(const std::string& section, const std::string& key) const {
        const auto sit = values_.find(section);
        if (sit == values_.end()) return std::nullopt;
        const auto kit = sit->second.find(key);
        if (kit == sit->second.end()) return std::nullopt;
        touched_.insert(section + "." + key);
        return kit->second;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        const auto v = get(section, key);
        return v ? *v : fallback;
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        const auto v = get(section, key);
        if (!v) return fallback;
        try {
            std::size_t pos = 0;
            const double d = std::stod(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("trailing characters");
            return d;
        } catch (const std::exception&) {
            throw ConfigError(where(section, key) + ": expected a number, got '" + *v + "'");
        }
    }

    long long get_int(const std::string& section, const std::string& key, long long fallback) const {
        const auto v = get(section, key);
        if (!v) return fallback;
        try {
            std::size_t pos = 0;
            const long long i = std::stoll(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("trailing characters");
            return i;
        } catch (const std::exception&) {
            throw ConfigError(where(section, key) + ": expected an integer, got '" + *v + "'");
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        const auto v = get(section, key);
        if (!v) return fallback;
        const std::string s = detail::lower(*v);
        if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
        if (s == "false" || s == "off" || s == "no" || s == "0") return false;
        throw ConfigError(where(section, key) + ": expected a boolean, got '" + *v + "'");
    }

    template <typename T, typename Parse>
    std::vector<T> get_list(const std::string& section, const std::string& key,
                            std::vector<T> fallback, Parse parse) const {
        const auto v = get(section, key);
        if (!v) return fallback;
        std::vector<T> out;
        std::string item;
        std::istringstream in(*v);
        while (std::getline(in, item, ',')) {
            item = detail::trim(item);
            if (item.empty()) throw ConfigError(where(section, key) + ": empty list element");
            out.push_back(parse(item));
        }
        if (out.empty()) throw ConfigError(where(section, key) + ": empty list");
        return out;
    }

    std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                        std::vector<double> fallback) const {
        return get_list<double>(section, key, std::move(fallback), [&](const std::string& s) {
            try {
                return std::stod(s);
            } catch (const std::exception&) {
                throw ConfigError(where(section, key) + ": expected numbers, got '" + s + "'");
            }
        });
    }

    std::vector<int> get_int_list(const std::string& section, const std::string& key,
                                  std::vector<int> fallback) const {
        return get_list<int>(section, key, std::move(fallback), [&](const std::string& s) {
            try {
                return std::stoi(s);
            } catch (const std::exception&) {
                throw ConfigError(where(section, key) + ": expected integers, got '" + s + "'");
            }
        });
    }

    // Keys present in the file but never read by any getter; used to reject
    // misspelled settings after the schema has been walked.
    std::vector<std::string> untouched_keys() const {
        std::vector<std::string> out;
        for (const auto& [section, kv] : values_)
            for (const auto& [key, value] : kv)
                if (touched_.find(section + "." + key) == touched_.end())
                    out.push_back(section + "." + key);
        std::sort(out.begin(), out.end());
        return out;
    }

    const std::string& origin() const { return origin_; }

private:
    std::string where(const std::string& section, const std::string& key) const {
        return origin_ + ": [" + section + "] " + key;
    }

    std::string origin_ = "<none>";
    std::map<std::string, std::map<std::string, std::string>> values_;
    mutable std::set<std::string> touched_;
};

}  // namespace risbo
