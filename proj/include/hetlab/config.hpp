#pragma once

// Flat sectioned key-value configuration:
//
//   # comment
//   [system]
//   alpha = 1.0
//   nu    = 0.05
//
// Values are plain UTF-8 text; numbers use decimal floats.  canonical_text()
// emits sections and keys in sorted order so the same logical config always
// hashes to the same bytes.

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "math_util.hpp"

namespace hetlab {

class Config {
  public:
    using Section = std::map<std::string, std::string>;

    static Config parse(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line, section = "";
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = trim(strip_comment(line));
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                ": unterminated section header");
                section = trim(t.substr(1, t.size() - 2));
                cfg.sections_[section];  // remember even if empty
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key = value");
            const std::string key = trim(t.substr(0, eq));
            const std::string val = trim(t.substr(eq + 1));
            if (key.empty())
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": empty key");
            cfg.sections_[section][key] = val;
        }
        return cfg;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    bool has(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    std::string get_str(const std::string& section, const std::string& key,
                        const std::string& fallback = "") const {
        auto s = sections_.find(section);
        if (s == sections_.end()) return fallback;
        auto k = s->second.find(key);
        return k == s->second.end() ? fallback : k->second;
    }

    double get_double(const std::string& section, const std::string& key,
                      double fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get_str(section, key);
        char* end = nullptr;
        const double d = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0')
            throw std::invalid_argument("config [" + section + "] " + key +
                                        ": not a number: '" + v + "'");
        return d;
    }

    long get_int(const std::string& section, const std::string& key, long fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get_str(section, key);
        char* end = nullptr;
        const long n = std::strtol(v.c_str(), &end, 10);
        if (end == v.c_str() || *end != '\0')
            throw std::invalid_argument("config [" + section + "] " + key +
                                        ": not an integer: '" + v + "'");
        return n;
    }

    void set(const std::string& section, const std::string& key, const std::string& val) {
        sections_[section][key] = val;
    }
    void set(const std::string& section, const std::string& key, double val) {
        sections_[section][key] = format_double(val);
    }

    // Sorted, normalized rendering; input for the manifest hash.
    std::string canonical_text() const {
        std::ostringstream out;
        for (const auto& [name, sec] : sections_) {
            if (!name.empty()) out << '[' << name << "]\n";
            for (const auto& [k, v] : sec) out << k << " = " << v << '\n';
        }
        return out.str();
    }

    std::uint64_t hash() const { return fnv1a64(canonical_text()); }

    const std::map<std::string, Section>& sections() const { return sections_; }

  private:
    static std::string strip_comment(const std::string& s) {
        const auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, Section> sections_;
};

} // namespace hetlab
