#pragma once

// Config loading with source positions: nlohmann::json does not keep line numbers,
// so a small scanner maps every JSON path ("mec.scenarios[2].tail") to the line on
// which its value starts.

#include <json.hpp>

#include <wptlab/errors.hpp>

#include <cctype>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace wptlab::cli {

using nlohmann::json;

/// A config problem tied to a JSON path.
struct ConfigIssue : std::runtime_error {
    std::string path;
    ConfigIssue(std::string p, const std::string& msg) : std::runtime_error(msg), path(std::move(p)) {}
};

class LineIndex {
public:
    explicit LineIndex(const std::string& text) : s_(text) {
        try {
            skip_ws();
            value("");
        } catch (const std::out_of_range&) {
            // Malformed input is reported by the real parser.
        }
    }

    /// Line of `path`, falling back to the nearest recorded ancestor, then line 1.
    int line_of(std::string path) const {
        while (true) {
            if (auto it = lines_.find(path); it != lines_.end()) return it->second;
            const auto cut = path.find_last_of(".[");
            if (cut == std::string::npos) return path.empty() ? 1 : line_of("");
            path.erase(cut);
        }
    }

    static int line_at_byte(const std::string& text, std::size_t byte) {
        int line = 1;
        for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        return line;
    }

private:
    char peek() const { return s_.at(i_); }
    void skip_ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
            if (s_[i_] == '\n') ++line_;
            ++i_;
        }
    }
    std::string string_token() {
        std::string out;
        ++i_;  // opening quote
        while (peek() != '"') {
            if (peek() == '\\') ++i_;
            out += s_.at(i_++);
        }
        ++i_;
        return out;
    }
    void value(const std::string& path) {
        lines_.emplace(path, line_);
        const char c = peek();
        if (c == '{') {
            ++i_;
            skip_ws();
            if (peek() == '}') {
                ++i_;
                return;
            }
            while (true) {
                skip_ws();
                const std::string key = string_token();
                skip_ws();
                ++i_;  // colon
                skip_ws();
                value(path.empty() ? key : path + "." + key);
                skip_ws();
                if (peek() == ',') {
                    ++i_;
                    continue;
                }
                ++i_;  // closing brace
                return;
            }
        }
        if (c == '[') {
            ++i_;
            skip_ws();
            if (peek() == ']') {
                ++i_;
                return;
            }
            for (std::size_t k = 0;; ++k) {
                skip_ws();
                value(path + "[" + std::to_string(k) + "]");
                skip_ws();
                if (peek() == ',') {
                    ++i_;
                    continue;
                }
                ++i_;
                return;
            }
        }
        if (c == '"') {
            string_token();
            return;
        }
        while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != ',' && s_[i_] != '}' &&
               s_[i_] != ']')
            ++i_;
    }

    const std::string& s_;
    std::size_t i_ = 0;
    int line_ = 1;
    std::map<std::string, int> lines_;
};

struct ConfigFile {
    std::string path;
    std::string text;
    json root;
    LineIndex lines{text};

    ConfigFile(std::string p, std::string t, json r) : path(std::move(p)), text(std::move(t)), root(std::move(r)), lines(text) {}

    std::string where(const std::string& json_path) const {
        return path + ":" + std::to_string(lines.line_of(json_path));
    }
};

/// Thrown for unreadable or syntactically invalid files; already formatted.
struct ConfigLoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigLoadError(path + ":1: error: cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    try {
        json root = json::parse(text);
        if (!root.is_object()) throw ConfigLoadError(path + ":1: error: top level must be a JSON object");
        return ConfigFile(path, std::move(text), std::move(root));
    } catch (const json::parse_error& e) {
        throw ConfigLoadError(path + ":" + std::to_string(LineIndex::line_at_byte(text, e.byte)) +
                              ": error: invalid JSON: " + e.what());
    }
}

/// Typed access to one JSON object with path-qualified errors.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigIssue(path_, "field '" + path_ + "' must be an object");
    }

    const std::string& path() const { return path_; }
    bool has(const std::string& key) const { return j_.contains(key); }
    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    Node object(const std::string& key) const {
        if (!has(key)) throw ConfigIssue(path_, "missing required field '" + child(key) + "'");
        return Node(j_.at(key), child(key));
    }
    /// Empty object node when the key is absent.
    Node object_or_empty(const std::string& key) const {
        static const json empty = json::object();
        return has(key) ? Node(j_.at(key), child(key)) : Node(empty, child(key));
    }

    const json& raw(const std::string& key) const {
        if (!has(key)) throw ConfigIssue(path_, "missing required field '" + child(key) + "'");
        return j_.at(key);
    }

    double number(const std::string& key) const { return as_number(raw(key), child(key)); }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    double positive(const std::string& key) const { return check_positive(number(key), key); }
    double positive(const std::string& key, double fallback) const {
        return has(key) ? check_positive(number(key), key) : fallback;
    }

    long long integer(const std::string& key) const {
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigIssue(child(key), "field '" + child(key) + "' must be an integer");
        return v.get<long long>();
    }
    long long integer(const std::string& key, long long fallback) const { return has(key) ? integer(key) : fallback; }
    long long count(const std::string& key, long long fallback, long long min_value = 1) const {
        const long long v = integer(key, fallback);
        if (v < min_value)
            throw ConfigIssue(child(key), "field '" + child(key) + "' must be >= " + std::to_string(min_value));
        return v;
    }

    std::string text(const std::string& key) const {
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigIssue(child(key), "field '" + child(key) + "' must be a string");
        return v.get<std::string>();
    }
    std::string text(const std::string& key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }
    std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) const {
        const std::string v = text(key, fallback);
        for (const auto& a : allowed)
            if (a == v) return v;
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        throw ConfigIssue(child(key), "field '" + child(key) + "' must be one of: " + list);
    }

    bool flag(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigIssue(child(key), "field '" + child(key) + "' must be true or false");
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& key) const {
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigIssue(child(key), "field '" + child(key) + "' must be an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i)
            out.push_back(as_number(v[i], child(key) + "[" + std::to_string(i) + "]"));
        return out;
    }

    /// Complex values as [re, im] pairs.
    std::vector<std::complex<double>> complexes(const std::string& key) const {
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigIssue(child(key), "field '" + child(key) + "' must be an array of [re, im] pairs");
        std::vector<std::complex<double>> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_complex(v[i], child(key) + "[" + std::to_string(i) + "]"));
        return out;
    }
    std::complex<double> complex_value(const std::string& key, std::complex<double> fallback) const {
        return has(key) ? as_complex(raw(key), child(key)) : fallback;
    }

    std::vector<Node> objects(const std::string& key) const {
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigIssue(child(key), "field '" + child(key) + "' must be an array of objects");
        std::vector<Node> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], child(key) + "[" + std::to_string(i) + "]");
        return out;
    }

private:
    static double as_number(const json& v, const std::string& path) {
        if (!v.is_number()) throw ConfigIssue(path, "field '" + path + "' must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigIssue(path, "field '" + path + "' must be finite");
        return d;
    }
    static std::complex<double> as_complex(const json& v, const std::string& path) {
        if (!v.is_array() || v.size() != 2) throw ConfigIssue(path, "field '" + path + "' must be a [re, im] pair");
        return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]")};
    }
    double check_positive(double v, const std::string& key) const {
        if (!(v > 0.0)) throw ConfigIssue(child(key), "field '" + child(key) + "' must be > 0");
        return v;
    }

    const json& j_;
    std::string path_;
};

}  // namespace wptlab::cli
