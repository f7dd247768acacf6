#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mixlt/error.hpp"

namespace mixlt {

/*!
 * Flat sectioned key-value configuration:
 *
 *   # comment
 *   [section]
 *   key = value
 *
 * Keys are addressed as "section.key". Unknown sections or keys are
 * rejected at parse time; reads are tracked so that keys which the
 * selected experiment never consults can be rejected as well.
 */
class Config {
  public:
    using Schema = std::map<std::string, std::set<std::string>>;

    static const Schema& schema()
    {
        static const Schema s = {
            {"experiment", {"kind", "name", "functional", "N", "samples", "seed", "tolerance"}},
            {"system", {"kind", "matrix", "weights", "vector"}},
            {"companion", {"kind", "amplitude", "vector"}},
            {"cocycle_system", {"kind", "matrix", "weights", "vector"}},
            {"observable", {"kind", "frequency", "index", "value"}},
            {"cocycle", {"kind", "matrix", "matrices", "base", "terms", "renorm_period", "log_norm_bound",
                         "exterior_power"}},
            {"section", {"kind", "vector", "vectors", "base", "terms"}},
            {"companion_cocycle", {"kind", "matrix"}},
            {"scheme", {"averaging", "rate", "averaging_table", "normalizing", "normalizing_table", "law",
                        "variance"}},
            {"green_kubo", {"lag_max", "samples", "window"}},
            {"lyapunov", {"steps", "orbits", "burn_in", "expected", "tolerance"}},
            {"events", {"a", "b"}},
            {"interval", {"lower", "upper"}},
            {"charfn", {"t", "weight"}},
            {"zorich", {"permutation", "orbits", "steps", "burn_in", "require_gap", "replicate_seed"}},
            {"check", {"n_max", "samples", "directions", "growth_tolerance", "expected_slope", "slope_tolerance",
                       "identities"}},
        };
        return s;
    }

    static Config parse(std::string_view text, const std::string& source = "<config>")
    {
        Config cfg;
        std::string section;
        std::istringstream in{std::string(text)};
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            const std::string body = trim(line);
            if (body.empty())
                continue;
            const std::string where = source + ":" + std::to_string(line_no);
            if (body.front() == '[') {
                if (body.back() != ']')
                    throw ConfigError(where + ": malformed section header");
                section = trim(body.substr(1, body.size() - 2));
                if (!schema().contains(section))
                    throw ConfigError(where + ": unknown section '" + section + "'");
                continue;
            }
            const auto eq = body.find('=');
            if (eq == std::string::npos)
                throw ConfigError(where + ": expected 'key = value'");
            if (section.empty())
                throw ConfigError(where + ": key outside of any section");
            const std::string key = trim(body.substr(0, eq));
            const std::string value = trim(body.substr(eq + 1));
            const std::string full = section + "." + key;
            if (!schema().at(section).contains(key))
                throw ConfigError(where + ": unknown key '" + full + "'");
            if (cfg.values_.contains(full))
                throw ConfigError(where + ": duplicate key '" + full + "'");
            cfg.values_[full] = value;
        }
        return cfg;
    }

    static Config load(const std::filesystem::path& path)
    {
        std::ifstream file(path);
        if (!file)
            throw ConfigError("cannot read config file '" + path.string() + "'");
        std::stringstream buffer;
        buffer << file.rdbuf();
        return parse(buffer.str(), path.string());
    }

    // Override or add a value; the key must be in the schema.
    void set(const std::string& key, const std::string& value)
    {
        const auto dot = key.find('.');
        if (dot == std::string::npos || !schema().contains(key.substr(0, dot)) ||
            !schema().at(key.substr(0, dot)).contains(key.substr(dot + 1)))
            throw ConfigError("unknown key '" + key + "'");
        values_[key] = value;
    }

    [[nodiscard]] bool has(const std::string& key) const { return values_.contains(key); }

    [[nodiscard]] bool has_section(const std::string& section) const
    {
        const std::string prefix = section + ".";
        return std::any_of(values_.begin(), values_.end(),
                           [&](const auto& kv) { return kv.first.starts_with(prefix); });
    }

    [[nodiscard]] std::string get_string(const std::string& key) const
    {
        const auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError("missing required key '" + key + "'");
        used_.insert(key);
        resolved_[key] = it->second;
        return it->second;
    }

    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const
    {
        if (!has(key)) {
            resolved_[key] = fallback;
            return fallback;
        }
        return get_string(key);
    }

    [[nodiscard]] double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
    [[nodiscard]] double get_double(const std::string& key, double fallback) const
    {
        if (!has(key)) {
            resolved_[key] = format_double(fallback);
            return fallback;
        }
        return get_double(key);
    }

    [[nodiscard]] std::int64_t get_int(const std::string& key) const { return to_int(key, get_string(key)); }
    [[nodiscard]] std::int64_t get_int(const std::string& key, std::int64_t fallback) const
    {
        if (!has(key)) {
            resolved_[key] = std::to_string(fallback);
            return fallback;
        }
        return get_int(key);
    }

    [[nodiscard]] std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const
    {
        if (!has(key)) {
            resolved_[key] = std::to_string(fallback);
            return fallback;
        }
        const std::string text = get_string(key);
        std::uint64_t out = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
        if (ec != std::errc{} || ptr != text.data() + text.size())
            throw TypeError("key '" + key + "' expects an unsigned 64-bit integer, got '" + text + "'");
        return out;
    }

    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const
    {
        if (!has(key)) {
            resolved_[key] = fallback ? "true" : "false";
            return fallback;
        }
        const std::string text = get_string(key);
        if (text == "true" || text == "yes" || text == "1")
            return true;
        if (text == "false" || text == "no" || text == "0")
            return false;
        throw TypeError("key '" + key + "' expects true or false, got '" + text + "'");
    }

    // Comma- or whitespace-separated numbers.
    [[nodiscard]] std::vector<double> get_doubles(const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& token : tokens(get_string(key)))
            out.push_back(to_double(key, token));
        return out;
    }

    [[nodiscard]] std::vector<std::int64_t> get_ints(const std::string& key) const
    {
        std::vector<std::int64_t> out;
        for (const auto& token : tokens(get_string(key)))
            out.push_back(to_int(key, token));
        return out;
    }

    // Keys present in the file that were never read.
    [[nodiscard]] std::vector<std::string> unused_keys() const
    {
        std::vector<std::string> out;
        for (const auto& [key, value] : values_)
            if (!used_.contains(key))
                out.push_back(key);
        return out;
    }

    void reject_unused(const std::string& context) const
    {
        const auto unused = unused_keys();
        if (!unused.empty())
            throw ConfigError("key '" + unused.front() + "' is not used by " + context);
    }

    // Every key consulted so far with its effective value (defaults included).
    [[nodiscard]] const std::map<std::string, std::string>& resolved() const noexcept { return resolved_; }
    [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept { return values_; }

    static std::string trim(std::string_view s)
    {
        const auto first = s.find_first_not_of(" \t\r\n");
        if (first == std::string_view::npos)
            return {};
        const auto last = s.find_last_not_of(" \t\r\n");
        return std::string(s.substr(first, last - first + 1));
    }

    static std::vector<std::string> tokens(std::string_view s)
    {
        std::vector<std::string> out;
        std::string current;
        for (char c : s) {
            if (c == ',' || c == ' ' || c == '\t') {
                if (!current.empty())
                    out.push_back(std::move(current));
                current.clear();
            } else {
                current.push_back(c);
            }
        }
        if (!current.empty())
            out.push_back(std::move(current));
        return out;
    }

    static std::vector<std::string> split(std::string_view s, char delimiter)
    {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (true) {
            const auto pos = s.find(delimiter, start);
            out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
            if (pos == std::string_view::npos)
                break;
            start = pos + 1;
        }
        return out;
    }

    static double to_double(const std::string& key, const std::string& text)
    {
        if (text == "inf" || text == "+inf")
            return std::numeric_limits<double>::infinity();
        if (text == "-inf")
            return -std::numeric_limits<double>::infinity();
        double out = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(out))
            throw TypeError("key '" + key + "' expects a number, got '" + text + "'");
        return out;
    }

    static std::int64_t to_int(const std::string& key, const std::string& text)
    {
        // Accept forms like 1e6 when they denote an exact integer.
        std::int64_t out = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
        if (ec == std::errc{} && ptr == text.data() + text.size())
            return out;
        const double d = to_double(key, text);
        if (d != std::floor(d) || std::abs(d) > 9.0e15)
            throw TypeError("key '" + key + "' expects an integer, got '" + text + "'");
        return static_cast<std::int64_t>(d);
    }

    static std::string format_double(double v)
    {
        char buf[64];
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, ptr);
    }

  private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
    mutable std::map<std::string, std::string> resolved_;
};

}  // namespace mixlt
