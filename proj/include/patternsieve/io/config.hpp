#pragma once

// Run configuration: defaults, key=value files, and the effective-config
// echo embedded in every report.

#include "patternsieve/admissible.hpp"
#include "patternsieve/core/rational.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace patternsieve::io {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Format { json, jsonl, csv };

inline std::string to_string(Format f) {
    switch (f) {
        case Format::json: return "json";
        case Format::jsonl: return "jsonl";
        case Format::csv: return "csv";
    }
    return "json";
}

inline Format parse_format(const std::string& s) {
    if (s == "json") return Format::json;
    if (s == "jsonl") return Format::jsonl;
    if (s == "csv") return Format::csv;
    throw ConfigError("unknown format '" + s + "' (expected json, jsonl or csv)");
}

struct RunConfig {
    // Mathematical parameters; echoed in reports.
    std::vector<Offset> tuple{0, 2, 6};
    unsigned k = 0;  // 0: take |tuple|
    u64 N = 1'000'000;
    Rational theta{1, 2};
    Rational epsilon{1, 20};
    u64 D0 = 7;
    Rational c1{1, 50};
    unsigned F_degree = 1;
    bool exact = false;
    u64 lo = 0;  // window / range start (0 with hi = 0: command default)
    u64 hi = 0;
    unsigned r_k = 1;
    unsigned index = 0;
    unsigned primes = 10;
    u64 R = 20;
    unsigned degree = 3;
    unsigned max_power_sum = 3;
    unsigned precision = 2048;
    u64 denominator_cap = 1'000'000;
    std::string strategy = "greedy";
    Offset h_cap = 1'000'000;
    unsigned m = 1;
    unsigned ell = 3;
    u64 X = 1'000'000;
    std::vector<Offset> pattern{0, 2};
    std::vector<Offset> exclude;
    bool consecutive = false;
    std::vector<Offset> A{2, 4, 6};

    // Runtime settings; never change a result, so not echoed.
    Format format = Format::json;
    std::string output;
    unsigned threads = 0;
    bool timestamp = true;

    unsigned resolved_k() const { return k == 0 ? static_cast<unsigned>(tuple.size()) : k; }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

template <typename T>
T parse_unsigned(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    unsigned long long x = 0;
    try {
        x = std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigError(key + ": value out of range: " + v);
    }
    if (x > std::numeric_limits<T>::max()) throw ConfigError(key + ": value out of range: " + v);
    return static_cast<T>(x);
}

// Integers may be written as 1e6 or 10^6 in addition to plain digits.
inline u64 parse_count(const std::string& key, const std::string& v) {
    if (auto caret = v.find('^'); caret != std::string::npos) {
        u64 base = parse_unsigned<u64>(key, v.substr(0, caret));
        unsigned e = parse_unsigned<unsigned>(key, v.substr(caret + 1));
        Integer z;
        mpz_ui_pow_ui(z.get_mpz_t(), base, e);
        if (!z.fits_ulong_p()) throw ConfigError(key + ": value out of range: " + v);
        return z.get_ui();
    }
    if (v.find_first_of("eE.") != std::string::npos) {
        Rational q;
        try {
            q = parse_rational(v);
        } catch (const std::exception&) {
            throw ConfigError(key + ": expected an integer, got '" + v + "'");
        }
        if (q.get_den() != 1 || sgn(q) < 0 || !q.get_num().fits_ulong_p())
            throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
        return q.get_num().get_ui();
    }
    return parse_unsigned<u64>(key, v);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

inline Rational parse_q(const std::string& key, const std::string& v) {
    try {
        return parse_rational(v);
    } catch (const std::exception& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

inline std::vector<Offset> parse_list(const std::string& key, const std::string& v, bool allow_empty) {
    if (v.empty() && allow_empty) return {};
    try {
        return parse_offsets(v);
    } catch (const std::exception& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

inline Offset parse_signed(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

template <typename T>
T narrow(const char* key, const std::string& text, u64 v) {
    if (v > std::numeric_limits<T>::max()) throw ConfigError(std::string(key) + ": value out of range: " + text);
    return static_cast<T>(v);
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
    bool runtime = false;
};

inline std::string str(const Rational& q) { return to_fraction_string(q); }
inline std::string str(bool b) { return b ? "true" : "false"; }

// Declaration order is the echo order.
inline const std::vector<std::pair<std::string, Field>>& fields() {
    using C = RunConfig;
    using S = const std::string&;
#define PS_UINT(name, runtime)                                                                     \
    {#name, {[](C& c, S v) { c.name = narrow<decltype(c.name)>(#name, v, parse_count(#name, v)); }, \
             [](const C& c) { return std::to_string(c.name); }, runtime}}
    static const std::vector<std::pair<std::string, Field>> table = {
        {"tuple", {[](C& c, S v) { c.tuple = parse_list("tuple", v, false); },
                   [](const C& c) { return format_offsets(c.tuple); }}},
        PS_UINT(k, false),
        PS_UINT(N, false),
        {"theta", {[](C& c, S v) { c.theta = parse_q("theta", v); }, [](const C& c) { return str(c.theta); }}},
        {"epsilon", {[](C& c, S v) { c.epsilon = parse_q("epsilon", v); }, [](const C& c) { return str(c.epsilon); }}},
        PS_UINT(D0, false),
        {"c1", {[](C& c, S v) { c.c1 = parse_q("c1", v); }, [](const C& c) { return str(c.c1); }}},
        PS_UINT(F_degree, false),
        {"exact", {[](C& c, S v) { c.exact = parse_bool("exact", v); }, [](const C& c) { return str(c.exact); }}},
        PS_UINT(lo, false),
        PS_UINT(hi, false),
        PS_UINT(r_k, false),
        PS_UINT(index, false),
        PS_UINT(primes, false),
        PS_UINT(R, false),
        PS_UINT(degree, false),
        PS_UINT(max_power_sum, false),
        PS_UINT(precision, false),
        PS_UINT(denominator_cap, false),
        {"strategy", {[](C& c, S v) {
                          if (v != "greedy" && v != "exhaustive")
                              throw ConfigError("strategy: expected greedy or exhaustive, got '" + v + "'");
                          c.strategy = v;
                      },
                      [](const C& c) { return c.strategy; }}},
        {"h_cap", {[](C& c, S v) { c.h_cap = parse_signed("h_cap", v); }, [](const C& c) { return std::to_string(c.h_cap); }}},
        PS_UINT(m, false),
        PS_UINT(ell, false),
        PS_UINT(X, false),
        {"pattern", {[](C& c, S v) { c.pattern = parse_list("pattern", v, false); },
                     [](const C& c) { return format_offsets(c.pattern); }}},
        {"exclude", {[](C& c, S v) { c.exclude = parse_list("exclude", v, true); },
                     [](const C& c) { return format_offsets(c.exclude); }}},
        {"consecutive", {[](C& c, S v) { c.consecutive = parse_bool("consecutive", v); },
                         [](const C& c) { return str(c.consecutive); }}},
        {"A", {[](C& c, S v) { c.A = parse_list("A", v, false); }, [](const C& c) { return format_offsets(c.A); }}},
        {"format", {[](C& c, S v) { c.format = parse_format(v); }, [](const C& c) { return to_string(c.format); }, true}},
        {"output", {[](C& c, S v) { c.output = v; }, [](const C& c) { return c.output; }, true}},
        PS_UINT(threads, true),
        {"timestamp", {[](C& c, S v) { c.timestamp = parse_bool("timestamp", v); },
                       [](const C& c) { return str(c.timestamp); }, true}},
    };
#undef PS_UINT
    return table;
}

inline const Field& field(const std::string& key) {
    for (const auto& [name, f] : fields())
        if (name == key) return f;
    throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace detail

inline bool is_runtime_key(const std::string& key) {
    return detail::field(key).runtime;
}

inline std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [name, f] : detail::fields()) out.push_back(name);
    return out;
}

inline void set_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    detail::field(key).set(cfg, value);
}

inline std::string get_value(const RunConfig& cfg, const std::string& key) { return detail::field(key).get(cfg); }

/// Ordered (key, value) pairs; runtime keys only when requested.
inline std::vector<std::pair<std::string, std::string>> effective_config(const RunConfig& cfg, bool with_runtime) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, f] : detail::fields())
        if (with_runtime || !is_runtime_key(name)) out.emplace_back(name, f.get(cfg));
    return out;
}

/// key=value lines; '#' starts a comment; blank lines ignored; unknown or
/// repeated keys are errors.
inline std::vector<std::pair<std::string, std::string>> parse_kv(std::istream& in, const std::string& origin = "config") {
    std::vector<std::pair<std::string, std::string>> out;
    std::map<std::string, int> seen;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        detail::field(key);  // rejects unknown keys
        if (seen.contains(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": key '" + key + "' repeated (first on line " +
                              std::to_string(seen[key]) + ")");
        seen[key] = lineno;
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

inline std::string to_kv(const RunConfig& cfg, bool with_runtime = true) {
    std::string out;
    for (const auto& [k, v] : effective_config(cfg, with_runtime)) out += k + "=" + v + "\n";
    return out;
}

inline RunConfig apply_kv(RunConfig cfg, const std::vector<std::pair<std::string, std::string>>& kv) {
    for (const auto& [k, v] : kv) set_value(cfg, k, v);
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text, RunConfig base = {}) {
    std::istringstream in(text);
    return apply_kv(std::move(base), parse_kv(in));
}

inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_kv(in, path);
}

}  // namespace patternsieve::io
