#pragma once

// Report rendering. A report is one summary object plus an optional list
// of homogeneous rows (hits, witnesses, per-prime checks, basis terms).
//
//   json   summary object, rows under "rows"
//   jsonl  summary on the first line with "record": "summary", then one
//          line per row with "record": <row kind>
//   csv    the rows as a table, or the flattened summary when there are none

#include "patternsieve/core/rational.hpp"
#include "patternsieve/io/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <string>
#include <vector>

namespace patternsieve::io {

using Json = nlohmann::ordered_json;

struct Report {
    std::string command;
    Json summary = Json::object();
    std::string row_kind;
    std::vector<Json> rows;
};

/// Exact value with a float rendering alongside.
inline Json rational_json(const Rational& q) {
    return Json{{"fraction", to_fraction_string(q)}, {"decimal", to_decimal_string(q, 25)}, {"value", q.get_d()}};
}

inline Json offsets_json(const std::vector<Offset>& v) { return Json(v); }

inline Json config_json(const RunConfig& cfg) {
    Json out = Json::object();
    for (const auto& [k, v] : effective_config(cfg, false)) out[k] = v;
    return out;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace detail {

inline std::string csv_cell(const Json& v) {
    std::string s;
    if (v.is_string()) {
        s = v.get<std::string>();
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ' ';
            s += v[i].is_string() ? v[i].get<std::string>() : v[i].dump();
        }
    } else if (v.is_null()) {
        s = "";
    } else {
        s = v.dump();
    }
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

inline void flatten(const Json& obj, const std::string& prefix, Json& out) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it.value().is_object())
            flatten(it.value(), key, out);
        else
            out[key] = it.value();
    }
}

inline std::string csv_table(const std::vector<Json>& rows) {
    std::vector<std::string> header;
    for (const auto& row : rows)
        for (auto it = row.begin(); it != row.end(); ++it)
            if (std::find(header.begin(), header.end(), it.key()) == header.end()) header.push_back(it.key());
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + csv_cell(Json(header[i]));
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out += ",";
            if (row.contains(header[i])) out += csv_cell(row.at(header[i]));
        }
        out += "\n";
    }
    return out;
}

}  // namespace detail

inline Json summary_with_header(const Report& r, const RunConfig& cfg) {
    Json s = Json::object();
    s["command"] = r.command;
    if (cfg.timestamp) s["generated_at"] = utc_timestamp();
    for (auto it = r.summary.begin(); it != r.summary.end(); ++it) s[it.key()] = it.value();
    s["config"] = config_json(cfg);
    return s;
}

inline std::string render(const Report& r, const RunConfig& cfg) {
    Json summary = summary_with_header(r, cfg);
    switch (cfg.format) {
        case Format::json: {
            if (!r.rows.empty()) summary["rows"] = r.rows;
            return summary.dump(2) + "\n";
        }
        case Format::jsonl: {
            Json head = Json::object();
            head["record"] = "summary";
            for (auto it = summary.begin(); it != summary.end(); ++it) head[it.key()] = it.value();
            std::string out = head.dump() + "\n";
            for (const auto& row : r.rows) {
                Json line = Json::object();
                line["record"] = r.row_kind;
                for (auto it = row.begin(); it != row.end(); ++it) line[it.key()] = it.value();
                out += line.dump() + "\n";
            }
            return out;
        }
        case Format::csv: {
            if (!r.rows.empty()) return detail::csv_table(r.rows);
            Json flat = Json::object();
            detail::flatten(summary, "", flat);
            return detail::csv_table({flat});
        }
    }
    return {};
}

}  // namespace patternsieve::io
