#pragma once

#include "freecum/rational.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace freecum {

/// Expected-value marker for entries that only assert a nonzero result.
inline const std::string kNonzero = "!=0";

struct ReportEntry {
    std::string query;
    std::string value;     // exact "p/q"
    std::string expected;  // exact "p/q" or kNonzero
    bool pass = false;
};

inline ReportEntry make_entry(std::string query, const Rational& value, const Rational& expected)
{
    return {std::move(query), to_string(value), to_string(expected), value == expected};
}

inline ReportEntry make_nonzero_entry(std::string query, const Rational& value)
{
    return {std::move(query), to_string(value), kNonzero, value != 0};
}

struct VerificationReport {
    std::string check_name;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<ReportEntry> entries;
    std::vector<std::string> notes;
    double elapsed_ms = 0.0;

    bool pass() const
    {
        return std::all_of(entries.begin(), entries.end(), [](const ReportEntry& e) { return e.pass; });
    }

    std::size_t failures() const
    {
        return static_cast<std::size_t>(
            std::count_if(entries.begin(), entries.end(), [](const ReportEntry& e) { return !e.pass; }));
    }
};

inline nlohmann::json to_json(const VerificationReport& r, bool with_timing = false)
{
    nlohmann::json j;
    j["check"] = r.check_name;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : r.parameters)
        params[k] = v;
    j["parameters"] = params;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : r.entries)
        entries.push_back({{"query", e.query}, {"value", e.value}, {"expected", e.expected}, {"pass", e.pass}});
    j["entries"] = entries;
    j["notes"] = r.notes;
    j["pass"] = r.pass();
    if (with_timing)
        j["elapsed_ms"] = r.elapsed_ms;
    return j;
}

inline VerificationReport report_from_json(const nlohmann::json& j)
{
    VerificationReport r;
    r.check_name = j.at("check").get<std::string>();
    for (const auto& [k, v] : j.at("parameters").items())
        r.parameters.emplace_back(k, v.get<std::string>());
    for (const auto& e : j.at("entries"))
        r.entries.push_back({e.at("query").get<std::string>(), e.at("value").get<std::string>(),
                             e.at("expected").get<std::string>(), e.at("pass").get<bool>()});
    r.notes = j.at("notes").get<std::vector<std::string>>();
    if (j.contains("elapsed_ms"))
        r.elapsed_ms = j.at("elapsed_ms").get<double>();
    return r;
}

inline std::string parameter_line(const VerificationReport& r)
{
    std::string out;
    for (const auto& [k, v] : r.parameters) {
        if (!out.empty())
            out += ' ';
        out += k + "=" + v;
    }
    return out;
}

/// Aligned plain-text table.
inline std::string to_table(const VerificationReport& r, bool with_timing = false)
{
    std::size_t wq = 5, wv = 5, we = 8;
    for (const auto& e : r.entries) {
        wq = std::max(wq, e.query.size());
        wv = std::max(wv, e.value.size());
        we = std::max(we, e.expected.size());
    }
    auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
    std::ostringstream out;
    out << "# " << r.check_name << "  " << parameter_line(r) << "\n";
    out << pad("query", wq) << "  " << pad("value", wv) << "  " << pad("expected", we) << "  pass\n";
    for (const auto& e : r.entries)
        out << pad(e.query, wq) << "  " << pad(e.value, wv) << "  " << pad(e.expected, we) << "  "
            << (e.pass ? "yes" : "NO") << "\n";
    for (const auto& note : r.notes)
        out << "note: " << note << "\n";
    out << "overall: " << (r.pass() ? "PASS" : "FAIL") << " (" << r.entries.size() << " entries, " << r.failures()
        << " failed)";
    if (with_timing)
        out << " in " << r.elapsed_ms << " ms";
    out << "\n";
    return out.str();
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string to_csv(const VerificationReport& r, bool header = true)
{
    std::ostringstream out;
    if (header)
        out << "check,parameters,query,value,expected,pass\n";
    for (const auto& e : r.entries)
        out << csv_field(r.check_name) << ',' << csv_field(parameter_line(r)) << ',' << csv_field(e.query) << ','
            << csv_field(e.value) << ',' << csv_field(e.expected) << ',' << (e.pass ? "true" : "false") << "\n";
    return out.str();
}

}  // namespace freecum
