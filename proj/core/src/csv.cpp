#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "hydro/error.hpp"
#include "hydro/ingest.hpp"

namespace hydro {

namespace {

constexpr std::string_view kMetaPrefix = "meta.";

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

// Splits one RFC 4180 record starting at `pos`; advances `pos` past its line
// terminator. Quoted fields may contain separators, quotes ("") and newlines.
std::vector<std::string> next_record(std::string_view doc, std::size_t& pos, bool& malformed) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    malformed = false;
    while (pos < doc.size()) {
        const char c = doc[pos];
        if (quoted) {
            if (c == '"') {
                if (pos + 1 < doc.size() && doc[pos + 1] == '"') {
                    field.push_back('"');
                    pos += 2;
                    continue;
                }
                quoted = false;
                ++pos;
                continue;
            }
            field.push_back(c);
            ++pos;
            continue;
        }
        if (c == '"' && trim(field).empty() && !was_quoted) {
            field.clear();
            quoted = was_quoted = true;
            ++pos;
            continue;
        }
        if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
            ++pos;
            continue;
        }
        if (c == '\r' || c == '\n') {
            pos += (c == '\r' && pos + 1 < doc.size() && doc[pos + 1] == '\n') ? 2 : 1;
            fields.push_back(std::move(field));
            return fields;
        }
        if (was_quoted && c != ' ' && c != '\t') malformed = true;
        field.push_back(c);
        ++pos;
    }
    if (quoted) malformed = true;
    fields.push_back(std::move(field));
    return fields;
}

bool blank(const std::vector<std::string>& rec) { return rec.size() == 1 && trim(rec[0]).empty(); }

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string format_number(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string quote(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos && trim(s).size() == s.size()) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

ParsedBatch parse_csv(std::string_view doc) {
    if (doc.starts_with("\xEF\xBB\xBF")) doc.remove_prefix(3);

    std::size_t pos = 0;
    bool malformed = false;
    std::vector<std::string> header;
    while (pos < doc.size()) {
        header = next_record(doc, pos, malformed);
        if (!blank(header)) break;
        header.clear();
    }
    if (header.empty() || malformed) throw Error("FATAL_NO_HEADER", "CSV header row is missing or unreadable");

    std::map<std::string, std::size_t, std::less<>> columns;
    std::vector<std::pair<std::string, std::size_t>> meta_columns;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name(trim(header[i]));
        if (!columns.emplace(name, i).second) throw Error("FATAL_NO_HEADER", "duplicate CSV column '" + name + "'");
        if (name.starts_with(kMetaPrefix)) meta_columns.emplace_back(name.substr(kMetaPrefix.size()), i);
    }
    for (auto required : kCsvRequiredColumns) {
        if (!columns.contains(required))
            throw Error("FATAL_NO_HEADER", "CSV header lacks required column '" + std::string(required) + "'");
    }
    const bool has_id = columns.contains("location_id");
    const bool has_point = columns.contains("latitude") && columns.contains("longitude");
    if (!has_id && !has_point)
        throw Error("FATAL_NO_HEADER", "CSV header needs location_id or both latitude and longitude");

    auto col = [&](std::string_view name) -> std::optional<std::size_t> {
        auto it = columns.find(name);
        return it == columns.end() ? std::nullopt : std::optional<std::size_t>(it->second);
    };
    const std::size_t c_ts = *col("timestamp"), c_param = *col("parameter"), c_value = *col("value"),
                      c_unit = *col("unit"), c_source = *col("source");
    const auto c_id = col("location_id"), c_lat = col("latitude"), c_lon = col("longitude"), c_alt = col("altitude");

    ParsedBatch out;
    std::size_t row = 0;
    while (pos < doc.size()) {
        auto rec = next_record(doc, pos, malformed);
        if (blank(rec)) continue;
        ++row;
        if (malformed || rec.size() != header.size()) {
            out.errors.push_back({row, "BAD_ROW",
                                  malformed ? "malformed quoting"
                                            : "expected " + std::to_string(header.size()) + " fields, got " +
                                                  std::to_string(rec.size())});
            continue;
        }

        RawRow r{row, {}};
        auto& raw = r.raw;
        raw.timestamp = std::string(trim(rec[c_ts]));
        raw.parameter = std::string(trim(rec[c_param]));
        raw.unit = std::string(trim(rec[c_unit]));

        const auto value = parse_number(rec[c_value]);
        if (!value) {
            out.errors.push_back({row, "BAD_VALUE", "value '" + rec[c_value] + "' is not a number"});
            continue;
        }
        raw.value = *value;

        const auto source = parse_source(rec[c_source]);
        if (!source) {
            out.errors.push_back({row, "BAD_SOURCE", "source '" + rec[c_source] + "' is not LAB, SENSOR or MOBILE_APP"});
            continue;
        }
        raw.source = *source;

        if (c_id && !trim(rec[*c_id]).empty()) raw.location_id = std::string(trim(rec[*c_id]));
        bool coords_ok = true;
        for (auto [c, dst] : {std::pair{c_lat, &raw.latitude}, std::pair{c_lon, &raw.longitude},
                              std::pair{c_alt, &raw.altitude}}) {
            if (!c || trim(rec[*c]).empty()) continue;
            *dst = parse_number(rec[*c]);
            if (!*dst) coords_ok = false;
        }
        if (!coords_ok) {
            out.errors.push_back({row, "BAD_COORDINATES", "coordinate is not a number"});
            continue;
        }

        for (const auto& [key, c] : meta_columns) {
            if (!rec[c].empty()) raw.metadata.emplace_back(key, rec[c]);
        }
        out.rows.push_back(std::move(r));
    }
    return out;
}

std::string serialize_csv(std::span<const Measurement> measurements) {
    std::set<std::string> meta_keys;
    for (const auto& m : measurements) {
        for (const auto& kv : m.metadata) meta_keys.insert(kv.first);
    }
    std::string out = "timestamp,parameter,value,unit,source,location_id,latitude,longitude,altitude";
    for (const auto& k : meta_keys) out += "," + quote(std::string(kMetaPrefix) + k);
    out += "\n";
    for (const auto& m : measurements) {
        out += format_rfc3339(m.timestamp);
        out += "," + quote(m.parameter);
        out += "," + format_number(m.value);
        out += "," + quote(m.unit);
        out += "," + std::string(to_string(m.source));
        out += "," + (m.location_id ? quote(*m.location_id) : std::string());
        out += "," + (m.point ? format_number(m.point->latitude) : std::string());
        out += "," + (m.point ? format_number(m.point->longitude) : std::string());
        out += "," + (m.point && m.point->altitude ? format_number(*m.point->altitude) : std::string());
        for (const auto& k : meta_keys) {
            auto it = m.metadata.find(k);
            out += "," + (it == m.metadata.end() ? std::string() : quote(it->second));
        }
        out += "\n";
    }
    return out;
}

}  // namespace hydro
