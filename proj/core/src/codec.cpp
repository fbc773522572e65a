#include "hydro/codec.hpp"

#include "hydro/error.hpp"

namespace hydro {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }
json opt(const std::optional<Instant>& v) { return v ? json(format_rfc3339(*v)) : json(nullptr); }

}  // namespace

json to_json(const Measurement& m) {
    json j;
    if (m.location_id) j["location_id"] = *m.location_id;
    if (m.point) {
        j["latitude"] = m.point->latitude;
        j["longitude"] = m.point->longitude;
        if (m.point->altitude) j["altitude"] = *m.point->altitude;
    }
    j["timestamp"] = format_rfc3339(m.timestamp);
    j["parameter"] = m.parameter;
    j["value"] = m.value;
    j["unit"] = m.unit;
    j["original_unit"] = m.original_unit;
    j["source"] = to_string(m.source);
    j["metadata"] = json::object();
    for (const auto& [k, v] : m.metadata) j["metadata"][k] = v;
    return j;
}

Measurement measurement_from_json(const json& j) {
    try {
        Measurement m;
        if (j.contains("location_id")) m.location_id = j.at("location_id").get<std::string>();
        if (j.contains("latitude") || j.contains("longitude")) {
            GeoPoint p{j.at("latitude").get<double>(), j.at("longitude").get<double>(), std::nullopt};
            if (j.contains("altitude")) p.altitude = j.at("altitude").get<double>();
            m.point = p;
        }
        const auto ts = parse_rfc3339(j.at("timestamp").get<std::string>());
        if (!ts) throw Error("BAD_RECORD", "bad timestamp in record");
        m.timestamp = *ts;
        m.parameter = j.at("parameter").get<std::string>();
        m.value = j.at("value").get<double>();
        m.unit = j.at("unit").get<std::string>();
        m.original_unit = j.value("original_unit", m.unit);
        const auto src = parse_source(j.at("source").get<std::string>());
        if (!src) throw Error("BAD_RECORD", "bad source in record");
        m.source = *src;
        if (j.contains("metadata")) {
            for (const auto& [k, v] : j.at("metadata").items()) m.metadata.emplace(k, v.get<std::string>());
        }
        return m;
    } catch (const json::exception& e) {
        throw Error("BAD_RECORD", std::string("malformed measurement record: ") + e.what());
    }
}

json to_json(const Location& l) {
    json j{{"id", l.id}, {"name", l.name}, {"latitude", l.point.latitude}, {"longitude", l.point.longitude}};
    j["altitude"] = opt(l.point.altitude);
    j["basin"] = opt(l.basin);
    return j;
}

json to_json(const LocationSummary& s) {
    json j = to_json(s.location);
    j["parameter_count"] = s.parameter_count;
    j["latest_timestamp"] = opt(s.latest_timestamp);
    return j;
}

json to_json(const Parameter& p) {
    return json{{"code", p.code},
                {"name", p.display_name},
                {"unit", p.canonical_unit},
                {"plausible_min", opt(p.plausible_min)},
                {"plausible_max", opt(p.plausible_max)},
                {"description", p.description}};
}

json to_json(const ReconciledRange& r) {
    return json{{"parameter", r.parameter},
                {"purpose", r.purpose},
                {"min", opt(r.min)},
                {"max", opt(r.max)},
                {"contributing_authorities", r.contributing_authorities}};
}

json to_json(const PurposeProfile& p) {
    json ranges = json::array();
    for (const auto& code : p.relevant_parameters) {
        if (const auto* r = p.range_for(code)) ranges.push_back(to_json(*r));
    }
    return json{{"id", p.id}, {"name", p.display_name}, {"relevant_parameters", p.relevant_parameters}, {"ranges", ranges}};
}

json to_json(const Assessment& a) {
    json entries = json::array();
    for (const auto& e : a.entries) {
        json j{{"parameter", e.parameter}, {"relevant", e.relevant}, {"status", to_string(e.status)}};
        j["latest_value"] = opt(e.latest_value);
        j["reading_timestamp"] = opt(e.reading_timestamp);
        j["source"] = e.source ? json(to_string(*e.source)) : json(nullptr);
        if (e.range) {
            j["range"] = json{{"min", opt(e.range->min)},
                              {"max", opt(e.range->max)},
                              {"contributing_authorities", e.range->contributing_authorities}};
        } else {
            j["range"] = nullptr;
        }
        entries.push_back(std::move(j));
    }
    return json{{"location_id", a.location_id}, {"purpose", a.purpose}, {"as_of", format_rfc3339(a.as_of)},
                {"entries", entries}};
}

json to_json(const SeriesPoint& p) {
    return json{{"t", format_rfc3339(p.t)}, {"value", p.value}, {"count", p.count}};
}

json to_json(const LatestMap& latest) {
    json j = json::object();
    for (const auto& [code, v] : latest) {
        j[code] = json{{"value", v.value}, {"timestamp", format_rfc3339(v.timestamp)}, {"source", to_string(v.source)}};
    }
    return j;
}

json to_json(const IngestReport& r) {
    json rejections = json::array();
    for (const auto& e : r.rejections) rejections.push_back(json{{"row", e.row}, {"code", e.code}, {"detail", e.detail}});
    json j{{"accepted", r.accepted},
           {"rejected", r.rejected},
           {"rejections", rejections},
           {"inserted", r.inserted},
           {"replaced", r.replaced},
           {"new_locations", r.new_locations}};
    if (r.storage_error) j["storage_error"] = *r.storage_error;
    return j;
}

json to_json(const CorrelationReport& r) {
    return json{{"location_id", r.location_id},
                {"parameter", r.parameter},
                {"source_a", to_string(r.source_a)},
                {"source_b", to_string(r.source_b)},
                {"tolerance_s", r.tolerance_s},
                {"from", format_rfc3339(r.from)},
                {"to", format_rfc3339(r.to)},
                {"n_pairs", r.n_pairs},
                {"r", opt(r.r)},
                {"reason", opt(r.reason)}};
}

json locations_json(const std::vector<LocationSummary>& locations) {
    json out = json::array();
    for (const auto& s : locations) out.push_back(to_json(s));
    return out;
}

json series_json(const std::vector<SeriesPoint>& points) {
    json out = json::array();
    for (const auto& p : points) out.push_back(to_json(p));
    return out;
}

json purposes_json(const Standards& standards) {
    json out = json::array();
    const auto* def = standards.default_purpose();
    for (const auto& p : standards.purposes) {
        out.push_back(json{{"id", p.id},
                           {"name", p.display_name},
                           {"default", def == &p},
                           {"relevant_parameters", p.relevant_parameters}});
    }
    return out;
}

json parameters_json(const Standards& standards) {
    json out = json::array();
    for (const auto& [code, p] : standards.registry.parameters()) out.push_back(to_json(p));
    return out;
}

std::string render(const json& j) { return j.dump(2) + "\n"; }

}  // namespace hydro
