#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "hydro/error.hpp"
#include "hydro/ingest.hpp"

namespace hydro {

using nlohmann::json;

namespace {

std::optional<RowError> raw_from_object(const json& obj, std::size_t row, RawMeasurement& raw) {
    if (!obj.is_object()) return RowError{row, "BAD_ROW", "measurement must be a JSON object"};

    auto text = [&](const char* key) -> std::string {
        auto it = obj.find(key);
        return it != obj.end() && it->is_string() ? it->get<std::string>() : std::string();
    };
    raw.timestamp = text("timestamp");
    raw.parameter = text("parameter");
    raw.unit = text("unit");

    auto v = obj.find("value");
    if (v == obj.end() || !v->is_number()) return RowError{row, "BAD_VALUE", "value must be a JSON number"};
    raw.value = v->get<double>();

    const auto source = parse_source(text("source"));
    if (!source) return RowError{row, "BAD_SOURCE", "source must be LAB, SENSOR or MOBILE_APP"};
    raw.source = *source;

    if (auto id = obj.find("location_id"); id != obj.end() && !id->is_null()) {
        if (!id->is_string()) return RowError{row, "BAD_ROW", "location_id must be a string"};
        if (!id->get<std::string>().empty()) raw.location_id = id->get<std::string>();
    }
    for (auto [key, dst] : {std::pair{"latitude", &raw.latitude}, std::pair{"longitude", &raw.longitude},
                            std::pair{"altitude", &raw.altitude}}) {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) continue;
        if (!it->is_number()) return RowError{row, "BAD_COORDINATES", std::string(key) + " must be a number"};
        *dst = it->get<double>();
    }
    if (auto meta = obj.find("metadata"); meta != obj.end() && !meta->is_null()) {
        if (!meta->is_object()) return RowError{row, "BAD_METADATA", "metadata must be an object of strings"};
        for (const auto& [k, val] : meta->items()) {
            if (!val.is_string()) return RowError{row, "BAD_METADATA", "metadata value for '" + k + "' must be a string"};
            raw.metadata.emplace_back(k, val.get<std::string>());
        }
    }
    return std::nullopt;
}

}  // namespace

ParsedBatch parse_json_batch(std::string_view body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw Error("BAD_REQUEST", std::string("request body is not valid JSON: ") + e.what());
    }
    const json* items = &doc;
    if (doc.is_object()) {
        auto it = doc.find("measurements");
        if (it == doc.end()) throw Error("BAD_REQUEST", "expected an array or an object with 'measurements'");
        items = &*it;
    }
    if (!items->is_array()) throw Error("BAD_REQUEST", "measurements must be a JSON array");

    ParsedBatch out;
    std::size_t row = 0;
    for (const auto& item : *items) {
        ++row;
        RawRow r{row, {}};
        if (auto err = raw_from_object(item, row, r.raw)) {
            out.errors.push_back(std::move(*err));
        } else {
            out.rows.push_back(std::move(r));
        }
    }
    return out;
}

IngestReport ingest_batch(const ParsedBatch& batch, const ParameterRegistry& registry, Store& store, Instant now) {
    IngestReport report;
    report.rejections = batch.errors;

    std::vector<Measurement> accepted;
    std::vector<std::size_t> accepted_rows;
    accepted.reserve(batch.rows.size());
    std::set<std::string, std::less<>> introduced;

    for (const auto& [row, raw] : batch.rows) {
        auto result = validate_measurement(raw, registry, now);
        if (auto* rej = std::get_if<Rejection>(&result)) {
            report.rejections.push_back({row, std::string(to_string(rej->code)), std::move(rej->detail)});
            continue;
        }
        auto& m = std::get<Measurement>(result);
        if (m.location_id && !introduced.contains(*m.location_id) && !store.has_location(*m.location_id)) {
            if (!m.point) {
                report.rejections.push_back(
                    {row, "UNKNOWN_LOCATION", "location '" + *m.location_id + "' does not exist and no coordinates given"});
                continue;
            }
            introduced.insert(*m.location_id);
        }
        accepted.push_back(std::move(m));
        accepted_rows.push_back(row);
    }

    try {
        const auto put = store.put_batch(accepted);
        report.inserted = put.inserted;
        report.replaced = put.replaced;
        report.new_locations = put.new_locations;
        report.accepted = accepted.size();
    } catch (const Error& e) {
        if (e.code() != "STORAGE_IO") throw;
        report.storage_error = e.what();
        for (auto row : accepted_rows) report.rejections.push_back({row, "STORAGE_IO", e.what()});
        report.accepted = 0;
    }

    std::sort(report.rejections.begin(), report.rejections.end(),
              [](const RowError& a, const RowError& b) { return a.row < b.row; });
    report.rejected = report.rejections.size();
    return report;
}

}  // namespace hydro
