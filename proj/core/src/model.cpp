#include "hydro/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <set>

#include "hydro/error.hpp"

namespace hydro {

namespace {

constexpr double kEarthRadiusM = 6'371'008.8;
constexpr auto kMaxFutureSkew = std::chrono::hours(24);

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

Rejection reject(RejectCode code, std::string detail) { return Rejection{code, std::move(detail)}; }

std::optional<Rejection> check_timestamp(Instant t, Instant now) {
    if (t > now + kMaxFutureSkew)
        return reject(RejectCode::BadTimestamp, "timestamp more than 24h in the future: " + format_rfc3339(t));
    return std::nullopt;
}

std::optional<Rejection> check_value(double v, const Parameter& p) {
    if (!std::isfinite(v)) return reject(RejectCode::BadValue, "value is not finite");
    if ((p.plausible_min && v < *p.plausible_min) || (p.plausible_max && v > *p.plausible_max)) {
        std::string bounds = "[" + (p.plausible_min ? std::to_string(*p.plausible_min) : std::string("-inf")) +
                             ", " + (p.plausible_max ? std::to_string(*p.plausible_max) : std::string("inf")) + "]";
        return reject(RejectCode::OutOfPlausibleRange,
                      p.code + " value " + std::to_string(v) + " outside plausible range " + bounds);
    }
    return std::nullopt;
}

}  // namespace

std::string_view to_string(SourceMethod s) {
    switch (s) {
        case SourceMethod::Lab: return "LAB";
        case SourceMethod::Sensor: return "SENSOR";
        case SourceMethod::MobileApp: return "MOBILE_APP";
    }
    return "SENSOR";
}

std::optional<SourceMethod> parse_source(std::string_view text) {
    const auto t = upper(trim(text));
    if (t == "LAB") return SourceMethod::Lab;
    if (t == "SENSOR") return SourceMethod::Sensor;
    if (t == "MOBILE_APP") return SourceMethod::MobileApp;
    return std::nullopt;
}

std::string_view to_string(RejectCode c) {
    switch (c) {
        case RejectCode::BadTimestamp: return "BAD_TIMESTAMP";
        case RejectCode::MissingLocation: return "MISSING_LOCATION";
        case RejectCode::BadCoordinates: return "BAD_COORDINATES";
        case RejectCode::UnknownParameter: return "UNKNOWN_PARAMETER";
        case RejectCode::UnknownUnit: return "UNKNOWN_UNIT";
        case RejectCode::BadValue: return "BAD_VALUE";
        case RejectCode::OutOfPlausibleRange: return "OUT_OF_PLAUSIBLE_RANGE";
        case RejectCode::BadMetadata: return "BAD_METADATA";
    }
    return "BAD_VALUE";
}

bool GeoPoint::valid() const {
    return std::isfinite(latitude) && std::isfinite(longitude) && latitude >= -90.0 && latitude <= 90.0 &&
           longitude >= -180.0 && longitude <= 180.0 && (!altitude || std::isfinite(*altitude));
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
    constexpr double rad = std::numbers::pi / 180.0;
    const double dlat = (b.latitude - a.latitude) * rad;
    const double dlon = (b.longitude - a.longitude) * rad;
    const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(a.latitude * rad) * std::cos(b.latitude * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(s)));
}

void ParameterRegistry::add(Parameter p) {
    if (p.code.empty()) throw Error("INVALID_CONFIG", "parameter code must be non-empty");
    if (p.canonical_unit.empty()) throw Error("INVALID_CONFIG", "parameter " + p.code + " has no canonical unit");
    if (p.plausible_min && p.plausible_max && *p.plausible_min > *p.plausible_max)
        throw Error("INVALID_CONFIG", "parameter " + p.code + " has plausible_min > plausible_max");
    if (params_.contains(p.code)) throw Error("INVALID_CONFIG", "duplicate parameter code " + p.code);
    auto code = p.code;
    params_.emplace(std::move(code), std::move(p));
}

void ParameterRegistry::add_rule(UnitRule r) {
    if (!(r.scale > 0.0) || !std::isfinite(r.scale))
        throw Error("INVALID_CONFIG", "unit rule " + r.from_unit + " -> " + r.to_unit + " needs a positive scale");
    for (const auto& existing : rules_) {
        if (existing.from_unit == r.from_unit && existing.to_unit == r.to_unit)
            throw Error("INVALID_CONFIG", "duplicate unit rule " + r.from_unit + " -> " + r.to_unit);
    }
    rules_.push_back(std::move(r));
}

const Parameter* ParameterRegistry::find(std::string_view code) const {
    auto it = params_.find(code);
    return it == params_.end() ? nullptr : &it->second;
}

std::optional<double> normalize_unit(double value, std::string_view unit, const Parameter& parameter,
                                     std::span<const UnitRule> rules) {
    if (unit == parameter.canonical_unit) return value;
    for (const auto& r : rules) {
        if (r.from_unit == unit && r.to_unit == parameter.canonical_unit) return value * r.scale;
    }
    return std::nullopt;
}

Validated validate_measurement(const RawMeasurement& raw, const ParameterRegistry& registry, Instant now) {
    Measurement m;

    const auto ts = parse_rfc3339(trim(raw.timestamp));
    if (!ts) return reject(RejectCode::BadTimestamp, "unparseable timestamp '" + raw.timestamp + "'");
    if (auto r = check_timestamp(*ts, now)) return *r;
    m.timestamp = *ts;

    if (raw.location_id) {
        auto id = trim(*raw.location_id);
        if (!id.empty()) m.location_id = std::move(id);
    }
    const bool any_coord = raw.latitude || raw.longitude || raw.altitude;
    if (!m.location_id && !any_coord) return reject(RejectCode::MissingLocation, "neither location_id nor coordinates given");
    if (any_coord) {
        if (!raw.latitude || !raw.longitude)
            return reject(RejectCode::BadCoordinates, "latitude and longitude must be given together");
        GeoPoint p{*raw.latitude, *raw.longitude, raw.altitude};
        if (!p.valid())
            return reject(RejectCode::BadCoordinates, "coordinates out of range: " + std::to_string(p.latitude) + ", " +
                                                          std::to_string(p.longitude));
        m.point = p;
    }

    const auto code = upper(trim(raw.parameter));
    const Parameter* param = registry.find(code);
    if (!param) return reject(RejectCode::UnknownParameter, "unknown parameter '" + raw.parameter + "'");
    m.parameter = code;

    const auto unit = trim(raw.unit);
    const auto value = normalize_unit(raw.value, unit, *param, registry.unit_rules());
    if (!value)
        return reject(RejectCode::UnknownUnit, "no rule converts '" + unit + "' to " + param->canonical_unit);
    if (auto r = check_value(*value, *param)) return *r;
    m.value = *value;
    m.unit = param->canonical_unit;
    m.original_unit = unit;
    m.source = raw.source;

    for (const auto& [k, v] : raw.metadata) {
        if (k.empty()) return reject(RejectCode::BadMetadata, "metadata key must be non-empty");
        if (!m.metadata.emplace(k, v).second) return reject(RejectCode::BadMetadata, "duplicate metadata key '" + k + "'");
    }
    return m;
}

Validated validate_measurement(const Measurement& m, const ParameterRegistry& registry, Instant now) {
    if (auto r = check_timestamp(m.timestamp, now)) return *r;
    if (m.location_id && m.location_id->empty()) return reject(RejectCode::MissingLocation, "empty location_id");
    if (!m.location_id && !m.point) return reject(RejectCode::MissingLocation, "neither location_id nor point given");
    if (m.point && !m.point->valid()) return reject(RejectCode::BadCoordinates, "coordinates out of range");
    const Parameter* param = registry.find(m.parameter);
    if (!param) return reject(RejectCode::UnknownParameter, "unknown parameter '" + m.parameter + "'");
    if (m.unit != param->canonical_unit)
        return reject(RejectCode::UnknownUnit, "value not in canonical unit " + param->canonical_unit);
    if (auto r = check_value(m.value, *param)) return *r;
    for (const auto& kv : m.metadata) {
        if (kv.first.empty()) return reject(RejectCode::BadMetadata, "metadata key must be non-empty");
    }
    return m;
}

RawMeasurement to_raw(const Measurement& m) {
    RawMeasurement r;
    r.location_id = m.location_id;
    if (m.point) {
        r.latitude = m.point->latitude;
        r.longitude = m.point->longitude;
        r.altitude = m.point->altitude;
    }
    r.timestamp = format_rfc3339(m.timestamp);
    r.parameter = m.parameter;
    r.value = m.value;
    r.unit = m.unit;
    r.source = m.source;
    r.metadata.assign(m.metadata.begin(), m.metadata.end());
    return r;
}

}  // namespace hydro
