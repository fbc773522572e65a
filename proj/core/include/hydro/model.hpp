#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hydro/time.hpp"

namespace hydro {

/// How a reading was collected. Declaration order is the tie-break priority
/// when two readings share a timestamp: LAB beats SENSOR beats MOBILE_APP.
enum class SourceMethod : std::uint8_t { Lab = 0, Sensor = 1, MobileApp = 2 };

inline constexpr SourceMethod kAllSources[] = {SourceMethod::Lab, SourceMethod::Sensor,
                                               SourceMethod::MobileApp};

std::string_view to_string(SourceMethod s);
std::optional<SourceMethod> parse_source(std::string_view text);

struct GeoPoint {
    double latitude = 0.0;
    double longitude = 0.0;
    std::optional<double> altitude;  // meters

    bool valid() const;
    bool operator==(const GeoPoint&) const = default;
};

/// Great-circle distance in meters on a spherical earth (mean radius).
double haversine_m(const GeoPoint& a, const GeoPoint& b);

/// Readings whose point is within this distance of a known location attach to it.
inline constexpr double kLocationMergeRadiusM = 100.0;

struct Parameter {
    std::string code;
    std::string display_name;
    std::string canonical_unit;
    std::optional<double> plausible_min;
    std::optional<double> plausible_max;
    std::string description;

    bool operator==(const Parameter&) const = default;
};

struct UnitRule {
    std::string from_unit;
    std::string to_unit;
    double scale = 1.0;

    bool operator==(const UnitRule&) const = default;
};

using Metadata = std::map<std::string, std::string>;

/// A validated reading. `value` is always expressed in `unit`, the
/// parameter's canonical unit; `original_unit` records what was submitted.
struct Measurement {
    std::optional<std::string> location_id;
    std::optional<GeoPoint> point;
    Instant timestamp;
    std::string parameter;
    double value = 0.0;
    std::string unit;
    std::string original_unit;
    SourceMethod source = SourceMethod::Sensor;
    Metadata metadata;

    bool operator==(const Measurement&) const = default;
};

struct Location {
    std::string id;
    std::string name;
    GeoPoint point;
    std::optional<std::string> basin;

    bool operator==(const Location&) const = default;
};

/// A reading as submitted, before validation and unit normalization.
struct RawMeasurement {
    std::optional<std::string> location_id;
    std::optional<double> latitude;
    std::optional<double> longitude;
    std::optional<double> altitude;
    std::string timestamp;
    std::string parameter;
    double value = 0.0;
    std::string unit;
    SourceMethod source = SourceMethod::Sensor;
    std::vector<std::pair<std::string, std::string>> metadata;
};

enum class RejectCode {
    BadTimestamp,
    MissingLocation,
    BadCoordinates,
    UnknownParameter,
    UnknownUnit,
    BadValue,
    OutOfPlausibleRange,
    BadMetadata,
};

std::string_view to_string(RejectCode c);

struct Rejection {
    RejectCode code;
    std::string detail;
};

using Validated = std::variant<Measurement, Rejection>;

/// Flat parameter registry plus the direct unit conversion rules.
class ParameterRegistry {
public:
    /// Throws Error(INVALID_CONFIG) on an empty/duplicate code or inverted bounds.
    void add(Parameter p);
    /// Throws Error(INVALID_CONFIG) on a non-positive scale or duplicate (from, to).
    void add_rule(UnitRule r);

    const Parameter* find(std::string_view code) const;
    const std::map<std::string, Parameter, std::less<>>& parameters() const { return params_; }
    std::span<const UnitRule> unit_rules() const { return rules_; }
    std::size_t size() const { return params_.size(); }

private:
    std::map<std::string, Parameter, std::less<>> params_;
    std::vector<UnitRule> rules_;
};

/// Converts `value` from `unit` into the parameter's canonical unit.
/// Empty result means no rule exists (UNKNOWN_UNIT).
std::optional<double> normalize_unit(double value, std::string_view unit, const Parameter& parameter,
                                     std::span<const UnitRule> rules);

/// Validates and normalizes a submitted reading. The first failing field wins,
/// checked in the order timestamp, location, parameter, unit, value, metadata.
/// `now` is the ingest instant used for the 24 h future-skew limit.
Validated validate_measurement(const RawMeasurement& raw, const ParameterRegistry& registry, Instant now);

/// Re-checks an already normalized reading; an accepted one is returned unchanged.
Validated validate_measurement(const Measurement& m, const ParameterRegistry& registry, Instant now);

/// Expresses a measurement in raw form (canonical unit, formatted timestamp).
RawMeasurement to_raw(const Measurement& m);

}  // namespace hydro
