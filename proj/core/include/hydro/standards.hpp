#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hydro/model.hpp"
#include "hydro/time.hpp"

namespace hydro {

/// One authority's safe interval for a (parameter, purpose) pair. An absent
/// bound leaves that side unconstrained.
struct RangeSpec {
    std::string parameter;
    std::string purpose;
    std::string authority;
    std::optional<double> min;
    std::optional<double> max;

    bool operator==(const RangeSpec&) const = default;
};

/// Intersection of every authority's interval for a (parameter, purpose) pair.
struct ReconciledRange {
    std::string parameter;
    std::string purpose;
    std::optional<double> min;
    std::optional<double> max;
    std::vector<std::string> contributing_authorities;  // sorted, unique

    bool operator==(const ReconciledRange&) const = default;
};

struct PurposeProfile {
    std::string id;
    std::string display_name;
    std::vector<std::string> relevant_parameters;
    std::map<std::string, ReconciledRange> ranges;

    bool is_relevant(std::string_view code) const;
    const ReconciledRange* range_for(std::string_view code) const;
};

enum class SafetyStatus { Safe, UnsafeLow, UnsafeHigh, NoData, NotApplicable };

std::string_view to_string(SafetyStatus s);

struct LatestValue {
    double value = 0.0;
    Instant timestamp;
    SourceMethod source = SourceMethod::Sensor;

    bool operator==(const LatestValue&) const = default;
};

using LatestMap = std::map<std::string, LatestValue>;

struct AssessmentEntry {
    std::string parameter;
    std::optional<double> latest_value;
    std::optional<Instant> reading_timestamp;
    std::optional<SourceMethod> source;
    bool relevant = false;
    SafetyStatus status = SafetyStatus::NotApplicable;
    std::optional<ReconciledRange> range;

    bool operator==(const AssessmentEntry&) const = default;
};

struct Assessment {
    std::string location_id;
    std::string purpose;
    Instant as_of;
    std::vector<AssessmentEntry> entries;
};

/// Intersects the specs: max of the minimums, min of the maximums.
/// Throws Error(CONFLICT) when the intersection is empty, naming the
/// parameter, purpose and authorities; Error(INVALID_RANGE) on malformed input
/// (empty list, mixed parameter/purpose, boundless or inverted spec).
ReconciledRange reconcile(std::span<const RangeSpec> specs);

/// Inclusive bounds; a missing bound never fails.
SafetyStatus evaluate(double value, const ReconciledRange& range);

/// One entry per registered parameter: relevant parameters first in purpose
/// order, then the rest alphabetically by code.
Assessment assess(std::string location_id, const LatestMap& latest, const PurposeProfile& purpose,
                  const ParameterRegistry& registry, Instant as_of);

/// The loaded standards configuration: registry, unit rules and reconciled
/// purpose profiles. Immutable once built.
struct Standards {
    std::string version;
    ParameterRegistry registry;
    std::vector<PurposeProfile> purposes;  // configuration order; the first is the default
    std::vector<std::string> warnings;

    const PurposeProfile* find_purpose(std::string_view id) const;
    /// Throws Error(UNKNOWN_PURPOSE).
    const PurposeProfile& purpose(std::string_view id) const;
    const PurposeProfile* default_purpose() const;
    std::size_t ranged_parameter_count() const;
};

/// Parses and reconciles a standards document (JSON, see docs/standards-format.md).
/// All-or-nothing: throws Error with PARSE_ERROR, CONFLICT,
/// UNKNOWN_PARAMETER_IN_RANGE, DUPLICATE_PURPOSE or INVALID_CONFIG.
Standards load_standards(std::string_view document);
Standards load_standards_file(const std::filesystem::path& path);

/// Deterministic JSON rendering of every profile (used for reload checks).
std::string serialize_profiles(const Standards& standards);

/// Shared, swappable reference to the active configuration. Readers keep the
/// snapshot they obtained; reload replaces the whole set at once.
class StandardsHandle {
public:
    explicit StandardsHandle(std::shared_ptr<const Standards> initial) : current_(std::move(initial)) {}

    std::shared_ptr<const Standards> get() const {
        std::lock_guard lock(mu_);
        return current_;
    }
    void reload(std::shared_ptr<const Standards> next) {
        std::lock_guard lock(mu_);
        current_ = std::move(next);
    }

private:
    mutable std::mutex mu_;
    std::shared_ptr<const Standards> current_;
};

}  // namespace hydro
