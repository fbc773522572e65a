#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hydro/model.hpp"
#include "hydro/standards.hpp"
#include "hydro/store.hpp"

namespace hydro {

/// A row that could not be accepted. `row` is the 1-based index of the data
/// record (the CSV header is not counted).
struct RowError {
    std::size_t row = 0;
    std::string code;
    std::string detail;

    bool operator==(const RowError&) const = default;
};

struct RawRow {
    std::size_t row = 0;
    RawMeasurement raw;
};

/// Result of parsing an upload: rows that parsed plus rows that did not.
struct ParsedBatch {
    std::vector<RawRow> rows;
    std::vector<RowError> errors;

    std::size_t total() const { return rows.size() + errors.size(); }
};

inline constexpr std::string_view kCsvRequiredColumns[] = {"timestamp", "parameter", "value", "unit", "source"};

/// Header-driven CSV parse. Bad rows are reported per row (BAD_ROW,
/// BAD_VALUE, BAD_COORDINATES, BAD_SOURCE); only a missing or unusable header
/// throws Error(FATAL_NO_HEADER).
ParsedBatch parse_csv(std::string_view document);

/// Renders measurements in the ingest CSV contract (canonical units).
/// Columns: timestamp,parameter,value,unit,source,location_id,latitude,
/// longitude,altitude, then one `meta.<key>` column per metadata key in use.
std::string serialize_csv(std::span<const Measurement> measurements);

/// Parses a structured batch: a JSON array of measurement objects, or an
/// object with a `measurements` array. Throws Error(BAD_REQUEST) when the body
/// is not such a document.
ParsedBatch parse_json_batch(std::string_view body);

struct IngestReport {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::vector<RowError> rejections;
    std::size_t inserted = 0;
    std::size_t replaced = 0;
    std::vector<std::string> new_locations;
    std::optional<std::string> storage_error;  // set when the batch was not persisted
};

/// Validates every row, resolves locations and writes the accepted rows as one
/// atomic batch. Rows in `pre_rejected` (parse failures) are folded into the
/// report. A storage failure rejects every row with STORAGE_IO.
IngestReport ingest_batch(const ParsedBatch& batch, const ParameterRegistry& registry, Store& store, Instant now);

inline constexpr double kDefaultCorrelationToleranceS = 3600.0;

struct CorrelationReport {
    std::string location_id;
    std::string parameter;
    SourceMethod source_a = SourceMethod::Lab;
    SourceMethod source_b = SourceMethod::Sensor;
    double tolerance_s = kDefaultCorrelationToleranceS;
    Instant from;
    Instant to;
    std::size_t n_pairs = 0;
    std::optional<double> r;
    std::optional<std::string> reason;  // INSUFFICIENT_PAIRS or ZERO_VARIANCE when r is absent
};

/// Greedy nearest-in-time matching: each reading of `a`, in time order, takes
/// the closest still-unmatched reading of `b` within `tolerance` (earlier wins
/// a distance tie). Returns index pairs into `a` and `b`.
std::vector<std::pair<std::size_t, std::size_t>> pair_nearest(std::span<const Reading> a, std::span<const Reading> b,
                                                              Instant::duration tolerance);

/// Pearson product-moment coefficient; empty when fewer than two samples or
/// either side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Throws Error(SAME_SOURCE), Error(UNKNOWN_LOCATION) or Error(BAD_RANGE).
CorrelationReport correlate(const Store& store, std::string_view location_id, std::string_view parameter,
                            SourceMethod source_a, SourceMethod source_b, Instant from, Instant to, double tolerance_s);

}  // namespace hydro
