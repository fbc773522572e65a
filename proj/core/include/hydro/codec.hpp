#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hydro/ingest.hpp"
#include "hydro/model.hpp"
#include "hydro/standards.hpp"
#include "hydro/store.hpp"

// JSON wire forms. Field names are lower_snake_case, instants are RFC 3339
// UTC strings, and absent optionals serialize as null (or are omitted for
// measurement coordinates). The same encoders back the HTTP API, the CLI
// `--format=json` output and the store's log records.
namespace hydro {

nlohmann::json to_json(const Measurement& m);
/// Decodes the stored/wire form. Throws Error(BAD_RECORD).
Measurement measurement_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Location& l);
nlohmann::json to_json(const LocationSummary& s);
nlohmann::json to_json(const Parameter& p);
nlohmann::json to_json(const ReconciledRange& r);
nlohmann::json to_json(const PurposeProfile& p);
nlohmann::json to_json(const Assessment& a);
nlohmann::json to_json(const SeriesPoint& p);
nlohmann::json to_json(const LatestMap& latest);
nlohmann::json to_json(const IngestReport& r);
nlohmann::json to_json(const CorrelationReport& r);

nlohmann::json locations_json(const std::vector<LocationSummary>& locations);
nlohmann::json series_json(const std::vector<SeriesPoint>& points);
nlohmann::json purposes_json(const Standards& standards);
nlohmann::json parameters_json(const Standards& standards);

/// Canonical text rendering of a response document (two-space indent,
/// trailing newline). The CLI prints exactly these bytes.
std::string render(const nlohmann::json& j);

}  // namespace hydro
