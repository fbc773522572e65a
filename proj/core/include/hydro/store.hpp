#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hydro/model.hpp"
#include "hydro/standards.hpp"
#include "hydro/time.hpp"

namespace hydro {

/// Closed latitude/longitude box; longitude wrap-around is not supported.
struct BoundingBox {
    double min_lat = -90.0;
    double max_lat = 90.0;
    double min_lon = -180.0;
    double max_lon = 180.0;

    bool valid() const;
    bool contains(const GeoPoint& p) const;
};

struct SeriesPoint {
    Instant t;
    double value = 0.0;
    std::size_t count = 1;

    bool operator==(const SeriesPoint&) const = default;
};

struct LocationSummary {
    Location location;
    std::size_t parameter_count = 0;
    std::optional<Instant> latest_timestamp;
};

struct Reading {
    Instant timestamp;
    double value = 0.0;
    SourceMethod source = SourceMethod::Sensor;
};

struct PutResult {
    std::size_t inserted = 0;
    std::size_t replaced = 0;
    std::vector<std::string> new_locations;
};

struct StoreOptions {
    std::uint64_t segment_bytes = 64ull << 20;
    bool fsync = true;
};

/// Splits [from, to) into `max_points` equal buckets and emits (midpoint,
/// mean, count) for each non-empty one. `readings` must be sorted by time and
/// lie inside the window. Fewer readings than `max_points` pass through raw.
std::vector<SeriesPoint> downsample(std::span<const Reading> readings, Instant from, Instant to,
                                    std::size_t max_points);

/// Embedded measurement store: an append-only segment log plus in-memory
/// indexes (location -> parameter -> time-ordered readings) rebuilt on open.
///
/// One writer at a time; readers run concurrently and only ever see state at
/// batch boundaries. The directory is guarded by an exclusive lock file for the
/// lifetime of the object.
class Store {
public:
    /// Opens (creating the directory when its parent exists) and replays the log.
    /// Throws Error(STORAGE_IO) or Error(STORE_LOCKED).
    explicit Store(std::filesystem::path dir, StoreOptions options = {});
    ~Store();

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    /// Upserts by (location, parameter, timestamp, source), last write wins.
    /// Readings without a location_id attach to the nearest location within
    /// 100 m or create one; an unknown location_id with a point creates that
    /// location. The batch is durable before return, or nothing is applied
    /// (Error STORAGE_IO). Error(UNKNOWN_LOCATION) when an unknown id has no point.
    PutResult put_batch(std::span<const Measurement> batch);

    std::vector<LocationSummary> list_locations(const std::optional<BoundingBox>& bbox = std::nullopt) const;
    std::optional<Location> find_location(std::string_view id) const;
    bool has_location(std::string_view id) const;

    /// Newest reading per parameter; a timestamp tie goes to LAB, then SENSOR.
    LatestMap latest(std::string_view location_id, const std::optional<std::string>& parameter = std::nullopt,
                     const std::optional<SourceMethod>& source = std::nullopt) const;

    /// Throws Error(BAD_RANGE) when from >= to or max_points == 0.
    std::vector<SeriesPoint> series(std::string_view location_id, std::string_view parameter, Instant from, Instant to,
                                    std::size_t max_points) const;

    /// Raw readings in [from, to), time ordered, optionally for one source.
    std::vector<Reading> readings(std::string_view location_id, std::string_view parameter, Instant from, Instant to,
                                  const std::optional<SourceMethod>& source = std::nullopt) const;

    /// Stored measurements of one location in key order, optionally filtered.
    std::vector<Measurement> measurements(std::string_view location_id,
                                          const std::optional<std::string>& parameter = std::nullopt,
                                          std::optional<Instant> from = std::nullopt,
                                          std::optional<Instant> to = std::nullopt) const;

    /// Every stored measurement, ordered by location, parameter, time, source.
    std::vector<Measurement> dump() const;

    std::optional<Instant> newest_timestamp(std::string_view location_id) const;
    std::size_t size() const;
    std::size_t segment_count() const;
    const std::filesystem::path& directory() const { return dir_; }

private:
    // Ordered by time, then LAB > SENSOR > MOBILE_APP, so the last entry at a
    // timestamp is the preferred one.
    using ReadingKey = std::pair<std::int64_t, int>;

    struct LocationIndex {
        Location location;
        std::map<std::string, std::map<ReadingKey, Measurement>, std::less<>> by_parameter;
    };

    static ReadingKey key_of(const Measurement& m);

    const LocationIndex& require(std::string_view id) const;
    std::vector<Measurement> resolve(std::span<const Measurement> batch, std::vector<Location>& created) const;
    PutResult apply(std::vector<Measurement> resolved, std::vector<Location> created);
    void recover();
    void open_next_segment();
    void write_all(std::string_view bytes);

    std::filesystem::path dir_;
    StoreOptions options_;
    int lock_fd_ = -1;
    int segment_fd_ = -1;
    std::uint64_t segment_index_ = 0;
    std::uint64_t segment_size_ = 0;
    std::size_t segment_count_ = 0;

    mutable std::mutex write_mu_;
    bool poisoned_ = false;  // a failed write could not be rolled back
    mutable std::shared_mutex index_mu_;
    std::map<std::string, LocationIndex, std::less<>> index_;
    std::size_t size_ = 0;
};

}  // namespace hydro
