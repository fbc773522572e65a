#include "hydro/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hydro/codec.hpp"
#include "hydro/error.hpp"
#include "hydro/log_format.hpp"

namespace fs = std::filesystem;

namespace hydro {

namespace {

[[noreturn]] void io_error(const std::string& what) {
    throw Error("STORAGE_IO", what + ": " + std::strerror(errno));
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) io_error("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void sync_directory(const fs::path& dir) {
    int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
}

std::string auto_location_id(const GeoPoint& p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "loc-%.5f%c-%.5f%c", std::fabs(p.latitude), p.latitude < 0 ? 'S' : 'N',
                  std::fabs(p.longitude), p.longitude < 0 ? 'W' : 'E');
    return buf;
}

__extension__ typedef __int128 i128;

// Compensated summation keeps bucket means accurate over long series.
struct NeumaierSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double x) {
        const double t = sum + x;
        c += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + c; }
};

}  // namespace

bool BoundingBox::valid() const {
    const auto finite = std::isfinite(min_lat) && std::isfinite(max_lat) && std::isfinite(min_lon) &&
                        std::isfinite(max_lon);
    return finite && min_lat <= max_lat && min_lon <= max_lon && min_lat >= -90.0 && max_lat <= 90.0 &&
           min_lon >= -180.0 && max_lon <= 180.0;
}

bool BoundingBox::contains(const GeoPoint& p) const {
    return p.latitude >= min_lat && p.latitude <= max_lat && p.longitude >= min_lon && p.longitude <= max_lon;
}

std::vector<SeriesPoint> downsample(std::span<const Reading> readings, Instant from, Instant to,
                                    std::size_t max_points) {
    std::vector<SeriesPoint> out;
    if (readings.size() <= max_points) {
        out.reserve(readings.size());
        for (const auto& r : readings) out.push_back({r.timestamp, r.value, 1});
        return out;
    }
    const i128 span = (to - from).count();
    const auto buckets = static_cast<i128>(max_points);
    std::size_t i = 0;
    while (i < readings.size()) {
        const i128 offset = (readings[i].timestamp - from).count();
        const auto bucket = static_cast<std::int64_t>(offset * buckets / span);
        NeumaierSum sum;
        std::size_t count = 0;
        while (i < readings.size() && static_cast<std::int64_t>((readings[i].timestamp - from).count() * buckets / span) == bucket) {
            sum.add(readings[i].value);
            ++count;
            ++i;
        }
        const auto mid = static_cast<std::int64_t>((2 * static_cast<i128>(bucket) + 1) * span / (2 * buckets));
        out.push_back({from + Instant::duration(mid), sum.value() / static_cast<double>(count), count});
    }
    return out;
}

Store::Store(fs::path dir, StoreOptions options) : dir_(std::move(dir)), options_(options) {
    std::error_code ec;
    if (!fs::exists(dir_, ec)) {
        const auto parent = dir_.has_parent_path() ? dir_.parent_path() : fs::path(".");
        if (!fs::is_directory(parent, ec))
            throw Error("STORAGE_IO", "store directory " + dir_.string() + " missing and its parent does not exist");
        if (!fs::create_directory(dir_, ec) && !fs::is_directory(dir_))
            throw Error("STORAGE_IO", "cannot create store directory " + dir_.string() + ": " + ec.message());
    } else if (!fs::is_directory(dir_, ec)) {
        throw Error("STORAGE_IO", dir_.string() + " is not a directory");
    }

    const auto lock_path = dir_ / "LOCK";
    lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (lock_fd_ < 0) io_error("cannot open " + lock_path.string());
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
        const int err = errno;
        ::close(lock_fd_);
        lock_fd_ = -1;
        if (err == EWOULDBLOCK) throw Error("STORE_LOCKED", "store " + dir_.string() + " is in use by another process");
        errno = err;
        io_error("cannot lock " + lock_path.string());
    }

    try {
        recover();
        open_next_segment();
    } catch (...) {
        if (segment_fd_ >= 0) ::close(segment_fd_);
        ::close(lock_fd_);
        throw;
    }
}

Store::~Store() {
    if (segment_fd_ >= 0) ::close(segment_fd_);
    if (lock_fd_ >= 0) ::close(lock_fd_);
}

void Store::recover() {
    std::vector<std::pair<std::uint64_t, fs::path>> segments;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        if (auto idx = logfmt::parse_segment_name(entry.path().filename().string()))
            segments.emplace_back(*idx, entry.path());
    }
    std::sort(segments.begin(), segments.end());

    bool damaged = false;
    for (const auto& [idx, path] : segments) {
        segment_index_ = std::max(segment_index_, idx);
        if (damaged) {
            // Anything after a damaged segment is not part of the committed prefix.
            fs::rename(path, fs::path(path.string() + ".orphaned"));
            continue;
        }
        const auto bytes = read_file(path);
        auto scan = logfmt::scan_segment(bytes);
        std::size_t good_bytes = 0;
        std::size_t offset = 0;
        for (auto& batch : scan.batches) {
            std::vector<Measurement> ms;
            ms.reserve(batch.size());
            try {
                for (const auto& payload : batch) ms.push_back(measurement_from_json(nlohmann::json::parse(payload)));
            } catch (const std::exception&) {
                damaged = true;
                break;
            }
            for (const auto& payload : batch) offset += 8 + payload.size();
            offset += 4;
            std::vector<Location> created;
            auto resolved = resolve(ms, created);
            apply(std::move(resolved), std::move(created));
            good_bytes = offset;
        }
        if (!scan.clean || damaged) {
            damaged = damaged || scan.committed_bytes != bytes.size();
            if (::truncate(path.c_str(), static_cast<off_t>(good_bytes)) != 0) io_error("cannot truncate " + path.string());
        }
        if (good_bytes == 0) {
            fs::remove(path);
        } else {
            ++segment_count_;
        }
    }
}

void Store::open_next_segment() {
    if (segment_fd_ >= 0) {
        ::close(segment_fd_);
        segment_fd_ = -1;
    }
    ++segment_index_;
    const auto path = dir_ / logfmt::segment_name(segment_index_);
    segment_fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (segment_fd_ < 0) io_error("cannot open " + path.string());
    segment_size_ = 0;
    if (options_.fsync) sync_directory(dir_);
}

void Store::write_all(std::string_view bytes) {
    std::size_t done = 0;
    while (done < bytes.size()) {
        const auto n = ::write(segment_fd_, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            const int err = errno;
            if (::ftruncate(segment_fd_, static_cast<off_t>(segment_size_)) != 0) poisoned_ = true;
            errno = err;
            io_error("write to segment failed");
        }
        done += static_cast<std::size_t>(n);
    }
    if (options_.fsync && ::fdatasync(segment_fd_) != 0) {
        const int err = errno;
        if (::ftruncate(segment_fd_, static_cast<off_t>(segment_size_)) != 0) poisoned_ = true;
        errno = err;
        io_error("fdatasync failed");
    }
}

Store::ReadingKey Store::key_of(const Measurement& m) {
    return {m.timestamp.micros(), 2 - static_cast<int>(m.source)};
}

std::vector<Measurement> Store::resolve(std::span<const Measurement> batch, std::vector<Location>& created) const {
    auto known = [&](const std::string& id) {
        return index_.contains(id) ||
               std::any_of(created.begin(), created.end(), [&](const Location& l) { return l.id == id; });
    };

    std::vector<Measurement> out;
    out.reserve(batch.size());
    for (const auto& m : batch) {
        Measurement r = m;
        if (r.location_id) {
            if (!known(*r.location_id)) {
                if (!r.point)
                    throw Error("UNKNOWN_LOCATION", "unknown location '" + *r.location_id + "' and no coordinates");
                created.push_back(Location{*r.location_id, *r.location_id, *r.point, std::nullopt});
            }
        } else {
            if (!r.point) throw Error("MISSING_LOCATION", "measurement has neither location_id nor point");
            const Location* best = nullptr;
            double best_d = kLocationMergeRadiusM;
            auto consider = [&](const Location& l) {
                const double d = haversine_m(l.point, *r.point);
                if (d <= best_d) {
                    best_d = d;
                    best = &l;
                }
            };
            for (const auto& [id, li] : index_) consider(li.location);
            for (const auto& l : created) consider(l);
            if (best) {
                r.location_id = best->id;
            } else {
                auto id = auto_location_id(*r.point);
                for (int n = 2; known(id); ++n) id = auto_location_id(*r.point) + "-" + std::to_string(n);
                created.push_back(Location{id, id, *r.point, std::nullopt});
                r.location_id = std::move(id);
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

PutResult Store::apply(std::vector<Measurement> resolved, std::vector<Location> created) {
    PutResult result;
    std::unique_lock lock(index_mu_);
    for (auto& l : created) {
        result.new_locations.push_back(l.id);
        auto id = l.id;
        index_.emplace(std::move(id), LocationIndex{std::move(l), {}});
    }
    for (auto& m : resolved) {
        auto& li = index_.find(*m.location_id)->second;
        auto pit = li.by_parameter.find(m.parameter);
        if (pit == li.by_parameter.end()) pit = li.by_parameter.emplace(m.parameter, std::map<ReadingKey, Measurement>{}).first;
        const auto key = key_of(m);
        auto [it, inserted] = pit->second.try_emplace(key, m);
        if (inserted) {
            ++result.inserted;
            ++size_;
        } else {
            it->second = std::move(m);
            ++result.replaced;
        }
    }
    return result;
}

PutResult Store::put_batch(std::span<const Measurement> batch) {
    std::lock_guard writer(write_mu_);
    if (batch.empty()) return {};
    if (poisoned_) throw Error("STORAGE_IO", "store is read-only after an unrecoverable write failure");

    std::vector<Location> created;
    auto resolved = resolve(batch, created);

    std::string bytes;
    for (const auto& m : resolved) logfmt::append_record(bytes, to_json(m).dump());
    logfmt::append_commit(bytes);

    if (segment_size_ > 0 && segment_size_ + bytes.size() > options_.segment_bytes) open_next_segment();
    write_all(bytes);
    if (segment_size_ == 0) ++segment_count_;
    segment_size_ += bytes.size();

    return apply(std::move(resolved), std::move(created));
}

const Store::LocationIndex& Store::require(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error("UNKNOWN_LOCATION", "unknown location '" + std::string(id) + "'");
    return it->second;
}

std::vector<LocationSummary> Store::list_locations(const std::optional<BoundingBox>& bbox) const {
    std::shared_lock lock(index_mu_);
    std::vector<LocationSummary> out;
    for (const auto& [id, li] : index_) {
        if (bbox && !bbox->contains(li.location.point)) continue;
        LocationSummary s{li.location, 0, std::nullopt};
        for (const auto& [code, readings] : li.by_parameter) {
            if (readings.empty()) continue;
            ++s.parameter_count;
            const Instant t = Instant::from_micros(readings.rbegin()->first.first);
            if (!s.latest_timestamp || t > *s.latest_timestamp) s.latest_timestamp = t;
        }
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const LocationSummary& a, const LocationSummary& b) {
        return std::tie(a.location.name, a.location.id) < std::tie(b.location.name, b.location.id);
    });
    return out;
}

std::optional<Location> Store::find_location(std::string_view id) const {
    std::shared_lock lock(index_mu_);
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second.location;
}

bool Store::has_location(std::string_view id) const {
    std::shared_lock lock(index_mu_);
    return index_.contains(id);
}

LatestMap Store::latest(std::string_view location_id, const std::optional<std::string>& parameter,
                        const std::optional<SourceMethod>& source) const {
    std::shared_lock lock(index_mu_);
    const auto& li = require(location_id);
    LatestMap out;
    for (const auto& [code, readings] : li.by_parameter) {
        if (parameter && code != *parameter) continue;
        for (auto it = readings.rbegin(); it != readings.rend(); ++it) {
            if (source && it->second.source != *source) continue;
            out.emplace(code, LatestValue{it->second.value, it->second.timestamp, it->second.source});
            break;
        }
    }
    return out;
}

std::vector<Reading> Store::readings(std::string_view location_id, std::string_view parameter, Instant from,
                                     Instant to, const std::optional<SourceMethod>& source) const {
    std::shared_lock lock(index_mu_);
    const auto& li = require(location_id);
    std::vector<Reading> out;
    auto pit = li.by_parameter.find(parameter);
    if (pit == li.by_parameter.end()) return out;
    const auto& m = pit->second;
    auto it = m.lower_bound({from.micros(), INT_MIN});
    const auto end = m.lower_bound({to.micros(), INT_MIN});
    for (; it != end; ++it) {
        if (source && it->second.source != *source) continue;
        out.push_back({it->second.timestamp, it->second.value, it->second.source});
    }
    return out;
}

std::vector<SeriesPoint> Store::series(std::string_view location_id, std::string_view parameter, Instant from,
                                       Instant to, std::size_t max_points) const {
    if (!has_location(location_id)) throw Error("UNKNOWN_LOCATION", "unknown location '" + std::string(location_id) + "'");
    if (!(from < to)) throw Error("BAD_RANGE", "series window needs from < to");
    if (max_points == 0) throw Error("BAD_RANGE", "max_points must be at least 1");
    const auto raw = readings(location_id, parameter, from, to);
    return downsample(raw, from, to, max_points);
}

std::vector<Measurement> Store::measurements(std::string_view location_id, const std::optional<std::string>& parameter,
                                             std::optional<Instant> from, std::optional<Instant> to) const {
    std::shared_lock lock(index_mu_);
    const auto& li = require(location_id);
    std::vector<Measurement> out;
    for (const auto& [code, readings] : li.by_parameter) {
        if (parameter && code != *parameter) continue;
        for (const auto& [key, m] : readings) {
            if (from && m.timestamp < *from) continue;
            if (to && !(m.timestamp < *to)) continue;
            out.push_back(m);
        }
    }
    return out;
}

std::vector<Measurement> Store::dump() const {
    std::shared_lock lock(index_mu_);
    std::vector<Measurement> out;
    out.reserve(size_);
    for (const auto& [id, li] : index_) {
        for (const auto& [code, readings] : li.by_parameter) {
            for (const auto& [key, m] : readings) out.push_back(m);
        }
    }
    return out;
}

std::optional<Instant> Store::newest_timestamp(std::string_view location_id) const {
    std::shared_lock lock(index_mu_);
    const auto& li = require(location_id);
    std::optional<Instant> newest;
    for (const auto& [code, readings] : li.by_parameter) {
        if (readings.empty()) continue;
        const Instant t = Instant::from_micros(readings.rbegin()->first.first);
        if (!newest || t > *newest) newest = t;
    }
    return newest;
}

std::size_t Store::size() const {
    std::shared_lock lock(index_mu_);
    return size_;
}

std::size_t Store::segment_count() const {
    std::lock_guard writer(write_mu_);
    return segment_count_;
}

}  // namespace hydro
