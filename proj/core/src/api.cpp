#include "hydro/api.hpp"

#include <charconv>
#include <cmath>

#include "hydro/codec.hpp"
#include "hydro/error.hpp"

namespace hydro {

using nlohmann::json;

namespace {

constexpr std::string_view kLocationsPrefix = "/v1/locations/";

ApiResponse ok(const json& body) {
    ApiResponse r;
    r.body = render(body);
    return r;
}

std::optional<std::string> param(const ApiRequest& req, const std::string& key) {
    auto it = req.query.find(key);
    if (it == req.query.end() || it->second.empty()) return std::nullopt;
    return it->second;
}

std::string required(const ApiRequest& req, const std::string& key) {
    auto v = param(req, key);
    if (!v) throw Error("BAD_REQUEST", "query parameter '" + key + "' is required");
    return *v;
}

std::optional<Instant> instant_param(const ApiRequest& req, const std::string& key) {
    auto v = param(req, key);
    if (!v) return std::nullopt;
    auto t = parse_rfc3339(*v);
    if (!t) throw Error("BAD_TIMESTAMP", "query parameter '" + key + "' is not an RFC 3339 instant");
    return t;
}

double number_param(const std::string& key, const std::string& text) {
    double v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size() || !std::isfinite(v))
        throw Error("BAD_REQUEST", "query parameter '" + key + "' must be a number");
    return v;
}

SourceMethod source_param(const ApiRequest& req, const std::string& key, SourceMethod fallback) {
    auto v = param(req, key);
    if (!v) return fallback;
    auto s = parse_source(*v);
    if (!s) throw Error("BAD_SOURCE", "query parameter '" + key + "' must be LAB, SENSOR or MOBILE_APP");
    return *s;
}

BoundingBox parse_bbox(const std::string& text) {
    std::vector<double> v;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        const auto part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        double x = 0;
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), x);
        if (part.empty() || ec != std::errc() || p != part.data() + part.size())
            throw Error("BAD_BBOX", "bbox must be minLat,minLon,maxLat,maxLon");
        v.push_back(x);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (v.size() != 4) throw Error("BAD_BBOX", "bbox must be minLat,minLon,maxLat,maxLon");
    BoundingBox b{v[0], v[2], v[1], v[3]};
    if (!b.valid()) throw Error("BAD_BBOX", "bbox is inverted or outside valid coordinates");
    return b;
}

// Default query window: the full extent of the parameter's readings.
std::pair<Instant, Instant> window(const Store& store, std::string_view id, std::string_view parameter,
                                   std::optional<Instant> from, std::optional<Instant> to) {
    if (from && to) return {*from, *to};
    const auto all = store.readings(id, parameter, Instant::from_micros(INT64_MIN / 2), Instant::from_micros(INT64_MAX / 2));
    const Instant lo = all.empty() ? Instant{} : all.front().timestamp;
    const Instant hi = all.empty() ? Instant::from_seconds(1) : all.back().timestamp + Instant::duration(1);
    return {from.value_or(lo), to.value_or(hi)};
}

std::map<std::string, std::string> cors_headers() {
    return {{"Access-Control-Allow-Origin", "*"},
            {"Access-Control-Allow-Methods", "GET, OPTIONS"},
            {"Access-Control-Allow-Headers", "Content-Type"}};
}

}  // namespace

int status_for(std::string_view code) {
    if (code == "UNKNOWN_LOCATION" || code == "NOT_FOUND") return 404;
    if (code == "UNAUTHORIZED") return 401;
    if (code == "CONFLICT" || code == "STORE_LOCKED") return 409;
    if (code == "STORAGE_IO" || code == "INTERNAL") return 500;
    return 400;
}

ApiResponse error_response(int status, std::string_view code, std::string_view message, json detail) {
    json body{{"status", status}, {"code", code}, {"message", message}};
    if (!detail.is_null()) body["detail"] = std::move(detail);
    ApiResponse r;
    r.status = status;
    r.body = render(body);
    return r;
}

json assessment_document(const Store& store, const Standards& standards, std::string_view location_id,
                         const std::optional<std::string>& purpose) {
    const auto latest = store.latest(location_id);
    const PurposeProfile* profile = nullptr;
    if (purpose) {
        profile = &standards.purpose(*purpose);
    } else {
        profile = standards.default_purpose();
        if (!profile) throw Error("UNKNOWN_PURPOSE", "no purposes are configured");
    }
    Instant as_of{};
    for (const auto& [code, v] : latest) as_of = std::max(as_of, v.timestamp);
    return to_json(assess(std::string(location_id), latest, *profile, standards.registry, as_of));
}

json standards_document(const Standards& standards, const std::optional<std::string>& purpose) {
    if (purpose) standards.purpose(*purpose);  // UNKNOWN_PURPOSE
    json out = json::array();
    for (const auto& p : standards.purposes) {
        if (purpose && p.id != *purpose) continue;
        for (const auto& code : p.relevant_parameters) {
            if (const auto* r = p.range_for(code)) out.push_back(to_json(*r));
        }
    }
    return out;
}

ApiService::ApiService(Store& store, const StandardsHandle& standards, ApiConfig config,
                       std::function<Instant()> clock)
    : store_(store), standards_(standards), config_(std::move(config)), clock_(std::move(clock)) {}

ApiResponse ApiService::handle(const ApiRequest& request) const {
    ApiResponse resp;
    try {
        resp = route(request);
    } catch (const Error& e) {
        resp = error_response(status_for(e.code()), e.code(), e.what());
    } catch (const std::exception&) {
        resp = error_response(500, "INTERNAL", "internal error");
    }
    if (request.method == "GET" || request.method == "OPTIONS") {
        for (auto& h : cors_headers()) resp.headers.push_back(h);
    }
    return resp;
}

ApiResponse ApiService::route(const ApiRequest& req) const {
    const auto& path = req.path;
    if (req.method == "OPTIONS") {
        ApiResponse r;
        r.status = 204;
        r.content_type.clear();
        return r;
    }
    if (req.method == "POST") {
        if (path == "/v1/measurements") return upload(req, false);
        if (path == "/v1/upload") return upload(req, true);
        throw Error("NOT_FOUND", "no such endpoint");
    }
    if (req.method != "GET") throw Error("NOT_FOUND", "no such endpoint");

    const auto standards = standards_.get();
    if (path == "/healthz") {
        return ok(json{{"status", "ok"},
                       {"store_segments", store_.segment_count()},
                       {"config_version", standards->version}});
    }
    if (path == "/v1/locations") {
        std::optional<BoundingBox> bbox;
        if (auto b = param(req, "bbox")) bbox = parse_bbox(*b);
        return ok(locations_json(store_.list_locations(bbox)));
    }
    if (path == "/v1/purposes") return ok(purposes_json(*standards));
    if (path == "/v1/parameters") return ok(parameters_json(*standards));
    if (path == "/v1/standards") return ok(standards_document(*standards, param(req, "purpose")));

    if (path.starts_with(kLocationsPrefix)) {
        const std::string_view rest = std::string_view(path).substr(kLocationsPrefix.size());
        const auto slash = rest.find('/');
        if (slash != std::string_view::npos && slash > 0 && rest.find('/', slash + 1) == std::string_view::npos)
            return location_route(req, rest.substr(0, slash), rest.substr(slash + 1));
    }
    throw Error("NOT_FOUND", "no such endpoint");
}

ApiResponse ApiService::location_route(const ApiRequest& req, std::string_view id, std::string_view leaf) const {
    if (leaf == "assessment") {
        const auto standards = standards_.get();
        return ok(assessment_document(store_, *standards, id, param(req, "purpose")));
    }
    if (leaf == "latest") {
        std::optional<SourceMethod> source;
        if (param(req, "source")) source = source_param(req, "source", SourceMethod::Lab);
        return ok(to_json(store_.latest(id, param(req, "parameter"), source)));
    }
    if (leaf == "series") {
        if (!store_.has_location(id)) throw Error("UNKNOWN_LOCATION", "unknown location '" + std::string(id) + "'");
        const auto parameter = required(req, "parameter");
        const auto [from, to] = window(store_, id, parameter, instant_param(req, "from"), instant_param(req, "to"));
        std::size_t max_points = config_.default_max_points;
        if (auto mp = param(req, "max_points")) {
            const double v = number_param("max_points", *mp);
            if (v < 1 || v != std::floor(v)) throw Error("BAD_RANGE", "max_points must be a positive integer");
            max_points = static_cast<std::size_t>(v);
        }
        return ok(series_json(store_.series(id, parameter, from, to, max_points)));
    }
    if (leaf == "correlation") {
        if (!store_.has_location(id)) throw Error("UNKNOWN_LOCATION", "unknown location '" + std::string(id) + "'");
        const auto parameter = required(req, "parameter");
        const auto a = source_param(req, "source_a", SourceMethod::Lab);
        const auto b = source_param(req, "source_b", SourceMethod::Sensor);
        if (a == b) throw Error("SAME_SOURCE", "source_a and source_b must differ");
        const auto [from, to] = window(store_, id, parameter, instant_param(req, "from"), instant_param(req, "to"));
        double tolerance = kDefaultCorrelationToleranceS;
        if (auto t = param(req, "tolerance_s")) tolerance = number_param("tolerance_s", *t);
        return ok(to_json(correlate(store_, id, parameter, a, b, from, to, tolerance)));
    }
    throw Error("NOT_FOUND", "no such endpoint");
}

bool ApiService::authorized(const ApiRequest& req) const {
    if (config_.upload_token.empty()) return false;
    auto it = req.headers.find("authorization");
    if (it == req.headers.end()) return false;
    constexpr std::string_view scheme = "Bearer ";
    const std::string_view value = it->second;
    if (!value.starts_with(scheme)) return false;
    const auto token = value.substr(scheme.size());
    const std::string_view expected = config_.upload_token;
    unsigned char diff = token.size() == expected.size() ? 0 : 1;
    for (std::size_t i = 0; i < token.size(); ++i) {
        diff |= static_cast<unsigned char>(token[i] ^ expected[i % expected.size()]);
    }
    return diff == 0;
}

ApiResponse ApiService::upload(const ApiRequest& req, bool csv) const {
    if (!authorized(req)) throw Error("UNAUTHORIZED", "a valid bearer token is required for uploads");
    const auto standards = standards_.get();
    const auto batch = csv ? parse_csv(req.body) : parse_json_batch(req.body);
    const auto report = ingest_batch(batch, standards->registry, store_, clock_());
    if (report.storage_error)
        return error_response(500, "STORAGE_IO", "upload could not be persisted", to_json(report));
    return ok(to_json(report));
}

}  // namespace hydro
