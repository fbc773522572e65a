#include <algorithm>
#include <cmath>
#include <numeric>

#include "hydro/error.hpp"
#include "hydro/ingest.hpp"

namespace hydro {

std::vector<std::pair<std::size_t, std::size_t>> pair_nearest(std::span<const Reading> a, std::span<const Reading> b,
                                                              Instant::duration tolerance) {
    std::vector<std::size_t> order_a(a.size()), order_b(b.size());
    std::iota(order_a.begin(), order_a.end(), 0);
    std::iota(order_b.begin(), order_b.end(), 0);
    std::stable_sort(order_a.begin(), order_a.end(),
                     [&](std::size_t i, std::size_t j) { return a[i].timestamp < a[j].timestamp; });
    std::stable_sort(order_b.begin(), order_b.end(),
                     [&](std::size_t i, std::size_t j) { return b[i].timestamp < b[j].timestamp; });

    std::vector<bool> used(b.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (auto ia : order_a) {
        const Instant t = a[ia].timestamp;
        // First b at or after t - tolerance.
        auto first = std::partition_point(order_b.begin(), order_b.end(),
                                          [&](std::size_t ib) { return b[ib].timestamp < t - tolerance; });
        std::optional<std::size_t> best;
        Instant::duration best_gap{};
        for (auto it = first; it != order_b.end() && b[*it].timestamp <= t + tolerance; ++it) {
            if (used[*it]) continue;
            const auto gap = b[*it].timestamp > t ? b[*it].timestamp - t : t - b[*it].timestamp;
            if (!best || gap < best_gap) {
                best = *it;
                best_gap = gap;
            }
        }
        if (best) {
            used[*best] = true;
            pairs.emplace_back(ia, *best);
        }
    }
    return pairs;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return std::nullopt;
    const double mx = std::accumulate(x.begin(), x.begin() + n, 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.begin() + n, 0.0) / static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationReport correlate(const Store& store, std::string_view location_id, std::string_view parameter,
                            SourceMethod source_a, SourceMethod source_b, Instant from, Instant to, double tolerance_s) {
    if (source_a == source_b) throw Error("SAME_SOURCE", "correlation needs two different sources");
    if (!store.has_location(location_id))
        throw Error("UNKNOWN_LOCATION", "unknown location '" + std::string(location_id) + "'");
    if (!(from < to)) throw Error("BAD_RANGE", "correlation window needs from < to");
    if (!(tolerance_s >= 0.0) || !std::isfinite(tolerance_s))
        throw Error("BAD_RANGE", "tolerance must be a non-negative number of seconds");

    CorrelationReport report;
    report.location_id = std::string(location_id);
    report.parameter = std::string(parameter);
    report.source_a = source_a;
    report.source_b = source_b;
    report.tolerance_s = tolerance_s;
    report.from = from;
    report.to = to;

    const auto a = store.readings(location_id, parameter, from, to, source_a);
    const auto b = store.readings(location_id, parameter, from, to, source_b);
    const auto tol = Instant::duration(static_cast<std::int64_t>(std::llround(tolerance_s * 1e6)));
    const auto pairs = pair_nearest(a, b, tol);

    std::vector<double> xs, ys;
    xs.reserve(pairs.size());
    ys.reserve(pairs.size());
    for (auto [ia, ib] : pairs) {
        xs.push_back(a[ia].value);
        ys.push_back(b[ib].value);
    }
    report.n_pairs = pairs.size();
    if (pairs.size() < 2) {
        report.reason = "INSUFFICIENT_PAIRS";
    } else if (auto r = pearson(xs, ys)) {
        report.r = *r;
    } else {
        report.reason = "ZERO_VARIANCE";
    }
    return report;
}

}  // namespace hydro
