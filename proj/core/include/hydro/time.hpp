#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace hydro {

/// UTC instant with microsecond resolution. Ordering key for every reading.
class Instant {
public:
    using duration = std::chrono::microseconds;

    constexpr Instant() = default;
    constexpr explicit Instant(std::chrono::sys_time<duration> tp) : tp_(tp) {}

    static constexpr Instant from_micros(std::int64_t us) {
        return Instant(std::chrono::sys_time<duration>(duration(us)));
    }
    static constexpr Instant from_seconds(std::int64_t s) { return from_micros(s * 1'000'000); }
    static Instant now();

    constexpr std::int64_t micros() const { return tp_.time_since_epoch().count(); }
    constexpr std::chrono::sys_time<duration> time_point() const { return tp_; }

    constexpr Instant operator+(duration d) const { return Instant(tp_ + d); }
    constexpr Instant operator-(duration d) const { return Instant(tp_ - d); }
    constexpr duration operator-(Instant other) const { return tp_ - other.tp_; }

    constexpr auto operator<=>(const Instant&) const = default;

private:
    std::chrono::sys_time<duration> tp_{};
};

/// Parses `YYYY-MM-DDTHH:MM:SS[.fraction](Z|±HH:MM)`; offsets are folded into UTC.
/// Fractions finer than a microsecond are truncated. Lower-case `t`/`z` and a
/// space separator are accepted.
std::optional<Instant> parse_rfc3339(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SSZ`, with a trimmed fractional part only when non-zero.
std::string format_rfc3339(Instant t);

}  // namespace hydro
