#include "hydro/log_format.hpp"

#include <charconv>
#include <cstdio>

#include <zlib.h>

namespace hydro::logfmt {

namespace {

void put_u32be(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

std::uint32_t get_u32be(std::string_view s, std::size_t pos) {
    auto b = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + i])); };
    return (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
}

}  // namespace

std::uint32_t crc32(std::string_view payload) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size())));
}

void append_record(std::string& out, std::string_view payload) {
    put_u32be(out, static_cast<std::uint32_t>(payload.size()));
    out.append(payload);
    put_u32be(out, crc32(payload));
}

void append_commit(std::string& out) { put_u32be(out, 0); }

SegmentScan scan_segment(std::string_view bytes) {
    SegmentScan scan;
    std::vector<std::string> pending;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        if (bytes.size() - pos < 4) {
            scan.problem = "truncated length prefix";
            break;
        }
        const std::uint32_t len = get_u32be(bytes, pos);
        if (len == 0) {
            pos += 4;
            scan.batches.push_back(std::move(pending));
            pending.clear();
            scan.committed_bytes = pos;
            continue;
        }
        if (len > kMaxRecordBytes) {
            scan.problem = "record length " + std::to_string(len) + " exceeds limit";
            break;
        }
        if (bytes.size() - pos < 8 + static_cast<std::size_t>(len)) {
            scan.problem = "truncated record";
            break;
        }
        const auto payload = bytes.substr(pos + 4, len);
        if (crc32(payload) != get_u32be(bytes, pos + 4 + len)) {
            scan.problem = "crc mismatch";
            break;
        }
        pending.emplace_back(payload);
        pos += 8 + len;
    }
    if (scan.problem.empty() && !pending.empty()) scan.problem = "batch without commit marker";
    scan.clean = scan.committed_bytes == bytes.size();
    return scan;
}

std::string segment_name(std::uint64_t index) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "segment-%08llu.log", static_cast<unsigned long long>(index));
    return buf;
}

std::optional<std::uint64_t> parse_segment_name(std::string_view name) {
    constexpr std::string_view prefix = "segment-", suffix = ".log";
    if (name.size() <= prefix.size() + suffix.size() || !name.starts_with(prefix) || !name.ends_with(suffix))
        return std::nullopt;
    const auto digits = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    if (digits.size() < 8) return std::nullopt;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || p != digits.data() + digits.size()) return std::nullopt;
    return v;
}

}  // namespace hydro::logfmt
