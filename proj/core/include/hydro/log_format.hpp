#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Segment file layout:
//
//   record := u32be length | payload[length] | u32be crc32(payload)
//   commit := u32be 0
//   segment := (record* commit)*
//
// A payload is one measurement in its JSON wire form. Everything after the
// last commit marker that does not form complete, CRC-valid records followed
// by a commit is an uncommitted tail and is discarded on recovery.
namespace hydro::logfmt {

inline constexpr std::uint32_t kMaxRecordBytes = 16u << 20;

std::uint32_t crc32(std::string_view payload);

void append_record(std::string& out, std::string_view payload);
void append_commit(std::string& out);

struct SegmentScan {
    std::vector<std::vector<std::string>> batches;  // committed batches, in order
    std::size_t committed_bytes = 0;                // offset just past the last commit marker
    bool clean = true;                              // false when a tail was dropped
    std::string problem;                            // why the tail was dropped
};

SegmentScan scan_segment(std::string_view bytes);

/// `segment-<8-digit index>.log`
std::string segment_name(std::uint64_t index);
std::optional<std::uint64_t> parse_segment_name(std::string_view name);

}  // namespace hydro::logfmt
