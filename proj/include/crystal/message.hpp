#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace crystal {

using rank_t = std::uint32_t;

// One addressed payload. src/dest are hypercube node numbers; the payload is
// opaque and preserved bit-exactly from injection to delivery.
struct message {
  rank_t src = 0;
  rank_t dest = 0;
  std::vector<std::uint8_t> payload;

  bool operator==(const message&) const = default;
};

// Wire frame: 16-byte little-endian header (src, dest, payload length,
// reserved zero word) followed by the payload, no padding.
inline constexpr std::size_t frame_header_bytes = 16;

inline std::size_t frame_size(const message& m) { return frame_header_bytes + m.payload.size(); }

}  // namespace crystal
