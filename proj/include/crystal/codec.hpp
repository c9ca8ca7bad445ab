#pragma once

#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crystal/error.hpp"
#include "crystal/message.hpp"

namespace crystal {

// Encoded form of one pairwise exchange: framed messages back to back.
struct transfer_buffer {
  std::vector<std::uint8_t> data;
  std::size_t message_count = 0;

  std::size_t size_bytes() const { return data.size(); }
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> data, std::size_t at) {
  return static_cast<std::uint32_t>(data[at]) | (static_cast<std::uint32_t>(data[at + 1]) << 8) |
         (static_cast<std::uint32_t>(data[at + 2]) << 16) |
         (static_cast<std::uint32_t>(data[at + 3]) << 24);
}

}  // namespace detail

// Frames `msgs` into one buffer. Exceeding `bytes_cap` is an error, never a
// silent truncation.
inline transfer_buffer encode_transfer(std::span<const message> msgs,
                                       std::optional<std::size_t> bytes_cap = {}) {
  std::size_t required = 0;
  for (const message& m : msgs) {
    if (m.payload.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw validation_error("payload of " + std::to_string(m.payload.size()) +
                             " bytes does not fit the 32-bit length field");
    }
    required += frame_size(m);
  }
  if (bytes_cap && required > *bytes_cap) {
    throw capacity_error(required, *bytes_cap);
  }

  transfer_buffer out;
  out.data.reserve(required);
  out.message_count = msgs.size();
  for (const message& m : msgs) {
    detail::put_u32(out.data, m.src);
    detail::put_u32(out.data, m.dest);
    detail::put_u32(out.data, static_cast<std::uint32_t>(m.payload.size()));
    detail::put_u32(out.data, 0);
    out.data.insert(out.data.end(), m.payload.begin(), m.payload.end());
  }
  return out;
}

// Exact inverse of encode_transfer. Malformed framing reports the offset of
// the offending frame.
inline std::vector<message> decode_transfer(std::span<const std::uint8_t> data) {
  std::vector<message> msgs;
  std::size_t at = 0;
  while (at < data.size()) {
    const std::size_t remaining = data.size() - at;
    if (remaining < frame_header_bytes) {
      throw decode_error(at, "truncated frame header (" + std::to_string(remaining) +
                                 " of " + std::to_string(frame_header_bytes) + " bytes)");
    }
    message m;
    m.src = detail::get_u32(data, at);
    m.dest = detail::get_u32(data, at + 4);
    const std::uint32_t len = detail::get_u32(data, at + 8);
    const std::uint32_t reserved = detail::get_u32(data, at + 12);
    if (reserved != 0) {
      char hex[16];
      std::snprintf(hex, sizeof hex, "%08x", reserved);
      throw decode_error(at, std::string("nonzero reserved field 0x") + hex);
    }
    if (len > remaining - frame_header_bytes) {
      throw decode_error(at, "payload length " + std::to_string(len) + " overruns buffer (" +
                                 std::to_string(remaining - frame_header_bytes) +
                                 " bytes remain)");
    }
    const auto* begin = data.data() + at + frame_header_bytes;
    m.payload.assign(begin, begin + len);
    msgs.push_back(std::move(m));
    at += frame_header_bytes + len;
  }
  return msgs;
}

}  // namespace crystal
