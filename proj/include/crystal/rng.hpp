#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace crystal {

// splitmix64 (Steele/Lea/Flood). Stable across platforms, which std::
// distributions are not; every reproducible byte stream in the simulator
// derives from it.
class splitmix64 {
public:
  explicit splitmix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
  splitmix64 g(h ^ (v + 0x9e3779b97f4a7c15ull));
  return g.next();
}

// Payload bytes for one message, keyed by (seed, src, dest, index within the
// source's send list). Content-addressed payloads make corruption and
// misrouting detectable by value, not just by envelope.
inline std::vector<std::uint8_t> message_payload(std::uint64_t seed, std::uint32_t src,
                                                 std::uint32_t dest, std::uint64_t index,
                                                 std::size_t len) {
  std::uint64_t h = seed;
  h = mix64(h, src);
  h = mix64(h, dest);
  h = mix64(h, index);
  splitmix64 g(h);
  std::vector<std::uint8_t> payload(len);
  std::size_t i = 0;
  while (i < len) {
    std::uint64_t w = g.next();
    for (int b = 0; b < 8 && i < len; ++b, ++i) {
      payload[i] = static_cast<std::uint8_t>(w >> (8 * b));
    }
  }
  return payload;
}

}  // namespace crystal
