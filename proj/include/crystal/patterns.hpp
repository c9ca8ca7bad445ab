#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crystal/error.hpp"
#include "crystal/message.hpp"
#include "crystal/router.hpp"

namespace crystal {

struct send_spec {
  rank_t dest = 0;
  std::size_t len = 0;

  bool operator==(const send_spec&) const = default;
};

// One send list per source rank. neighbor_pattern output is symmetric
// (r sends to q iff q sends to r) and duplicate-free per rank.
struct comm_pattern {
  rank_t procs = 0;
  std::vector<std::vector<send_spec>> sends;

  std::size_t message_count() const {
    std::size_t n = 0;
    for (const auto& list : sends) {
      n += list.size();
    }
    return n;
  }

  std::uint64_t total_payload_bytes() const {
    std::uint64_t bytes = 0;
    for (const auto& list : sends) {
      for (const send_spec& s : list) {
        bytes += s.len;
      }
    }
    return bytes;
  }
};

// k partners per rank at circular offsets ±j·stride for j = 1..k/2, one
// msg_len-byte message to each. The offsets must realize k distinct non-self
// partners; a colliding offset is rejected by name. Emission order per rank
// is j ascending, +offset before -offset.
inline comm_pattern neighbor_pattern(rank_t procs, unsigned partners, rank_t stride,
                                     std::size_t msg_len) {
  hypercube_dim(procs);
  if (partners < 1 || partners >= procs) {
    throw validation_error("partner count must satisfy 1 <= k < P, got k=" +
                           std::to_string(partners) + " with P=" + std::to_string(procs));
  }
  if (partners % 2 != 0) {
    throw validation_error("partner count must be even, got " + std::to_string(partners));
  }
  if (stride < 1) {
    throw validation_error("stride must be at least 1");
  }

  std::vector<rank_t> offsets;
  std::set<rank_t> seen;
  for (unsigned j = 1; j <= partners / 2; ++j) {
    const rank_t fwd = static_cast<rank_t>((static_cast<std::uint64_t>(j) * stride) % procs);
    if (fwd == 0) {
      throw validation_error("offset " + std::to_string(j) + "*" + std::to_string(stride) +
                             " is 0 mod " + std::to_string(procs) + "; partners collide");
    }
    const rank_t back = procs - fwd;
    if (!seen.insert(fwd).second) {
      throw validation_error("offset +" + std::to_string(j) + "*" + std::to_string(stride) +
                             " = " + std::to_string(fwd) + " mod " + std::to_string(procs) +
                             " collides with an earlier partner");
    }
    if (!seen.insert(back).second) {
      throw validation_error("offset -" + std::to_string(j) + "*" + std::to_string(stride) +
                             " = " + std::to_string(back) + " mod " + std::to_string(procs) +
                             " collides with an earlier partner");
    }
    offsets.push_back(fwd);
    offsets.push_back(back);
  }

  comm_pattern p;
  p.procs = procs;
  p.sends.resize(procs);
  for (rank_t r = 0; r < procs; ++r) {
    p.sends[r].reserve(partners);
    for (const rank_t off : offsets) {
      p.sends[r].push_back({(r + off) % procs, msg_len});
    }
  }
  return p;
}

// Message length for a strong-scaling sweep: per-process volume shrinks as
// O(P^-2/3), rounded to the nearest byte with a floor of 1.
inline std::size_t strong_scaling_len(std::size_t m0, rank_t procs0, rank_t procs) {
  if (m0 == 0) {
    throw validation_error("reference message length must be positive");
  }
  hypercube_dim(procs0);
  hypercube_dim(procs);
  const long double ratio = static_cast<long double>(procs0) / static_cast<long double>(procs);
  const long double len = static_cast<long double>(m0) * std::pow(ratio, 2.0L / 3.0L);
  const long long rounded = std::llround(len);
  return rounded < 1 ? std::size_t{1} : static_cast<std::size_t>(rounded);
}

// Weak scaling: the same per-rank send list shape at every process count, so
// per-rank volume is constant and aggregate volume is proportional to P.
inline std::vector<comm_pattern> weak_scaling_series(std::size_t msg_len, unsigned partners,
                                                     rank_t stride,
                                                     const std::vector<rank_t>& procs_list) {
  std::vector<comm_pattern> series;
  series.reserve(procs_list.size());
  for (const rank_t procs : procs_list) {
    series.push_back(neighbor_pattern(procs, partners, stride, msg_len));
  }
  return series;
}

inline void write_pattern_csv(const comm_pattern& pattern, std::ostream& out) {
  out << "rank,dest,len\n";
  for (rank_t r = 0; r < pattern.procs; ++r) {
    for (const send_spec& s : pattern.sends[r]) {
      out << r << ',' << s.dest << ',' << s.len << '\n';
    }
  }
}

namespace detail {

inline bool parse_u64_field(std::string_view field, std::uint64_t& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && !field.empty();
}

}  // namespace detail

// Inverse of write_pattern_csv, for externally authored patterns. Problems
// are reported as `source:line: reason`.
inline comm_pattern read_pattern_csv(std::istream& in, rank_t procs,
                                     const std::string& source = "pattern") {
  hypercube_dim(procs);
  comm_pattern p;
  p.procs = procs;
  p.sends.resize(procs);

  auto fail = [&](std::size_t line, const std::string& reason) {
    throw config_error(source + ":" + std::to_string(line) + ": " + reason);
  };

  std::set<std::pair<rank_t, rank_t>> seen;
  std::string row;
  std::size_t line = 0;
  bool saw_header = false;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') {
      row.pop_back();
    }
    if (!saw_header) {
      if (row != "rank,dest,len") {
        fail(line, "expected header rank,dest,len");
      }
      saw_header = true;
      continue;
    }
    if (row.empty()) {
      continue;
    }

    std::string_view rest = row;
    std::uint64_t fields[3];
    for (int i = 0; i < 3; ++i) {
      const std::size_t comma = rest.find(',');
      const bool last_field = i == 2;
      if (last_field != (comma == std::string_view::npos)) {
        fail(line, "expected 3 comma-separated fields");
      }
      const std::string_view field = last_field ? rest : rest.substr(0, comma);
      if (!detail::parse_u64_field(field, fields[i])) {
        fail(line, "field '" + std::string(field) + "' is not an unsigned integer");
      }
      if (!last_field) {
        rest = rest.substr(comma + 1);
      }
    }
    if (fields[0] >= procs) {
      fail(line, "rank " + std::to_string(fields[0]) + " out of range for P=" +
                     std::to_string(procs));
    }
    if (fields[1] >= procs) {
      fail(line, "dest " + std::to_string(fields[1]) + " out of range for P=" +
                     std::to_string(procs));
    }
    if (fields[2] > std::numeric_limits<std::uint32_t>::max()) {
      fail(line, "len " + std::to_string(fields[2]) + " does not fit the 32-bit length field");
    }
    const rank_t r = static_cast<rank_t>(fields[0]);
    const rank_t d = static_cast<rank_t>(fields[1]);
    if (!seen.insert({r, d}).second) {
      fail(line, "duplicate (rank,dest) pair " + std::to_string(r) + "," + std::to_string(d));
    }
    p.sends[r].push_back({d, static_cast<std::size_t>(fields[2])});
  }
  if (!saw_header) {
    fail(1, "empty pattern file");
  }
  return p;
}

}  // namespace crystal
