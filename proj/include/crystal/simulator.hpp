#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <tuple>
#include <utility>
#include <vector>

#include "crystal/error.hpp"
#include "crystal/message.hpp"
#include "crystal/patterns.hpp"
#include "crystal/rng.hpp"
#include "crystal/router.hpp"

namespace crystal {

struct sim_config {
  rank_t procs = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> bytes_cap;
};

struct pair_record {
  unsigned step = 0;
  rank_t rank_a = 0;
  rank_t rank_b = 0;
  std::uint64_t bytes_ab = 0;
  std::uint64_t bytes_ba = 0;
  std::uint64_t msgs_ab = 0;
  std::uint64_t msgs_ba = 0;

  bool operator==(const pair_record&) const = default;
};

// Everything observable about one routing run except the payloads: per-step
// pair records, per-rank buffer high-water marks, and per-message exchange
// counts keyed by (src, dest); patterns forbid duplicate sends, so the key
// identifies the message.
struct exchange_trace {
  rank_t procs = 0;
  std::vector<std::vector<pair_record>> steps;
  std::vector<std::size_t> high_water;
  std::map<std::pair<rank_t, rank_t>, unsigned> hops;
  std::uint64_t total_bytes = 0;

  void write_csv(std::ostream& out) const {
    out << "step,rank_a,rank_b,bytes_ab,bytes_ba,msgs_ab,msgs_ba\n";
    for (const auto& step : steps) {
      for (const pair_record& pr : step) {
        out << pr.step << ',' << pr.rank_a << ',' << pr.rank_b << ',' << pr.bytes_ab << ','
            << pr.bytes_ba << ',' << pr.msgs_ab << ',' << pr.msgs_ba << '\n';
      }
    }
  }
};

struct delivery_result {
  std::vector<std::vector<message>> per_rank;

  std::size_t message_count() const {
    std::size_t n = 0;
    for (const auto& list : per_rank) {
      n += list.size();
    }
    return n;
  }
};

struct sim_result {
  delivery_result delivered;
  exchange_trace trace;
};

// Runs the full crystal-router exchange for `pattern` on P virtual processes
// wired through an in-memory rendezvous. Execution is sequential and
// step-synchronous; identical (pattern, config) inputs give bit-identical
// deliveries and traces. Payload bytes are derived from (seed, src, dest,
// index within the source's send list).
inline sim_result simulate(const comm_pattern& pattern, const sim_config& config) {
  if (pattern.procs != config.procs) {
    throw validation_error("pattern is for " + std::to_string(pattern.procs) +
                           " processes but config says " + std::to_string(config.procs));
  }
  const rank_t procs = config.procs;
  const unsigned dims = hypercube_dim(procs);

  std::vector<router_state> states;
  states.reserve(procs);
  for (rank_t r = 0; r < procs; ++r) {
    states.emplace_back(r, procs, config.bytes_cap);
  }
  for (rank_t r = 0; r < procs; ++r) {
    const auto& list = pattern.sends[r];
    for (std::size_t i = 0; i < list.size(); ++i) {
      states[r].inject({r, list[i].dest,
                        message_payload(config.seed, r, list[i].dest, i, list[i].len)});
    }
  }

  sim_result result;
  result.trace.procs = procs;
  result.trace.steps.resize(dims);
  route_hooks hooks;
  hooks.on_pair = [&](const pair_stats& ps) {
    result.trace.steps[ps.step].push_back(
        {ps.step, ps.rank_a, ps.rank_b, ps.bytes_ab, ps.bytes_ba, ps.msgs_ab, ps.msgs_ba});
    result.trace.total_bytes += ps.bytes_ab + ps.bytes_ba;
  };
  hooks.on_received = [&](const message& m) { ++result.trace.hops[{m.src, m.dest}]; };
  crystal_route(states, hooks);

  result.trace.high_water.reserve(procs);
  result.delivered.per_rank.resize(procs);
  for (rank_t r = 0; r < procs; ++r) {
    result.trace.high_water.push_back(states[r].high_water());
    result.delivered.per_rank[r] = states[r].take_inbox();
  }
  return result;
}

// Ground truth: every message placed straight into its destination list,
// payloads keyed exactly as simulate() keys them.
inline delivery_result direct_delivery_oracle(const comm_pattern& pattern, std::uint64_t seed) {
  delivery_result result;
  result.per_rank.resize(pattern.procs);
  for (rank_t r = 0; r < pattern.procs; ++r) {
    const auto& list = pattern.sends[r];
    for (std::size_t i = 0; i < list.size(); ++i) {
      result.per_rank[list[i].dest].push_back(
          {r, list[i].dest, message_payload(seed, r, list[i].dest, i, list[i].len)});
    }
  }
  return result;
}

// Multiset equality per destination rank, payloads included. Delivery order
// may differ between router and oracle, so both sides are sorted.
inline bool delivery_equivalent(delivery_result a, delivery_result b) {
  if (a.per_rank.size() != b.per_rank.size()) {
    return false;
  }
  auto key_less = [](const message& x, const message& y) {
    return std::tie(x.src, x.dest, x.payload) < std::tie(y.src, y.dest, y.payload);
  };
  for (std::size_t r = 0; r < a.per_rank.size(); ++r) {
    std::sort(a.per_rank[r].begin(), a.per_rank[r].end(), key_less);
    std::sort(b.per_rank[r].begin(), b.per_rank[r].end(), key_less);
    if (a.per_rank[r] != b.per_rank[r]) {
      return false;
    }
  }
  return true;
}

}  // namespace crystal
