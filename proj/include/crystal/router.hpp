#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "crystal/codec.hpp"
#include "crystal/error.hpp"
#include "crystal/message.hpp"

namespace crystal {

// Hypercube dimensionality d for a process count, 2^d == procs.
// Non-power-of-two counts are rejected; folding schemes are out of scope.
inline unsigned hypercube_dim(rank_t procs) {
  if (procs == 0 || !std::has_single_bit(procs)) {
    throw validation_error("process count must be a power of two, got " + std::to_string(procs));
  }
  return static_cast<unsigned>(std::countr_zero(procs));
}

// Exchange peer of `myrank` across channel `dim`: myrank XOR 2^dim.
// An involution: partner(partner(r, i), i) == r.
inline rank_t partner(rank_t myrank, unsigned dim, unsigned dim_count) {
  if (dim >= dim_count) {
    throw validation_error("dimension " + std::to_string(dim) + " out of range for a " +
                           std::to_string(dim_count) + "-cube");
  }
  return myrank ^ (rank_t{1} << dim);
}

// True when a message addressed to `dest`, currently held by `myrank`, must
// cross channel `dim`: bit dim of (dest XOR myrank) is set.
inline bool needs_transfer(rank_t dest, rank_t myrank, unsigned dim) {
  assert(dim < 32);
  return ((dest ^ myrank) >> dim) & 1u;
}

struct step_stats {
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t msgs_sent = 0;
  std::uint64_t msgs_received = 0;
  std::uint64_t msgs_delivered = 0;
  std::uint64_t msgs_forwarded = 0;
};

// Called for every message that arrived over a channel, before it is filed
// into the inbox or the outbox.
using received_hook = std::function<void(const message&)>;

// The three buffers of one virtual process plus the per-dimension step
// mechanics. A step is split in two halves so a driver can realize the
// rendezvous between both peers of a channel:
//
//   auto out = state.begin_step(dim);            // stage + encode msg_next
//   auto in  = fabric_exchange(peer, out);       // one buffer each way
//   auto st  = state.finish_step(dim, in);       // deliver / forward
//
// Entry invariant for step i: every outbox message has bits 0..i-1 of
// (dest XOR myrank) clear. The step clears bit i, so the invariant holds
// again at step i+1 and delivery completes after d steps.
class router_state {
public:
  router_state(rank_t myrank, rank_t procs, std::optional<std::size_t> bytes_cap = {})
      : myrank_(myrank), procs_(procs), dims_(hypercube_dim(procs)), bytes_cap_(bytes_cap) {
    if (myrank >= procs) {
      throw validation_error("rank " + std::to_string(myrank) + " out of range for " +
                             std::to_string(procs) + " processes");
    }
  }

  rank_t myrank() const { return myrank_; }
  rank_t procs() const { return procs_; }
  unsigned dims() const { return dims_; }
  std::optional<std::size_t> bytes_cap() const { return bytes_cap_; }

  void inject(message m) {
    if (m.src >= procs_ || m.dest >= procs_) {
      throw validation_error("message " + std::to_string(m.src) + "->" + std::to_string(m.dest) +
                             " out of range for " + std::to_string(procs_) + " processes");
    }
    note_resident(frame_size(m));
    msg_out_.push_back(std::move(m));
  }

  // Pre-loop sweep of Algorithm 1: self-addressed messages go straight to
  // the inbox with zero hops. Returns how many moved.
  std::size_t deliver_local() {
    auto keep = std::stable_partition(msg_out_.begin(), msg_out_.end(),
                                      [this](const message& m) { return m.dest != myrank_; });
    const std::size_t moved = static_cast<std::size_t>(msg_out_.end() - keep);
    for (auto it = keep; it != msg_out_.end(); ++it) {
      msg_in_.push_back(std::move(*it));
    }
    msg_out_.erase(keep, msg_out_.end());
    return moved;
  }

  // First half of step `dim`: move every outbox message whose routing path
  // crosses this channel into msg_next and encode it. Relative order is
  // preserved on both sides of the split.
  transfer_buffer begin_step(unsigned dim) {
    if (dim >= dims_) {
      throw validation_error("step " + std::to_string(dim) + " out of range for a " +
                             std::to_string(dims_) + "-cube");
    }
    if (staged_) {
      throw internal_error("begin_step called twice without finish_step (rank " +
                           std::to_string(myrank_) + ")");
    }
    auto keep = std::stable_partition(msg_out_.begin(), msg_out_.end(), [&](const message& m) {
      return !needs_transfer(m.dest, myrank_, dim);
    });
    for (auto it = keep; it != msg_out_.end(); ++it) {
      msg_next_.push_back(std::move(*it));
    }
    msg_out_.erase(keep, msg_out_.end());

    transfer_buffer out;
    try {
      out = encode_transfer(msg_next_, bytes_cap_);
    } catch (const capacity_error& e) {
      throw capacity_error(e.required_bytes(), e.available_bytes(),
                           "rank " + std::to_string(myrank_) + ", step " + std::to_string(dim));
    }
    pending_ = step_stats{};
    pending_.bytes_sent = out.size_bytes();
    pending_.msgs_sent = msg_next_.size();
    staged_ = true;
    staged_dim_ = dim;
    return out;
  }

  // Second half: drop the exchanged msg_next, decode the peer's buffer, and
  // file each message: inbox when addressed here, outbox otherwise.
  step_stats finish_step(unsigned dim, std::span<const std::uint8_t> incoming,
                         const received_hook& on_received = {}) {
    if (!staged_ || dim != staged_dim_) {
      throw internal_error("finish_step(" + std::to_string(dim) +
                           ") without matching begin_step (rank " + std::to_string(myrank_) + ")");
    }
    for (const message& m : msg_next_) {
      resident_ -= frame_size(m);
    }
    msg_next_.clear();

    std::vector<message> got;
    try {
      got = decode_transfer(incoming);
    } catch (const decode_error& e) {
      throw decode_error(e.offset(), std::string(e.what()) + " (rank " + std::to_string(myrank_) +
                                         ", step " + std::to_string(dim) + ")");
    }
    step_stats st = pending_;
    st.bytes_received = incoming.size();
    st.msgs_received = got.size();
    for (message& m : got) {
      if (on_received) {
        on_received(m);
      }
      note_resident(frame_size(m));
      if (m.dest == myrank_) {
        msg_in_.push_back(std::move(m));
        ++st.msgs_delivered;
      } else {
        msg_out_.push_back(std::move(m));
        ++st.msgs_forwarded;
      }
    }
    staged_ = false;
    return st;
  }

  const std::vector<message>& inbox() const { return msg_in_; }
  const std::vector<message>& outbox() const { return msg_out_; }
  const std::vector<message>& staged() const { return msg_next_; }

  std::vector<message> take_inbox() {
    for (const message& m : msg_in_) {
      resident_ -= frame_size(m);
    }
    return std::exchange(msg_in_, {});
  }

  // Frame-equivalent bytes currently held across the three buffers, and the
  // maximum that count ever reached.
  std::size_t resident_bytes() const { return resident_; }
  std::size_t high_water() const { return high_water_; }

private:
  void note_resident(std::size_t bytes) {
    resident_ += bytes;
    high_water_ = std::max(high_water_, resident_);
  }

  rank_t myrank_;
  rank_t procs_;
  unsigned dims_;
  std::optional<std::size_t> bytes_cap_;
  std::vector<message> msg_out_;
  std::vector<message> msg_in_;
  std::vector<message> msg_next_;
  step_stats pending_{};
  bool staged_ = false;
  unsigned staged_dim_ = 0;
  std::size_t resident_ = 0;
  std::size_t high_water_ = 0;
};

// Rendezvous callback: deliver `outgoing` to `peer`, return the peer's
// buffer for the same step.
using exchange_fn =
    std::function<std::vector<std::uint8_t>(rank_t peer, const transfer_buffer& outgoing)>;

// One full dimension step for one process, via an abstract pairwise
// exchange. Exactly one buffer crosses in each direction regardless of
// message count.
inline step_stats crystal_step(router_state& state, unsigned dim, const exchange_fn& exchange) {
  transfer_buffer out = state.begin_step(dim);
  const rank_t peer = partner(state.myrank(), dim, state.dims());
  std::vector<std::uint8_t> incoming = exchange(peer, out);
  return state.finish_step(dim, incoming);
}

struct pair_stats {
  unsigned step = 0;
  rank_t rank_a = 0;
  rank_t rank_b = 0;
  std::uint64_t bytes_ab = 0;
  std::uint64_t bytes_ba = 0;
  std::uint64_t msgs_ab = 0;
  std::uint64_t msgs_ba = 0;
};

struct route_hooks {
  std::function<void(const pair_stats&)> on_pair;
  received_hook on_received;
};

// Runs the d-step routing loop over all P states through an in-memory
// rendezvous: per step, each (r, r XOR 2^step) pair with r's bit clear
// exchanges exactly once, in ascending order of r. Deliveries accumulate in
// each state's inbox.
inline void crystal_route(std::span<router_state> states, const route_hooks& hooks = {}) {
  if (states.empty()) {
    throw validation_error("crystal_route needs at least one router state");
  }
  const rank_t procs = states[0].procs();
  const unsigned dims = states[0].dims();
  if (states.size() != procs) {
    throw validation_error("got " + std::to_string(states.size()) + " states for " +
                           std::to_string(procs) + " processes");
  }
  for (rank_t r = 0; r < procs; ++r) {
    if (states[r].myrank() != r || states[r].procs() != procs) {
      throw validation_error("states must be ordered by rank and share one process count");
    }
  }

  for (router_state& s : states) {
    s.deliver_local();
  }

  for (unsigned dim = 0; dim < dims; ++dim) {
    const rank_t bit = rank_t{1} << dim;
    for (rank_t a = 0; a < procs; ++a) {
      if (a & bit) {
        continue;
      }
      const rank_t b = a | bit;
      transfer_buffer out_a = states[a].begin_step(dim);
      transfer_buffer out_b = states[b].begin_step(dim);
      step_stats st_a = states[a].finish_step(dim, out_b.data, hooks.on_received);
      step_stats st_b = states[b].finish_step(dim, out_a.data, hooks.on_received);
      if (hooks.on_pair) {
        hooks.on_pair({dim, a, b, st_a.bytes_sent, st_b.bytes_sent, st_a.msgs_sent,
                       st_b.msgs_sent});
      }
    }
  }

  for (const router_state& s : states) {
    if (!s.outbox().empty() || !s.staged().empty()) {
      throw internal_error("message undelivered after final step at rank " +
                           std::to_string(s.myrank()));
    }
  }
}

}  // namespace crystal
