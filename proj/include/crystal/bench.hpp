#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "crystal/costmodel.hpp"
#include "crystal/patterns.hpp"
#include "crystal/rng.hpp"
#include "crystal/simulator.hpp"

namespace crystal {

struct run_params {
  rank_t procs = 256;
  unsigned partners = 26;
  rank_t stride = 1;
  std::size_t msg_len = 8;
  std::uint64_t seed = 1;
  std::optional<std::size_t> bytes_cap;
};

struct result_row {
  rank_t procs = 0;
  unsigned partners = 0;
  rank_t stride = 0;
  std::size_t msg_len = 0;
  std::uint64_t seed = 0;
  unsigned trial = 0;
  double crystal_total_s = 0.0;
  double direct_dense_total_s = 0.0;
  double direct_sparse_total_s = 0.0;
  double ratio_dense = 0.0;
  std::uint64_t total_bytes = 0;
  unsigned steps = 0;
  std::size_t max_buffer_bytes = 0;
};

struct point_result {
  result_row row;
  time_report crystal;
  time_report dense;
  time_report sparse;
  exchange_trace trace;
};

// One benchmark point: build the pattern, route it, model the crystal run
// and both direct baselines. Trial t runs with seed `params.seed + t`;
// modeled times do not depend on payload bytes, so trials exist to exercise
// the correctness path.
inline point_result run_point(const run_params& params, const machine_model& model,
                              unsigned trial = 0) {
  const comm_pattern pattern =
      neighbor_pattern(params.procs, params.partners, params.stride, params.msg_len);
  const std::uint64_t seed = params.seed + trial;
  sim_result sim = simulate(pattern, {params.procs, seed, params.bytes_cap});

  point_result out;
  out.crystal = crystal_time(sim.trace, model);
  out.dense = direct_time(pattern, model, direct_mode::dense);
  out.sparse = direct_time(pattern, model, direct_mode::sparse);
  out.row.procs = params.procs;
  out.row.partners = params.partners;
  out.row.stride = params.stride;
  out.row.msg_len = params.msg_len;
  out.row.seed = seed;
  out.row.trial = trial;
  out.row.crystal_total_s = out.crystal.total;
  out.row.direct_dense_total_s = out.dense.total;
  out.row.direct_sparse_total_s = out.sparse.total;
  out.row.ratio_dense = out.dense.total / out.crystal.total;
  out.row.total_bytes = sim.trace.total_bytes;
  out.row.steps = static_cast<unsigned>(sim.trace.steps.size());
  out.row.max_buffer_bytes = 0;
  for (const std::size_t hw : sim.trace.high_water) {
    out.row.max_buffer_bytes = std::max(out.row.max_buffer_bytes, hw);
  }
  out.trace = std::move(sim.trace);
  return out;
}

enum class sweep_axis { msg_len, stride, partners, procs_weak, procs_strong };

inline const char* sweep_axis_name(sweep_axis axis) {
  switch (axis) {
    case sweep_axis::msg_len: return "msg_len";
    case sweep_axis::stride: return "stride";
    case sweep_axis::partners: return "partners";
    case sweep_axis::procs_weak: return "procs_weak";
    case sweep_axis::procs_strong: return "procs_strong";
  }
  return "?";
}

// One swept axis over `values` with everything else held at `fixed`. For
// procs_strong the fixed msg_len is the reference volume at the fixed procs
// count, shrunk per point by strong_scaling_len.
struct sweep_spec {
  sweep_axis axis = sweep_axis::msg_len;
  std::vector<std::uint64_t> values;
  run_params fixed;
  unsigned repeat = 1;
};

inline std::vector<result_row> run_sweep(const sweep_spec& spec, const machine_model& model) {
  if (spec.values.empty()) {
    throw validation_error("sweep needs at least one axis value");
  }
  for (std::size_t i = 1; i < spec.values.size(); ++i) {
    if (spec.values[i] <= spec.values[i - 1]) {
      throw validation_error("sweep values must be strictly increasing, got " +
                             std::to_string(spec.values[i]) + " after " +
                             std::to_string(spec.values[i - 1]));
    }
  }

  std::vector<result_row> rows;
  rows.reserve(spec.values.size() * spec.repeat);
  for (const std::uint64_t value : spec.values) {
    run_params p = spec.fixed;
    switch (spec.axis) {
      case sweep_axis::msg_len:
        p.msg_len = static_cast<std::size_t>(value);
        break;
      case sweep_axis::stride:
        p.stride = static_cast<rank_t>(value);
        break;
      case sweep_axis::partners:
        p.partners = static_cast<unsigned>(value);
        break;
      case sweep_axis::procs_weak:
        p.procs = static_cast<rank_t>(value);
        break;
      case sweep_axis::procs_strong:
        p.procs = static_cast<rank_t>(value);
        p.msg_len = strong_scaling_len(spec.fixed.msg_len, spec.fixed.procs, p.procs);
        break;
    }
    for (unsigned t = 0; t < spec.repeat; ++t) {
      try {
        rows.push_back(run_point(p, model, t).row);
      } catch (const error& e) {
        throw annotated_error("sweep aborted at " + std::string(sweep_axis_name(spec.axis)) +
                                  "=" + std::to_string(value) + ", trial " + std::to_string(t) +
                                  ": " + e.what(),
                              e.code());
      }
    }
  }
  return rows;
}

inline void write_result_header(std::ostream& out) {
  out << "procs,partners,stride,msg_len,seed,trial,crystal_total_s,direct_dense_total_s,"
         "direct_sparse_total_s,ratio_dense,total_bytes,steps,max_buffer_bytes\n";
}

inline void write_result_row(const result_row& r, std::ostream& out) {
  char num[40];
  out << r.procs << ',' << r.partners << ',' << r.stride << ',' << r.msg_len << ',' << r.seed
      << ',' << r.trial << ',';
  std::snprintf(num, sizeof num, "%.9e", r.crystal_total_s);
  out << num << ',';
  std::snprintf(num, sizeof num, "%.9e", r.direct_dense_total_s);
  out << num << ',';
  std::snprintf(num, sizeof num, "%.9e", r.direct_sparse_total_s);
  out << num << ',';
  std::snprintf(num, sizeof num, "%.9e", r.ratio_dense);
  out << num << ',' << r.total_bytes << ',' << r.steps << ',' << r.max_buffer_bytes << '\n';
}

inline void write_result_csv(const std::vector<result_row>& rows, std::ostream& out) {
  write_result_header(out);
  for (const result_row& r : rows) {
    write_result_row(r, out);
  }
}

// Named sweep bundles regenerating the benchmark families from one command.
// Message lengths sweep 8 B..128 kB in powers of two, truncated where the
// payload volume would not fit desk-scale memory: at 1024 and 2048 processes
// the grid stops at 32 kB and 16 kB, at 4096 and 8192 it stops at 8 kB.
// Stride sweeps run at 2048 processes; the partner-count sweep varies k over
// even values 2..26; weak scaling runs 256..8192 processes at fixed per-rank
// volume.
struct preset_def {
  std::string name;
  std::vector<sweep_spec> sweeps;
};

namespace detail {

inline std::vector<std::uint64_t> pow2_values(std::uint64_t from, std::uint64_t to) {
  std::vector<std::uint64_t> v;
  for (std::uint64_t x = from; x <= to; x *= 2) {
    v.push_back(x);
  }
  return v;
}

}  // namespace detail

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig1a", "fig1b", "fig1c",
                                                 "fig3",  "fig4",  "fig5"};
  return names;
}

inline preset_def preset(const std::string& name, std::uint64_t seed) {
  run_params base;
  base.partners = 26;
  base.stride = 1;
  base.seed = seed;

  auto msg_sweep = [&](rank_t procs, std::uint64_t max_len) {
    sweep_spec s;
    s.axis = sweep_axis::msg_len;
    s.values = detail::pow2_values(8, max_len);
    s.fixed = base;
    s.fixed.procs = procs;
    return s;
  };

  preset_def def;
  def.name = name;
  if (name == "fig1a") {
    def.sweeps = {msg_sweep(256, 131072), msg_sweep(512, 131072)};
  } else if (name == "fig1b") {
    def.sweeps = {msg_sweep(1024, 32768), msg_sweep(2048, 16384)};
  } else if (name == "fig1c") {
    def.sweeps = {msg_sweep(4096, 8192), msg_sweep(8192, 8192)};
  } else if (name == "fig3") {
    for (const std::size_t len : {std::size_t{8}, std::size_t{512}}) {
      sweep_spec s;
      s.axis = sweep_axis::stride;
      s.values = {1, 6, 12, 24};
      s.fixed = base;
      s.fixed.procs = 2048;
      s.fixed.msg_len = len;
      def.sweeps.push_back(std::move(s));
    }
  } else if (name == "fig4") {
    sweep_spec s;
    s.axis = sweep_axis::partners;
    s.values = {2, 6, 10, 14, 18, 22, 26};
    s.fixed = base;
    s.fixed.procs = 256;
    s.fixed.msg_len = 512;
    def.sweeps.push_back(std::move(s));
  } else if (name == "fig5") {
    for (const std::size_t len : {std::size_t{8}, std::size_t{512}, std::size_t{1024}}) {
      sweep_spec s;
      s.axis = sweep_axis::procs_weak;
      s.values = {256, 512, 1024, 2048, 4096, 8192};
      s.fixed = base;
      s.fixed.msg_len = len;
      def.sweeps.push_back(std::move(s));
    }
  } else {
    throw validation_error("unknown preset '" + name + "'");
  }
  return def;
}

inline std::vector<result_row> run_preset(const preset_def& def, const machine_model& model) {
  std::vector<result_row> rows;
  for (const sweep_spec& s : def.sweeps) {
    std::vector<result_row> part = run_sweep(s, model);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

// Randomized correctness battery over the small-P grid: every valid
// (P, k, s, m) combination with P up to procs_max, k in {2, 8, 26},
// s in {1, 3, 24 mod P}, m in {0, 8, 512}. One full pass over the grid is a
// round; rounds repeat with fresh seeds until at least `trials` instances
// ran. Each instance checks delivery against the oracle, the step count, the
// hop law, the per-step matching, and byte conservation.
struct check_options {
  rank_t procs_max = 256;
  unsigned trials = 200;
  std::uint64_t seed = 1;
};

struct check_failure {
  std::string description;
  comm_pattern pattern;
  std::uint64_t seed = 0;
};

struct check_report {
  unsigned trials_run = 0;
  unsigned oracle_failures = 0;
  unsigned step_failures = 0;
  unsigned hop_failures = 0;
  unsigned matching_failures = 0;
  unsigned conservation_failures = 0;
  std::optional<check_failure> first_failure;
  double elapsed_s = 0.0;

  unsigned failures() const {
    return oracle_failures + step_failures + hop_failures + matching_failures +
           conservation_failures;
  }
  bool passed() const { return failures() == 0; }
};

// Test hook: corrupts a delivery result the way a routing bug would, so the
// battery can prove it catches one.
using tamper_fn = std::function<void(delivery_result&)>;

inline check_report run_check(const check_options& opts, const tamper_fn& tamper = {}) {
  if (opts.procs_max > 1024) {
    throw validation_error("check is desk-scale; procs_max must be at most 1024");
  }
  hypercube_dim(opts.procs_max);

  struct combo {
    rank_t procs;
    unsigned partners;
    rank_t stride;
    std::size_t msg_len;
  };
  std::vector<combo> grid;
  for (rank_t procs = 2; procs <= opts.procs_max; procs *= 2) {
    for (const unsigned partners : {2u, 8u, 26u}) {
      if (partners >= procs) {
        continue;
      }
      std::vector<rank_t> strides = {1, 3};
      if (24 % procs != 0) {
        strides.push_back(24 % procs);
      }
      std::sort(strides.begin(), strides.end());
      strides.erase(std::unique(strides.begin(), strides.end()), strides.end());
      for (const rank_t stride : strides) {
        try {
          neighbor_pattern(procs, partners, stride, 0);
        } catch (const validation_error&) {
          continue;
        }
        for (const std::size_t msg_len : {std::size_t{0}, std::size_t{8}, std::size_t{512}}) {
          grid.push_back({procs, partners, stride, msg_len});
        }
      }
    }
  }

  check_report report;
  const auto t0 = std::chrono::steady_clock::now();
  auto record_failure = [&](unsigned& counter, const combo& c, std::uint64_t seed,
                            const comm_pattern& pattern, const std::string& what) {
    ++counter;
    if (!report.first_failure) {
      report.first_failure = {"P=" + std::to_string(c.procs) + " k=" + std::to_string(c.partners) +
                                  " s=" + std::to_string(c.stride) +
                                  " m=" + std::to_string(c.msg_len) +
                                  " seed=" + std::to_string(seed) + ": " + what,
                              pattern, seed};
    }
  };

  for (std::uint64_t round = 0; report.trials_run < opts.trials && !grid.empty(); ++round) {
    for (std::size_t ci = 0; ci < grid.size(); ++ci) {
      const combo& c = grid[ci];
      const std::uint64_t seed = mix64(mix64(opts.seed, round), ci);
      const comm_pattern pattern =
          neighbor_pattern(c.procs, c.partners, c.stride, c.msg_len);
      sim_result sim = simulate(pattern, {c.procs, seed, {}});
      ++report.trials_run;

      const unsigned dims = hypercube_dim(c.procs);
      if (sim.trace.steps.size() != dims) {
        record_failure(report.step_failures, c, seed, pattern,
                       "ran " + std::to_string(sim.trace.steps.size()) + " steps, expected " +
                           std::to_string(dims));
      }

      bool hops_ok = true;
      for (rank_t r = 0; r < c.procs && hops_ok; ++r) {
        for (const send_spec& s : pattern.sends[r]) {
          const unsigned expect = static_cast<unsigned>(std::popcount(r ^ s.dest));
          const auto it = sim.trace.hops.find({r, s.dest});
          const unsigned got = it == sim.trace.hops.end() ? 0 : it->second;
          if (got != expect) {
            record_failure(report.hop_failures, c, seed, pattern,
                           "message " + std::to_string(r) + "->" + std::to_string(s.dest) +
                               " crossed " + std::to_string(got) + " channels, expected " +
                               std::to_string(expect));
            hops_ok = false;
            break;
          }
        }
      }

      bool matching_ok = true;
      for (const auto& step : sim.trace.steps) {
        std::vector<unsigned> appearances(c.procs, 0);
        for (const pair_record& pr : step) {
          ++appearances[pr.rank_a];
          ++appearances[pr.rank_b];
        }
        if (std::any_of(appearances.begin(), appearances.end(),
                        [](unsigned n) { return n != 1; })) {
          matching_ok = false;
          break;
        }
      }
      if (!matching_ok) {
        record_failure(report.matching_failures, c, seed, pattern,
                       "step pair set is not a perfect matching");
      }

      std::uint64_t expect_bytes = 0;
      for (rank_t r = 0; r < c.procs; ++r) {
        for (const send_spec& s : pattern.sends[r]) {
          expect_bytes += static_cast<std::uint64_t>(frame_header_bytes + s.len) *
                          static_cast<unsigned>(std::popcount(r ^ s.dest));
        }
      }
      if (sim.trace.total_bytes != expect_bytes) {
        record_failure(report.conservation_failures, c, seed, pattern,
                       "moved " + std::to_string(sim.trace.total_bytes) + " bytes, expected " +
                           std::to_string(expect_bytes));
      }

      if (tamper) {
        tamper(sim.delivered);
      }
      if (!delivery_equivalent(std::move(sim.delivered),
                               direct_delivery_oracle(pattern, seed))) {
        record_failure(report.oracle_failures, c, seed, pattern,
                       "delivery multiset differs from the direct oracle");
      }
    }
  }
  report.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace crystal
