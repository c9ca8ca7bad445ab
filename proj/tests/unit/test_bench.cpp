#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "crystal/bench.hpp"

using namespace crystal;

namespace {

tamper_fn flip_or_drop() {
  return [](delivery_result& d) {
    for (auto& list : d.per_rank) {
      for (message& m : list) {
        if (!m.payload.empty()) {
          m.payload[0] ^= 1;
          return;
        }
      }
    }
    for (auto& list : d.per_rank) {
      if (!list.empty()) {
        list.pop_back();
        return;
      }
    }
  };
}

}  // namespace

TEST_CASE("one benchmark point fills a consistent row") {
  const machine_model m = builtin_default_model();
  const point_result pr = run_point({256, 26, 1, 8, 5, {}}, m, 0);
  const result_row& row = pr.row;

  CHECK(row.procs == 256);
  CHECK(row.partners == 26);
  CHECK(row.stride == 1);
  CHECK(row.msg_len == 8);
  CHECK(row.seed == 5);
  CHECK(row.trial == 0);
  CHECK(row.steps == 8);
  CHECK(row.crystal_total_s == pr.crystal.total);
  CHECK(row.direct_dense_total_s == pr.dense.total);
  CHECK(row.direct_sparse_total_s == pr.sparse.total);
  CHECK(row.ratio_dense == pr.dense.total / pr.crystal.total);
  CHECK(row.ratio_dense > 1.0);
  CHECK(row.total_bytes == pr.trace.total_bytes);
  CHECK(row.max_buffer_bytes > 0);

  const point_result trial3 = run_point({256, 26, 1, 8, 5, {}}, m, 3);
  CHECK(trial3.row.seed == 8);
  CHECK(trial3.row.trial == 3);
  CHECK(trial3.row.crystal_total_s == row.crystal_total_s);
}

TEST_CASE("message-length sweeps show the latency advantage fading") {
  const machine_model m = builtin_default_model();
  sweep_spec spec;
  spec.axis = sweep_axis::msg_len;
  spec.values = {8, 512, 4096, 32768};
  spec.fixed = {256, 26, 1, 8, 1, {}};
  const std::vector<result_row> rows = run_sweep(spec, m);

  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].msg_len == spec.values[i]);
    CHECK(rows[i].ratio_dense > 0.0);
    if (i > 0) {
      CHECK(rows[i].ratio_dense <= rows[i - 1].ratio_dense);
    }
  }
}

TEST_CASE("sweep trials rerun the same point with stepped seeds") {
  const machine_model m = builtin_default_model();
  sweep_spec spec;
  spec.axis = sweep_axis::stride;
  spec.values = {1, 3};
  spec.fixed = {32, 4, 1, 16, 100, {}};
  spec.repeat = 2;
  const std::vector<result_row> rows = run_sweep(spec, m);

  REQUIRE(rows.size() == 4);
  CHECK(rows[0].stride == 1);
  CHECK(rows[1].stride == 1);
  CHECK(rows[2].stride == 3);
  CHECK(rows[3].stride == 3);
  CHECK(rows[0].trial == 0);
  CHECK(rows[1].trial == 1);
  CHECK(rows[0].seed == 100);
  CHECK(rows[1].seed == 101);
  CHECK(rows[0].crystal_total_s == rows[1].crystal_total_s);
  CHECK(rows[0].total_bytes == rows[1].total_bytes);
}

TEST_CASE("strong-scaling sweeps shrink the payload per point") {
  const machine_model m = builtin_default_model();
  sweep_spec spec;
  spec.axis = sweep_axis::procs_strong;
  spec.values = {256, 512, 2048};
  spec.fixed = {256, 26, 1, 4096, 1, {}};
  const std::vector<result_row> rows = run_sweep(spec, m);

  REQUIRE(rows.size() == 3);
  CHECK(rows[0].procs == 256);
  CHECK(rows[0].msg_len == 4096);
  CHECK(rows[1].procs == 512);
  CHECK(rows[1].msg_len == 2580);
  CHECK(rows[2].procs == 2048);
  CHECK(rows[2].msg_len == 1024);
}

TEST_CASE("sweep specs are validated") {
  const machine_model m = builtin_default_model();
  sweep_spec spec;
  spec.axis = sweep_axis::msg_len;
  spec.fixed = {32, 4, 1, 8, 1, {}};

  spec.values = {};
  CHECK_THROWS_AS(run_sweep(spec, m), validation_error);
  spec.values = {8, 8};
  CHECK_THROWS_AS(run_sweep(spec, m), validation_error);
  spec.values = {512, 8};
  CHECK_THROWS_AS(run_sweep(spec, m), validation_error);
}

TEST_CASE("a failing point aborts the sweep with its coordinates") {
  const machine_model m = builtin_default_model();
  sweep_spec spec;
  spec.axis = sweep_axis::partners;
  spec.values = {2, 6};  // 6 partners on an 8-ring collide at the antipode
  spec.fixed = {8, 2, 2, 8, 1, {}};
  try {
    run_sweep(spec, m);
    FAIL("expected annotated_error");
  } catch (const annotated_error& e) {
    CHECK(e.code() == exit_code::usage);
    CHECK(std::string(e.what()).find("partners=6") != std::string::npos);
  }
}

TEST_CASE("presets cover the benchmark families with bounded payloads") {
  CHECK(preset_names() ==
        std::vector<std::string>{"fig1a", "fig1b", "fig1c", "fig3", "fig4", "fig5"});
  CHECK_THROWS_AS(preset("fig9", 1), validation_error);

  const preset_def a = preset("fig1a", 1);
  REQUIRE(a.sweeps.size() == 2);
  CHECK(a.sweeps[0].fixed.procs == 256);
  CHECK(a.sweeps[1].fixed.procs == 512);
  CHECK(a.sweeps[0].values.front() == 8);
  CHECK(a.sweeps[0].values.back() == 131072);
  CHECK(a.sweeps[1].values.back() == 131072);

  const preset_def b = preset("fig1b", 1);
  CHECK(b.sweeps[0].fixed.procs == 1024);
  CHECK(b.sweeps[0].values.back() == 32768);
  CHECK(b.sweeps[1].fixed.procs == 2048);
  CHECK(b.sweeps[1].values.back() == 16384);

  const preset_def c = preset("fig1c", 1);
  CHECK(c.sweeps[0].fixed.procs == 4096);
  CHECK(c.sweeps[1].fixed.procs == 8192);
  CHECK(c.sweeps[0].values.back() == 8192);
  CHECK(c.sweeps[1].values.back() == 8192);

  const preset_def s = preset("fig3", 1);
  REQUIRE(s.sweeps.size() == 2);
  for (const sweep_spec& sw : s.sweeps) {
    CHECK(sw.axis == sweep_axis::stride);
    CHECK(sw.values == std::vector<std::uint64_t>{1, 6, 12, 24});
    CHECK(sw.fixed.procs == 2048);
  }
  CHECK(s.sweeps[0].fixed.msg_len == 8);
  CHECK(s.sweeps[1].fixed.msg_len == 512);

  const preset_def k = preset("fig4", 1);
  REQUIRE(k.sweeps.size() == 1);
  CHECK(k.sweeps[0].axis == sweep_axis::partners);
  CHECK(k.sweeps[0].values == std::vector<std::uint64_t>{2, 6, 10, 14, 18, 22, 26});
  CHECK(k.sweeps[0].fixed.procs == 256);
  CHECK(k.sweeps[0].fixed.msg_len == 512);

  const preset_def w = preset("fig5", 1);
  REQUIRE(w.sweeps.size() == 3);
  for (const sweep_spec& sw : w.sweeps) {
    CHECK(sw.axis == sweep_axis::procs_weak);
    CHECK(sw.values == std::vector<std::uint64_t>{256, 512, 1024, 2048, 4096, 8192});
  }
  CHECK(w.sweeps[0].fixed.msg_len == 8);
  CHECK(w.sweeps[2].fixed.msg_len == 1024);
}

TEST_CASE("more partners never get cheaper") {
  const machine_model m = builtin_default_model();
  const std::vector<result_row> rows = run_preset(preset("fig4", 3), m);
  REQUIRE(rows.size() == 7);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].crystal_total_s >= rows[i - 1].crystal_total_s);
  }
}

TEST_CASE("result rows serialize with stable formatting") {
  result_row r;
  r.procs = 2;
  r.partners = 2;
  r.stride = 1;
  r.msg_len = 8;
  r.seed = 7;
  r.trial = 0;
  r.crystal_total_s = 1e-6;
  r.direct_dense_total_s = 4.3e-5;
  r.direct_sparse_total_s = 1.5e-6;
  r.ratio_dense = 43.0;
  r.total_bytes = 24;
  r.steps = 1;
  r.max_buffer_bytes = 24;

  std::stringstream out;
  write_result_csv({r}, out);
  CHECK(out.str() ==
        "procs,partners,stride,msg_len,seed,trial,crystal_total_s,direct_dense_total_s,"
        "direct_sparse_total_s,ratio_dense,total_bytes,steps,max_buffer_bytes\n"
        "2,2,1,8,7,0,1.000000000e-06,4.300000000e-05,1.500000000e-06,4.300000000e+01,24,1,24\n");
}

TEST_CASE("the check battery passes clean and catches corruption") {
  check_report clean = run_check({16, 10, 99});
  CHECK(clean.passed());
  CHECK(clean.trials_run >= 10);
  CHECK_FALSE(clean.first_failure.has_value());

  check_report tampered = run_check({16, 10, 99}, flip_or_drop());
  CHECK_FALSE(tampered.passed());
  CHECK(tampered.oracle_failures > 0);
  REQUIRE(tampered.first_failure.has_value());
  CHECK(!tampered.first_failure->description.empty());
  CHECK(tampered.first_failure->pattern.procs > 0);

  const check_report vacuous = run_check({16, 0, 99});
  CHECK(vacuous.passed());
  CHECK(vacuous.trials_run == 0);

  CHECK_THROWS_AS(run_check({2048, 1, 1}), validation_error);
}
