#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crystal/error.hpp"
#include "crystal/message.hpp"
#include "crystal/patterns.hpp"
#include "crystal/simulator.hpp"

namespace crystal {

// One locality tier. Costs are in seconds; group_size is the number of
// consecutive ranks sharing this tier under linear placement (rank r sits on
// core r mod cores-per-node of node r / cores-per-node). An empty group_size
// means one group spans every rank.
struct model_level {
  std::string name;
  std::optional<std::uint64_t> group_size;
  double alpha = 0.0;
  double beta = 0.0;

  bool operator==(const model_level&) const = default;
};

// Hierarchical alpha-beta cost model: a pairwise exchange pays the startup
// and per-byte rate of the closest tier containing both ranks.
class machine_model {
public:
  explicit machine_model(std::vector<model_level> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) {
      throw config_error("machine model needs at least one level");
    }
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      const model_level& l = levels_[i];
      if (l.group_size && *l.group_size == 0) {
        throw config_error("level " + l.name + ": group_size must be positive");
      }
      if (l.alpha < 0.0 || l.beta < 0.0) {
        throw config_error("level " + l.name + ": costs must be non-negative");
      }
      if (i == 0) {
        continue;
      }
      const model_level& prev = levels_[i - 1];
      if (!prev.group_size) {
        throw config_error("level " + l.name + ": follows the unbounded level " + prev.name);
      }
      if (l.group_size &&
          (*l.group_size <= *prev.group_size || *l.group_size % *prev.group_size != 0)) {
        throw config_error("level " + l.name + ": group_size must be an increasing multiple of " +
                           prev.name + "'s " + std::to_string(*prev.group_size));
      }
      if (l.alpha < prev.alpha || l.beta < prev.beta) {
        throw config_error("level " + l.name + ": costs must be non-decreasing with distance");
      }
    }
  }

  const std::vector<model_level>& levels() const { return levels_; }

  // Smallest level whose group contains both ranks; pairs beyond the
  // coarsest finite group clamp to the last level.
  std::size_t comm_level(rank_t a, rank_t b) const {
    if (a == b) {
      throw validation_error("comm_level needs two distinct ranks");
    }
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      const auto& gs = levels_[i].group_size;
      if (!gs || a / *gs == b / *gs) {
        return i;
      }
    }
    return levels_.size() - 1;
  }

  // Full-duplex exchange: one startup, the slower direction sets the wire
  // time.
  double pair_cost(std::uint64_t bytes_ab, std::uint64_t bytes_ba, std::size_t level) const {
    if (level >= levels_.size()) {
      throw validation_error("level " + std::to_string(level) + " out of range");
    }
    const model_level& l = levels_[level];
    return l.alpha + l.beta * static_cast<double>(std::max(bytes_ab, bytes_ba));
  }

private:
  std::vector<model_level> levels_;
};

struct time_report {
  std::vector<double> per_step;
  double total = 0.0;
  std::uint64_t alpha_terms = 0;
  std::uint64_t bytes_on_critical_path = 0;

  void write_csv(std::ostream& out) const {
    out << "step,seconds\n";
    char num[40];
    for (std::size_t i = 0; i < per_step.size(); ++i) {
      std::snprintf(num, sizeof num, "%.9e", per_step[i]);
      out << i << ',' << num << '\n';
    }
    std::snprintf(num, sizeof num, "%.9e", total);
    out << "total," << num << '\n';
  }
};

// Modeled crystal-router time: each step costs its most expensive pair, the
// run costs the sum over steps. One startup per step sits on the critical
// path, which is the whole point of the bundling.
inline time_report crystal_time(const exchange_trace& trace, const machine_model& model) {
  time_report rep;
  rep.per_step.reserve(trace.steps.size());
  for (const auto& step : trace.steps) {
    double worst = 0.0;
    std::uint64_t worst_bytes = 0;
    for (const pair_record& pr : step) {
      const std::size_t level = model.comm_level(pr.rank_a, pr.rank_b);
      const double cost = model.pair_cost(pr.bytes_ab, pr.bytes_ba, level);
      if (cost > worst) {
        worst = cost;
        worst_bytes = std::max(pr.bytes_ab, pr.bytes_ba);
      }
    }
    rep.per_step.push_back(worst);
    rep.total += worst;
    rep.bytes_on_critical_path += worst_bytes;
  }
  rep.alpha_terms = trace.steps.size();
  return rep;
}

enum class direct_mode { dense, sparse };

namespace detail {

// Ranks sharing r's level-`level` group, after clamping the group to [0, P).
inline std::uint64_t group_members(rank_t r, std::uint64_t procs,
                                   const std::optional<std::uint64_t>& group_size) {
  if (!group_size) {
    return procs;
  }
  const std::uint64_t base = (r / *group_size) * *group_size;
  return std::min<std::uint64_t>(procs, base + *group_size) - base;
}

}  // namespace detail

// Modeled direct all-to-all baseline: each rank pushes its sends one after
// another, the slowest rank sets the total. Dense mode charges a startup for
// all P-1 peers whether or not data flows (conventional dense-exchange
// behavior on sparse data); sparse mode charges only actual partners.
inline time_report direct_time(const comm_pattern& pattern, const machine_model& model,
                               direct_mode mode) {
  const rank_t procs = pattern.procs;
  const auto& levels = model.levels();
  double worst = 0.0;
  std::uint64_t worst_bytes = 0;
  std::uint64_t worst_alphas = 0;
  for (rank_t r = 0; r < procs; ++r) {
    double cost = 0.0;
    std::uint64_t bytes = 0;
    std::uint64_t alphas = 0;
    if (mode == direct_mode::dense) {
      // Startup charges by level, counted in closed form: a level's
      // exclusive peers are its group members minus the next-closer
      // group's, and the last level picks up everyone outside the
      // coarsest finite group.
      std::uint64_t inner = 1;
      for (std::size_t lv = 0; lv < levels.size(); ++lv) {
        const std::uint64_t members = lv + 1 == levels.size()
                                          ? procs
                                          : detail::group_members(r, procs, levels[lv].group_size);
        cost += levels[lv].alpha * static_cast<double>(members - inner);
        inner = members;
      }
      alphas = procs - 1;
      for (const send_spec& s : pattern.sends[r]) {
        const std::size_t level = model.comm_level(r, s.dest);
        cost += levels[level].beta * static_cast<double>(s.len);
        bytes += s.len;
      }
    } else {
      for (const send_spec& s : pattern.sends[r]) {
        cost += model.pair_cost(s.len, 0, model.comm_level(r, s.dest));
        bytes += s.len;
        ++alphas;
      }
    }
    if (cost > worst || r == 0) {
      worst = cost;
      worst_bytes = bytes;
      worst_alphas = alphas;
    }
  }
  time_report rep;
  rep.per_step.push_back(worst);
  rep.total = worst;
  rep.alpha_terms = worst_alphas;
  rep.bytes_on_critical_path = worst_bytes;
  return rep;
}

// Builds a model from the JSON shape
//   {"levels": [{"name", "group_size", "alpha_us", "beta_us_per_byte"}, ...]}
// where group_size null means unbounded. Times are microseconds in the file,
// seconds in the model.
inline machine_model model_from_json(const nlohmann::json& j, const std::string& source) {
  if (!j.is_object() || !j.contains("levels")) {
    throw config_error(source + ": expected a top-level object with a levels array");
  }
  const auto& levels = j["levels"];
  if (!levels.is_array() || levels.empty()) {
    throw config_error(source + ": levels must be a non-empty array");
  }
  std::vector<model_level> out;
  out.reserve(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    const std::string where = source + ": levels[" + std::to_string(i) + "]";
    if (!l.is_object()) {
      throw config_error(where + ": expected an object");
    }
    auto field = [&](const char* name) -> const nlohmann::json& {
      if (!l.contains(name)) {
        throw config_error(where + "." + name + ": missing field");
      }
      return l[name];
    };
    model_level ml;
    if (!field("name").is_string()) {
      throw config_error(where + ".name: expected a string");
    }
    ml.name = field("name").get<std::string>();
    const auto& gs = field("group_size");
    if (gs.is_number_unsigned()) {
      ml.group_size = gs.get<std::uint64_t>();
    } else if (!gs.is_null()) {
      throw config_error(where + ".group_size: expected an unsigned integer or null");
    }
    if (!field("alpha_us").is_number()) {
      throw config_error(where + ".alpha_us: expected a number");
    }
    if (!field("beta_us_per_byte").is_number()) {
      throw config_error(where + ".beta_us_per_byte: expected a number");
    }
    ml.alpha = field("alpha_us").get<double>() * 1e-6;
    ml.beta = field("beta_us_per_byte").get<double>() * 1e-6;
    out.push_back(std::move(ml));
  }
  try {
    return machine_model(std::move(out));
  } catch (const config_error& e) {
    throw config_error(source + ": " + e.what());
  }
}

inline machine_model load_machine_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw config_error(path + ": cannot open model file");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(path + ": " + e.what());
  }
  return model_from_json(j, path);
}

// Default model with the shape of a 24-core-node system (6-core numa dies,
// 2-die sockets, 2-socket nodes). The coefficients are calibration knobs
// chosen so short messages are latency-bound and 128 kB transfers are
// bandwidth-bound; they are not measurements. Kept textually in sync with
// configs/default_model.json (a unit test compares them).
inline const char* builtin_default_model_json() {
  return R"({
  "levels": [
    {"name": "numa",    "group_size": 6,    "alpha_us": 1.0,  "beta_us_per_byte": 0.00005},
    {"name": "socket",  "group_size": 12,   "alpha_us": 2.0,  "beta_us_per_byte": 0.0001},
    {"name": "node",    "group_size": 24,   "alpha_us": 5.0,  "beta_us_per_byte": 0.0002},
    {"name": "network", "group_size": null, "alpha_us": 15.0, "beta_us_per_byte": 0.004}
  ]
}
)";
}

inline machine_model builtin_default_model() {
  return model_from_json(nlohmann::json::parse(builtin_default_model_json()), "builtin");
}

}  // namespace crystal
