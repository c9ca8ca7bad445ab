// Routes a 16-process ring exchange through the crystal router and prints
// what each step moved, then the modeled times next to the direct baselines.

#include <cstdio>

#include "crystal/crystal.hpp"

int main() {
  const crystal::rank_t procs = 16;
  const crystal::comm_pattern pattern = crystal::neighbor_pattern(procs, 4, 1, 64);
  const crystal::sim_result sim = crystal::simulate(pattern, {procs, 42, {}});

  std::printf("%u processes, %zu messages, %u steps\n\n", procs, pattern.message_count(),
              static_cast<unsigned>(sim.trace.steps.size()));
  std::printf("step   pairs   bytes moved\n");
  for (const auto& step : sim.trace.steps) {
    std::uint64_t bytes = 0;
    for (const crystal::pair_record& pr : step) {
      bytes += pr.bytes_ab + pr.bytes_ba;
    }
    std::printf("%4u  %6zu  %12llu\n", step.front().step, step.size(),
                static_cast<unsigned long long>(bytes));
  }

  const crystal::machine_model model = crystal::builtin_default_model();
  const crystal::time_report crystal_rep = crystal::crystal_time(sim.trace, model);
  const crystal::time_report dense =
      crystal::direct_time(pattern, model, crystal::direct_mode::dense);
  const crystal::time_report sparse =
      crystal::direct_time(pattern, model, crystal::direct_mode::sparse);
  std::printf("\nmodeled crystal  %10.3f us\n", crystal_rep.total * 1e6);
  std::printf("modeled dense    %10.3f us\n", dense.total * 1e6);
  std::printf("modeled sparse   %10.3f us\n", sparse.total * 1e6);

  std::size_t delivered = 0;
  for (const auto& inbox : sim.delivered.per_rank) {
    delivered += inbox.size();
  }
  std::printf("\ndelivered %zu/%zu messages\n", delivered, pattern.message_count());
  return 0;
}
