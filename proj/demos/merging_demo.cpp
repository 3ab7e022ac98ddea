// Minimal library walkthrough: run the merging scenario against an egoistic
// and an altruistic human driver and print 1 s position snapshots.

#include <cmath>
#include <cstdio>

#include "svogame/svogame.hpp"

int main() {
  for (const double phi2_true : {svogame::kHalfPi / 6.0, 5.0 * svogame::kHalfPi / 6.0}) {
    svogame::RunSpec spec;
    spec.config = svogame::default_config();
    spec.hdv.true_phi2 = phi2_true;

    const svogame::SimulationLog log = svogame::run(spec);

    std::printf("true HDV SVO %.4f rad:\n", phi2_true);
    std::printf("  %6s %10s %10s %10s\n", "t", "cav_p", "hdv_p", "phi2_est");
    for (std::size_t i = 0; i < log.size(); i += 10) {
      std::printf("  %6.1f %10.2f %10.2f %10.4f\n", log[i].t, log[i].p1, log[i].p2,
                  log[i].phi2_est);
    }
    const auto c1 = svogame::crossing_step(log, 1);
    const auto c2 = svogame::crossing_step(log, 2);
    std::printf("  crossed first: %s, closest approach %.2f m\n\n",
                c2 && (!c1 || *c2 < *c1) ? "HDV" : "CAV",
                std::sqrt(svogame::min_squared_distance(log)));
  }
  return 0;
}
