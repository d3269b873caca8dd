#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "sara/analytic.hpp"
#include "sara/config_space.hpp"
#include "sara/rng.hpp"

using namespace sara;
using Catch::Approx;

TEST_CASE("gemm_cycles examples", "[analytic]") {
  CHECK(gemm_cycles({1, 1, 1}, 1, 1, Dataflow::OS) == 2);
  CHECK(gemm_cycles({5, 3, 4}, 2, 2, Dataflow::OS) == 41);
  CHECK(gemm_cycles({256, 256, 64}, 128, 128, Dataflow::OS) == 1784);
  CHECK(gemm_cycles({256, 256, 64}, 128, 128, Dataflow::OS, 5) == 1789);
}

TEST_CASE("gemm_cycles examples agree with event-simulated folds", "[analytic][oracle]") {
  CHECK(testing::event_sim_gemm({5, 3, 4}, 2, 2, Dataflow::OS).cycles == 41);
  // Scaled-down analogue of the 256x256x64 on 128x128 case.
  const GemmWorkload scaled{32, 32, 8};
  const auto sim = testing::event_sim_gemm(scaled, 16, 16, Dataflow::OS);
  CHECK(sim.cycles == gemm_cycles(scaled, 16, 16, Dataflow::OS));
  CHECK(sim.cycles == 4 * (2 * 16 + 16 + 8 - 2));
}

TEST_CASE("gemm_reads examples", "[analytic]") {
  CHECK(gemm_reads({5, 3, 4}, 2, 2, Dataflow::OS) == GemmTraffic{40, 36, 0, 15});
  for (Dataflow df : kAllDataflows) {
    const auto t = gemm_reads({1, 1, 1}, 1, 1, df);
    CHECK(t.reads_a == 1);
    CHECK(t.reads_b == 1);
  }
  const auto big = gemm_reads({256, 256, 64}, 128, 128, Dataflow::OS);
  CHECK(big.reads_a == 32768);
  CHECK(big.reads_b == 32768);
  CHECK(big.reads_a + big.reads_b == 2 * min_reads({256, 256, 64}));

  CHECK(testing::event_sim_gemm({5, 3, 4}, 2, 2, Dataflow::OS).traffic == GemmTraffic{40, 36, 0, 15});
}

TEST_CASE("min_reads", "[analytic]") {
  CHECK(min_reads({1, 1, 1}) == 2);
  CHECK(min_reads({256, 256, 64}) == 32768);
  CHECK(min_reads({5, 3, 4}) == 32);
}

TEST_CASE("closed forms equal event-simulated fold sums", "[analytic][oracle][property]") {
  // Sampled here; the acceptance suite runs the full cube.
  Rng rng(7);
  for (int trial = 0; trial < 400; ++trial) {
    const GemmWorkload w{rng.uniform_int(1, 12), rng.uniform_int(1, 12), rng.uniform_int(1, 12)};
    const Count rows = rng.uniform_int(1, 8), cols = rng.uniform_int(1, 8);
    for (Dataflow df : kAllDataflows) {
      const auto sim = testing::event_sim_gemm(w, rows, cols, df);
      INFO(w.m << "x" << w.n << "x" << w.k << " on " << rows << "x" << cols << " " << to_string(df));
      REQUIRE(gemm_cycles(w, rows, cols, df) == sim.cycles);
      REQUIRE(gemm_reads(w, rows, cols, df) == sim.traffic);
    }
  }
}

TEST_CASE("operand reads never beat the theoretical minimum", "[analytic][property]") {
  Rng rng(11);
  for (int trial = 0; trial < 5000; ++trial) {
    const GemmWorkload w{rng.uniform_int(1, 2000), rng.uniform_int(1, 2000), rng.uniform_int(1, 2000)};
    const Count rows = rng.uniform_int(1, 256), cols = rng.uniform_int(1, 256);
    const auto df = kAllDataflows[rng.below(3)];
    const auto t = gemm_reads(w, rows, cols, df);
    REQUIRE(t.reads_a + t.reads_b >= min_reads(w));
    REQUIRE(t.reads_out >= 0);
  }
}

TEST_CASE("cycles are non-increasing on the divisor lattice", "[analytic][property]") {
  // Array dimensions dividing the mapped dimension, ordered by divisibility.
  for (Dataflow df : kAllDataflows) {
    for (const GemmWorkload w : {GemmWorkload{64, 32, 16}, GemmWorkload{48, 96, 24}, GemmWorkload{128, 128, 128}}) {
      const auto d = mapped_dims(w, df);
      for (Count r1 = 1; r1 <= d.rows; ++r1) {
        if (d.rows % r1) continue;
        for (Count r2 = r1; r2 <= d.rows; r2 += r1) {
          if (d.rows % r2) continue;
          for (Count c = 1; c <= d.cols; ++c) {
            if (d.cols % c) continue;
            REQUIRE(gemm_cycles(w, r2, c, df) <= gemm_cycles(w, r1, c, df));
            for (Count c2 = c; c2 <= d.cols; c2 += c) {
              if (d.cols % c2) continue;
              REQUIRE(gemm_cycles(w, r1, c2, df) <= gemm_cycles(w, r1, c, df));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("energy and EDP", "[analytic]") {
  const EnergyParams defaults;
  const auto r = simulate_monolithic({1, 1, 1}, 1, 1, Dataflow::OS, defaults);
  CHECK(r.energy == Approx(13.1).epsilon(1e-12));
  CHECK(edp(r.energy, r.cycles) == Approx(26.2).epsilon(1e-12));

  const EnergyParams no_leak{1.0, 4.0, 4.0, 0.0};
  CHECK(energy(GemmTraffic{}, 0, no_leak, 16, 100) == 0.0);

  const GemmTraffic t{10, 20, 3, 7};
  const double e1 = energy(t, 50, defaults, 64, 100);
  const double e2 = energy(t, 50, defaults, 64, 200);
  CHECK(e2 - e1 == Approx(defaults.p_leak * 64 * 100));

  CHECK(edp(0.0, 1234) == 0.0);
  CHECK(edp(2.0, 10) < edp(3.0, 10));
  CHECK(edp(2.0, 10) < edp(2.0, 11));
}

TEST_CASE("utilization stays within [0, 1]", "[analytic][property]") {
  Rng rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const GemmWorkload w{rng.uniform_int(1, 500), rng.uniform_int(1, 500), rng.uniform_int(1, 500)};
    const Count rows = rng.uniform_int(1, 64), cols = rng.uniform_int(1, 64);
    const auto r = simulate_monolithic(w, rows, cols, kAllDataflows[rng.below(3)], {});
    REQUIRE(r.utilization > 0.0);
    REQUIRE(r.utilization <= 1.0);
    REQUIRE(r.mac_ops == w.m * w.n * w.k);
  }
  CHECK(utilization(10, 4, 0) == 0.0);
}

TEST_CASE("dataflow mappings", "[analytic]") {
  const GemmWorkload w{2, 3, 5};
  CHECK(mapped_dims(w, Dataflow::OS).rows == 2);
  CHECK(mapped_dims(w, Dataflow::OS).temporal == 5);
  CHECK(mapped_dims(w, Dataflow::WS).rows == 5);
  CHECK(mapped_dims(w, Dataflow::WS).temporal == 2);
  CHECK(mapped_dims(w, Dataflow::IS).cols == 2);
  CHECK(mapped_dims(w, Dataflow::IS).temporal == 3);
}
