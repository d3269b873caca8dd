#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "sara/oracle_search.hpp"

using namespace sara;

// Row folds per partition are ceil(ceil(D/g)/r) = ceil(D/(g*r)) = ceil(D/R),
// the same for every uniform tiling, so the finest tiling always has the
// smallest fill and drain terms. This pins that property directly.
TEST_CASE("fold count per tile does not depend on the tiling", "[oracle_search][labels]") {
  const ConfigSpace space({64, 64, 4});
  Rng rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const GemmWorkload w{rng.uniform_int(1, 1024), rng.uniform_int(1, 1024), rng.uniform_int(1, 1024)};
    for (const auto& cfg : space) {
      const auto mp = mapping_for(cfg.dataflow);
      const auto tile = partition_workload(w, cfg).tiles.front().chunk;
      REQUIRE(ceil_div(dim_of(tile, mp.row_dim), cfg.part_rows) == ceil_div(dim_of(w, mp.row_dim), 64));
      REQUIRE(ceil_div(dim_of(tile, mp.col_dim), cfg.part_cols) == ceil_div(dim_of(w, mp.col_dim), 64));
    }
  }
}

TEST_CASE("desk-scale labels use at least five classes", "[oracle_search][labels]") {
  DatasetSpec spec;
  spec.sample_count = 50'000;
  spec.dim_max = 1024;
  spec.geometry = {64, 64, 4};
  const auto samples = gen_dataset(spec);
  std::map<ClassId, Count> histogram;
  for (const auto& s : samples) ++histogram[s.class_id];
  for (const auto& [id, n] : histogram) UNSCOPED_INFO("class " << id << ": " << n);
  CHECK(histogram.size() >= 5);
}
