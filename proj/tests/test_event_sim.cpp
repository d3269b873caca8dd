#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>

#include "sara/analytic.hpp"
#include "sara/event_sim.hpp"

using namespace sara;

TEST_CASE("fold latency examples", "[event_sim]") {
  CHECK(simulate_fold({1, 1, 1}, Dataflow::OS).cycles == 2);
  CHECK(simulate_fold({2, 2, 3}, Dataflow::OS).cycles == 7);
  CHECK(simulate_fold({2, 2, 3}, Dataflow::WS).cycles == 7);
  CHECK(simulate_fold({2, 2, 3}, Dataflow::IS).cycles == 7);
}

TEST_CASE("event simulation matches the closed form exhaustively", "[event_sim][property]") {
  int cases = 0;
  for (Dataflow df : kAllDataflows) {
    for (Count r = 1; r <= 8; ++r) {
      for (Count c = 1; c <= 8; ++c) {
        for (Count t = 1; t <= 12; ++t) {
          const auto trace = simulate_fold({r, c, t}, df);
          INFO(to_string(df) << " R'=" << r << " C'=" << c << " T=" << t);
          REQUIRE(trace.cycles == 2 * r + c + t - 2);
          REQUIRE(trace.mac_fires == r * c * t);
          ++cases;
        }
      }
    }
  }
  CHECK(cases == 2304);
}

TEST_CASE("injection and drain counts", "[event_sim]") {
  const auto os = simulate_fold({3, 5, 7}, Dataflow::OS);
  CHECK(os.reads_row_operand == 3 * 7);
  CHECK(os.reads_col_operand == 5 * 7);
  CHECK(os.outputs_drained == 3 * 5);

  const auto ws = simulate_fold({3, 5, 7}, Dataflow::WS);
  CHECK(ws.reads_row_operand == 3 * 7);
  CHECK(ws.reads_col_operand == 3 * 5);
  CHECK(ws.outputs_drained == 5 * 7);
}

TEST_CASE("each operand element reaches exactly the MACs on its path", "[event_sim]") {
  EventSimOptions opts;
  opts.record_events = true;
  for (Dataflow df : kAllDataflows) {
    for (Count r = 1; r <= 4; ++r) {
      for (Count c = 1; c <= 4; ++c) {
        const Count t_len = 3;
        const auto trace = simulate_fold({r, c, t_len}, df, opts);
        // (row, token) -> columns whose MAC consumed the row-injected element.
        std::map<std::pair<Count, Count>, std::vector<Count>> row_use;
        std::map<std::pair<Count, Count>, std::vector<Count>> col_use;
        for (const auto& e : trace.events) {
          if (e.kind != FoldEventKind::Mac) continue;
          row_use[{e.row, e.token}].push_back(e.col);
          col_use[{e.col, e.token}].push_back(e.row);
        }
        INFO(to_string(df) << " " << r << "x" << c);
        REQUIRE(static_cast<Count>(row_use.size()) == r * t_len);
        for (const auto& [key, cols] : row_use) {
          REQUIRE(static_cast<Count>(cols.size()) == c);
          for (Count j = 0; j < c; ++j) REQUIRE(cols[static_cast<std::size_t>(j)] == j);
        }
        for (const auto& [key, rows] : col_use) {
          REQUIRE(static_cast<Count>(rows.size()) == r);
        }
      }
    }
  }
}

TEST_CASE("output-stationary drain order is bottom row first", "[event_sim]") {
  EventSimOptions opts;
  opts.record_events = true;
  const auto trace = simulate_fold({4, 3, 2}, Dataflow::OS, opts);
  std::map<Count, std::vector<std::pair<Count, Count>>> per_col;  // col -> (cycle, row)
  for (const auto& e : trace.events) {
    if (e.kind == FoldEventKind::Drain) per_col[e.col].push_back({e.cycle, e.row});
  }
  REQUIRE(per_col.size() == 3);
  for (const auto& [col, drains] : per_col) {
    REQUIRE(drains.size() == 4);
    for (std::size_t i = 0; i < drains.size(); ++i) {
      CHECK(drains[i].second == 3 - static_cast<Count>(i));
      if (i > 0) CHECK(drains[i].first == drains[i - 1].first + 1);
    }
  }
  CHECK(trace.outputs_drained == 12);
}

TEST_CASE("weight-stationary preload overlaps streaming by one cycle", "[event_sim]") {
  EventSimOptions opts;
  opts.record_events = true;
  const Count rows = 3;
  const auto trace = simulate_fold({rows, 2, 2}, Dataflow::WS, opts);
  Count last_preload = -1, first_inject = -1;
  for (const auto& e : trace.events) {
    if (e.kind == FoldEventKind::Preload) last_preload = std::max(last_preload, e.cycle);
    if (e.kind == FoldEventKind::InjectRow && first_inject < 0) first_inject = e.cycle;
  }
  CHECK(last_preload == rows - 1);
  CHECK(first_inject == rows - 1);
}

TEST_CASE("safety bound and invalid specs", "[event_sim]") {
  CHECK_THROWS_AS(simulate_fold({65, 1, 1}, Dataflow::OS), ValidationError);
  CHECK_THROWS_AS(simulate_fold({1, 1, 4097}, Dataflow::WS), ValidationError);
  CHECK_THROWS_AS(simulate_fold({0, 1, 1}, Dataflow::OS), ValidationError);
  EventSimOptions wide;
  wide.limits.max_rows = 128;
  CHECK(simulate_fold({65, 1, 1}, Dataflow::OS, wide).cycles == 2 * 65 + 1 + 1 - 2);
}

TEST_CASE("event log CSV", "[event_sim]") {
  EventSimOptions opts;
  opts.record_events = true;
  const auto trace = simulate_fold({1, 1, 1}, Dataflow::OS, opts);
  std::ostringstream os;
  write_event_csv(os, trace);
  CHECK(os.str() ==
        "cycle,unit_row,unit_col,event\n"
        "0,0,0,inject_row\n"
        "0,0,0,inject_col\n"
        "0,0,0,mac\n"
        "1,0,0,drain\n");
}
