#pragma once

// Cycle-stepped model of one fold on a single systolic sub-array. It moves
// individual operand tokens through the neighbour links and is only meant
// for small instances, where it serves as the reference for the closed-form
// latency and traffic model in analytic.hpp.
//
// Timing contract (all three dataflows): a fold with R' used rows, C' used
// columns and a temporal stream of length T takes 2R' + C' + T - 2 cycles,
// counted from the first injection to the last output exit, inclusive.
//
// OS   Row-operand element (i,t) enters row i at cycle t+i and moves one
//      column right per cycle; column-operand element (t,j) enters column j
//      at cycle t+j and moves one row down per cycle. MAC(i,j) therefore
//      fires at t+i+j. Once MAC(R'-1,j) has fired T times, column j drains
//      one result per cycle starting on the next cycle, bottom row first.
//
// WS/IS The stationary operand is preloaded top-down through the columns:
//      the value for row d enters row 0 at cycle R'-1-d, so every row has its
//      value latched at cycle R'-1. Streaming overlaps the last preload cycle
//      by exactly one cycle: streamed element (i,t) enters row i at cycle
//      R'-1+t+i, and a value latched in cycle c is usable by a MAC in cycle c.
//      Partial sums move down one row per cycle and leave the bottom of the
//      column one cycle after MAC(R'-1,j) fires.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sara/types.hpp"

namespace sara {

struct FoldSpec {
  Count used_rows = 1;     // R'
  Count used_cols = 1;     // C'
  Count temporal_len = 1;  // T
};

enum class FoldEventKind : std::uint8_t { InjectRow, InjectCol, Preload, Mac, Drain };

constexpr std::string_view to_string(FoldEventKind k) {
  switch (k) {
    case FoldEventKind::InjectRow: return "inject_row";
    case FoldEventKind::InjectCol: return "inject_col";
    case FoldEventKind::Preload: return "preload";
    case FoldEventKind::Mac: return "mac";
    case FoldEventKind::Drain: return "drain";
  }
  return "?";
}

struct FoldEvent {
  Count cycle = 0;
  Count row = 0;
  Count col = 0;
  FoldEventKind kind = FoldEventKind::Mac;
  Count token = 0;  // temporal index of the element involved
};

/// For OS the row operand is the left-injected stream and the column operand
/// the top-injected stream. For WS/IS the row operand is the streamed operand
/// and the column operand is the stationary one.
struct FoldTrace {
  Count cycles = 0;
  Count reads_row_operand = 0;
  Count reads_col_operand = 0;
  Count outputs_drained = 0;
  Count mac_fires = 0;
  std::vector<FoldEvent> events;  // filled only when requested
};

struct EventSimLimits {
  Count max_rows = 64;
  Count max_cols = 64;
  Count max_temporal = 4096;
};

struct EventSimOptions {
  bool record_events = false;
  std::size_t max_events = 1u << 20;
  EventSimLimits limits{};
};

namespace detail {

class FoldRecorder {
 public:
  FoldRecorder(FoldTrace& trace, const EventSimOptions& opts) : trace_(trace), opts_(opts) {}

  void operator()(Count cycle, Count row, Count col, FoldEventKind kind, Count token) {
    last_cycle_ = std::max(last_cycle_, cycle);
    switch (kind) {
      case FoldEventKind::InjectRow: ++trace_.reads_row_operand; break;
      case FoldEventKind::InjectCol:
      case FoldEventKind::Preload: ++trace_.reads_col_operand; break;
      case FoldEventKind::Mac: ++trace_.mac_fires; break;
      case FoldEventKind::Drain: ++trace_.outputs_drained; break;
    }
    if (opts_.record_events && trace_.events.size() < opts_.max_events) {
      trace_.events.push_back({cycle, row, col, kind, token});
    }
  }

  Count last_cycle() const { return last_cycle_; }

 private:
  FoldTrace& trace_;
  const EventSimOptions& opts_;
  Count last_cycle_ = -1;
};

using TokenGrid = std::vector<std::vector<std::optional<Count>>>;

inline TokenGrid make_grid(Count rows, Count cols) {
  return TokenGrid(static_cast<std::size_t>(rows),
                   std::vector<std::optional<Count>>(static_cast<std::size_t>(cols)));
}

inline void check(bool ok, const char* what) {
  if (!ok) throw Error(std::string("event simulation invariant violated: ") + what);
}

inline FoldTrace simulate_output_stationary(const FoldSpec& s, const EventSimOptions& opts) {
  const Count R = s.used_rows, C = s.used_cols, T = s.temporal_len;
  FoldTrace trace;
  FoldRecorder rec(trace, opts);
  auto horiz = make_grid(R, C);
  auto vert = make_grid(R, C);
  std::vector<std::vector<Count>> acc(static_cast<std::size_t>(R),
                                      std::vector<Count>(static_cast<std::size_t>(C), 0));
  // Rows still waiting to leave each column, bottom first, once draining begins.
  std::vector<std::deque<Count>> drain(static_cast<std::size_t>(C));
  std::vector<bool> draining(static_cast<std::size_t>(C), false);
  Count drained_cols = 0;

  for (Count cycle = 0; drained_cols < C; ++cycle) {
    for (Count j = 0; j < C; ++j) {
      auto& q = drain[static_cast<std::size_t>(j)];
      if (draining[static_cast<std::size_t>(j)] && !q.empty()) {
        rec(cycle, q.front(), j, FoldEventKind::Drain, q.front());
        q.pop_front();
        if (q.empty()) ++drained_cols;
      }
    }

    for (Count i = 0; i < R; ++i) {
      auto& row = horiz[static_cast<std::size_t>(i)];
      for (Count j = C - 1; j > 0; --j) row[static_cast<std::size_t>(j)] = row[static_cast<std::size_t>(j - 1)];
      const Count t = cycle - i;
      row[0] = (t >= 0 && t < T) ? std::optional<Count>(t) : std::nullopt;
      if (row[0]) rec(cycle, i, 0, FoldEventKind::InjectRow, t);
    }
    for (Count j = 0; j < C; ++j) {
      for (Count i = R - 1; i > 0; --i) {
        vert[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            vert[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
      }
      const Count t = cycle - j;
      auto& top = vert[0][static_cast<std::size_t>(j)];
      top = (t >= 0 && t < T) ? std::optional<Count>(t) : std::nullopt;
      if (top) rec(cycle, 0, j, FoldEventKind::InjectCol, t);
    }

    for (Count i = 0; i < R; ++i) {
      for (Count j = 0; j < C; ++j) {
        const auto& a = horiz[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        const auto& b = vert[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        check(a.has_value() == b.has_value(), "operands arrive at a MAC out of step");
        if (!a) continue;
        check(*a == *b, "mismatched temporal indices meet at a MAC");
        rec(cycle, i, j, FoldEventKind::Mac, *a);
        ++acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    }

    for (Count j = 0; j < C; ++j) {
      if (!draining[static_cast<std::size_t>(j)] &&
          acc[static_cast<std::size_t>(R - 1)][static_cast<std::size_t>(j)] == T) {
        for (Count i = 0; i < R; ++i) {
          check(acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == T,
                "column drains before every MAC finished");
        }
        draining[static_cast<std::size_t>(j)] = true;
        for (Count i = R - 1; i >= 0; --i) drain[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  }
  trace.cycles = rec.last_cycle() + 1;
  return trace;
}

// Shared by WS and IS, which differ only in which GEMM operand is pinned.
inline FoldTrace simulate_stationary(const FoldSpec& s, const EventSimOptions& opts) {
  const Count R = s.used_rows, C = s.used_cols, T = s.temporal_len;
  FoldTrace trace;
  FoldRecorder rec(trace, opts);

  // Preload: entries are tagged with their destination row and latch there.
  auto moving = make_grid(R, C);
  std::vector<std::vector<bool>> latched(static_cast<std::size_t>(R),
                                         std::vector<bool>(static_cast<std::size_t>(C), false));
  auto horiz = make_grid(R, C);
  auto psum = make_grid(R, C);
  const Count stream_start = R - 1;
  const Count last_exit = stream_start + (T - 1) + (R - 1) + (C - 1) + 1;

  for (Count cycle = 0; cycle <= last_exit; ++cycle) {
    // Partial sums resident in the bottom row last cycle leave the array now.
    for (Count j = 0; j < C; ++j) {
      if (auto t = psum[static_cast<std::size_t>(R - 1)][static_cast<std::size_t>(j)]) {
        rec(cycle, R - 1, j, FoldEventKind::Drain, *t);
      }
    }

    for (Count j = 0; j < C; ++j) {
      for (Count i = R - 1; i > 0; --i) {
        auto& below = moving[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        auto& above = moving[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
        if (above && *above >= i && !below) {
          below = above;
          above.reset();
        }
      }
      const Count dest = R - 1 - cycle;
      if (dest >= 0) {
        check(!moving[0][static_cast<std::size_t>(j)], "preload collision");
        moving[0][static_cast<std::size_t>(j)] = dest;
        rec(cycle, 0, j, FoldEventKind::Preload, dest);
      }
      for (Count i = 0; i < R; ++i) {
        auto& slot = moving[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        if (slot && *slot == i) {
          latched[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = true;
          slot.reset();
        }
      }
    }

    for (Count i = 0; i < R; ++i) {
      auto& row = horiz[static_cast<std::size_t>(i)];
      for (Count j = C - 1; j > 0; --j) row[static_cast<std::size_t>(j)] = row[static_cast<std::size_t>(j - 1)];
      const Count t = cycle - stream_start - i;
      row[0] = (t >= 0 && t < T) ? std::optional<Count>(t) : std::nullopt;
      if (row[0]) rec(cycle, i, 0, FoldEventKind::InjectRow, t);
    }

    auto next_psum = make_grid(R, C);
    for (Count i = 0; i < R; ++i) {
      for (Count j = 0; j < C; ++j) {
        const auto& x = horiz[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        if (!x) continue;
        check(latched[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
              "streamed operand reaches a MAC before its stationary value");
        if (i > 0) {
          const auto& incoming = psum[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
          check(incoming && *incoming == *x, "partial sum out of step with streamed operand");
        }
        rec(cycle, i, j, FoldEventKind::Mac, *x);
        next_psum[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = *x;
      }
    }
    psum = std::move(next_psum);
  }
  trace.cycles = rec.last_cycle() + 1;
  return trace;
}

}  // namespace detail

inline FoldTrace simulate_fold(const FoldSpec& spec, Dataflow df, const EventSimOptions& opts = {}) {
  if (spec.used_rows < 1 || spec.used_cols < 1 || spec.temporal_len < 1) {
    throw ValidationError("fold dimensions must be >= 1");
  }
  const auto& lim = opts.limits;
  if (spec.used_rows > lim.max_rows || spec.used_cols > lim.max_cols ||
      spec.temporal_len > lim.max_temporal) {
    throw ValidationError("fold " + std::to_string(spec.used_rows) + "x" +
                          std::to_string(spec.used_cols) + " T=" +
                          std::to_string(spec.temporal_len) +
                          " exceeds the event simulator's safety bound");
  }
  return df == Dataflow::OS ? detail::simulate_output_stationary(spec, opts)
                            : detail::simulate_stationary(spec, opts);
}

inline void write_event_csv(std::ostream& os, const FoldTrace& trace) {
  os << "cycle,unit_row,unit_col,event\n";
  for (const auto& e : trace.events) {
    os << e.cycle << ',' << e.row << ',' << e.col << ',' << to_string(e.kind) << '\n';
  }
}

}  // namespace sara
