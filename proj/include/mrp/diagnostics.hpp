#pragma once

#include <array>
#include <iosfwd>

#include "mrp/estimator.hpp"

namespace mrp {

// Intent transitions between two non-overlapping windows, counted over the
// respondents that have a selected response in both.
struct TransitionMatrix {
  std::array<std::array<std::size_t, kNumIntents>, kNumIntents> counts{};  // [before][after]
  std::size_t respondents_before = 0;
  std::size_t respondents_after = 0;
  std::size_t respondents_both = 0;

  std::size_t count(Intent before, Intent after) const {
    return counts[static_cast<std::size_t>(before)][static_cast<std::size_t>(after)];
  }
};

// before = (t, w) covers [t-w+1, t]; after = (t_after, w_after).  Windows
// must not overlap: t < t_after - w_after + 1.
TransitionMatrix transition_matrix(const Panel& panel, int t_before, int w_before,
                                   int t_after, int w_after);

void write_transition_csv(std::ostream& out, const TransitionMatrix& m);

struct SwingStats {
  double drop = 0.0;             // estimate(t0) - estimate(t1)
  double total_variation = 0.0;  // over all non-MISSING adjacent day pairs
};

SwingStats swing_stats(const EstimateSeries& series, int t0, int t1);

// Total variation of two series restricted to calendar-adjacent day pairs
// that are non-MISSING in both; the ratio is +infinity when the party series
// is exactly flat on the common days.
struct SwingComparison {
  double tv_demo = 0.0;
  double tv_party = 0.0;
  double ratio = 0.0;
  bool infinite() const;
};

SwingComparison swing_reduction(const EstimateSeries& demo, const EstimateSeries& party);

}  // namespace mrp
