#include "mrp/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace mrp {

TransitionMatrix transition_matrix(const Panel& panel, int t_before, int w_before,
                                   int t_after, int w_after) {
  if (t_before >= t_after - w_after + 1) {
    throw ValidationError("transition windows overlap: before ends at day " +
                          std::to_string(t_before) + ", after starts at day " +
                          std::to_string(t_after - w_after + 1));
  }
  ResponseSet before = window_select(panel, t_before, w_before);
  ResponseSet after = window_select(panel, t_after, w_after);

  std::vector<std::int8_t> before_intent(panel.size(), -1);
  for (const auto& s : before.selected) {
    before_intent[s.respondent] = static_cast<std::int8_t>(s.intent);
  }

  TransitionMatrix m;
  m.respondents_before = before.selected.size();
  m.respondents_after = after.selected.size();
  for (const auto& s : after.selected) {
    std::int8_t b = before_intent[s.respondent];
    if (b < 0) continue;
    ++m.counts[static_cast<std::size_t>(b)][static_cast<std::size_t>(s.intent)];
    ++m.respondents_both;
  }
  return m;
}

void write_transition_csv(std::ostream& out, const TransitionMatrix& m) {
  out << "before\\after";
  for (int a = 0; a < kNumIntents; ++a) out << ',' << to_string(static_cast<Intent>(a));
  out << '\n';
  for (int b = 0; b < kNumIntents; ++b) {
    out << to_string(static_cast<Intent>(b));
    for (int a = 0; a < kNumIntents; ++a) {
      out << ',' << m.counts[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
    }
    out << '\n';
  }
}

SwingStats swing_stats(const EstimateSeries& series, int t0, int t1) {
  if (t0 < 0 || t0 >= kNumDays || t1 < 0 || t1 >= kNumDays) {
    throw ValidationError("swing_stats day out of range");
  }
  const auto& d0 = series.days[static_cast<std::size_t>(t0)];
  const auto& d1 = series.days[static_cast<std::size_t>(t1)];
  if (!d0.estimate || !d1.estimate) {
    throw ValidationError("swing_stats endpoints must be non-MISSING");
  }
  SwingStats stats;
  stats.drop = *d0.estimate - *d1.estimate;
  for (int t = 0; t + 1 < kNumDays; ++t) {
    const auto& a = series.days[static_cast<std::size_t>(t)];
    const auto& b = series.days[static_cast<std::size_t>(t + 1)];
    if (a.estimate && b.estimate) stats.total_variation += std::abs(*b.estimate - *a.estimate);
  }
  return stats;
}

bool SwingComparison::infinite() const { return std::isinf(ratio); }

SwingComparison swing_reduction(const EstimateSeries& demo, const EstimateSeries& party) {
  SwingComparison cmp;
  int pairs = 0;
  for (int t = 0; t + 1 < kNumDays; ++t) {
    const auto& da = demo.days[static_cast<std::size_t>(t)];
    const auto& db = demo.days[static_cast<std::size_t>(t + 1)];
    const auto& pa = party.days[static_cast<std::size_t>(t)];
    const auto& pb = party.days[static_cast<std::size_t>(t + 1)];
    if (!da.estimate || !db.estimate || !pa.estimate || !pb.estimate) continue;
    cmp.tv_demo += std::abs(*db.estimate - *da.estimate);
    cmp.tv_party += std::abs(*pb.estimate - *pa.estimate);
    ++pairs;
  }
  if (pairs == 0) {
    throw ValidationError("series share no adjacent non-MISSING day pairs");
  }
  cmp.ratio = cmp.tv_party == 0.0 ? std::numeric_limits<double>::infinity()
                                  : cmp.tv_demo / cmp.tv_party;
  return cmp;
}

}  // namespace mrp
