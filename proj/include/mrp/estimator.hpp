#pragma once

#include <array>
#include <iosfwd>
#include <optional>

#include "mrp/model.hpp"
#include "mrp/weights.hpp"

namespace mrp {

enum class ModelKind { Demo, DemoParty };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view s);

struct DayEstimate {
  std::optional<double> estimate;  // MISSING when n_obs < min_n
  // Displayed band, clamped to include the point estimate.
  std::optional<double> ci_lo, ci_hi;
  // Percentile interval exactly as the bootstrap produced it.
  std::optional<double> ci_lo_raw, ci_hi_raw;
  int n_obs = 0;

  bool missing() const { return !estimate.has_value(); }
};

struct EstimateSeries {
  ModelKind kind = ModelKind::Demo;
  std::array<DayEstimate, kNumDays> days;
};

// Poststratification: sum of weight(cell) * prob(cell) over the weight
// table's lattice, compensated summation in canonical cell order.  A NaN
// probability on a positive-weight cell is an error.
double poststratify(std::span<const double> cell_probs, const WeightTable& weights);

struct SeriesOptions {
  int window = 4;
  std::size_t min_n = 100;
  WindowRule window_rule = WindowRule::LatestPerRespondent;
  int threads = 1;
  // Days outside [day_lo, day_hi] are left MISSING without computing.
  int day_lo = 0;
  int day_hi = kNumDays - 1;
};

// The daily poststratified two-party support series.  Per day: window_select
// -> two_party_subset -> fit_map -> predict every cell -> poststratify.  For
// ModelKind::DemoParty the weights must cover the party-extended lattice and
// the spec must include the party factor.  Deterministic for any thread
// count; NonConvergence is rethrown tagged with the day.
EstimateSeries daily_series(const Panel& panel, const ModelSpec& spec,
                            const WeightTable& weights, ModelKind kind,
                            const SeriesOptions& opts = {});
EstimateSeries daily_series(const Panel& panel, std::span<const std::uint32_t> respondents,
                            const ModelSpec& spec, const WeightTable& weights, ModelKind kind,
                            const SeriesOptions& opts = {});

// The share of major-party identifiers who are Democrats, among respondents
// responding in each window, adjusted for demographics.  Measures who
// responds, not vote intent.  The spec must be a demographics-only model and
// the weights demographic.
EstimateSeries partisan_share_series(const Panel& panel, const ModelSpec& spec,
                                     const WeightTable& weights,
                                     const SeriesOptions& opts = {});
EstimateSeries partisan_share_series(const Panel& panel,
                                     std::span<const std::uint32_t> respondents,
                                     const ModelSpec& spec, const WeightTable& weights,
                                     const SeriesOptions& opts = {});

// Series CSV: day,model_kind,estimate,ci_lo,ci_hi,n_obs with empty fields
// for MISSING and 6-decimal probabilities.
void write_series_csv(std::ostream& out, std::span<const EstimateSeries> series);
std::vector<EstimateSeries> read_series_csv(std::istream& in, const std::string& name);

}  // namespace mrp
