#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>

#include "mrp/estimator.hpp"

namespace mrp {

struct BootstrapConfig {
  int replicates = 200;
  std::uint64_t seed = 0;
  double percentile_lo = 2.5;
  double percentile_hi = 97.5;
  int threads = 1;

  void validate() const;
};

// A deterministic map from a multiset of respondent indices to a series.
using SeriesFn =
    std::function<EstimateSeries(const Panel&, std::span<const std::uint32_t>)>;

struct BootstrapBands {
  struct Day {
    std::optional<double> lo, hi;  // raw percentile interval
    int replicates_present = 0;    // replicates with a non-MISSING estimate
  };
  std::array<Day, kNumDays> days;
};

// Cluster bootstrap over respondents: each replicate resamples whole
// respondents with replacement (all their responses carried along) using an
// independent RNG substream derived from (seed, replicate), recomputes the
// series, and the band per day is the percentile interval over replicate
// estimates.  Days where more than half the replicates are MISSING get a
// MISSING band.  Replicates may run on several threads; the result is
// bitwise identical for any thread count.
BootstrapBands cluster_bootstrap(const Panel& panel, const SeriesFn& series_fn,
                                 const BootstrapConfig& cfg);

// Convenience: computes the point series, bootstraps it, and attaches bands.
// The displayed band is clamped to include the point estimate; the raw
// percentile interval is kept alongside.  When `replicate_dump` is non-null,
// every replicate estimate is written as CSV `replicate,day,estimate`.
EstimateSeries with_bootstrap_bands(const Panel& panel, const SeriesFn& series_fn,
                                    const BootstrapConfig& cfg,
                                    std::ostream* replicate_dump = nullptr);

// Linear-interpolation percentile (R type 7) of a sorted sample.
double percentile_sorted(std::span<const double> sorted, double pct);

}  // namespace mrp
