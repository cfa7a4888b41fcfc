#include "mrp/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "mrp/csv.hpp"
#include "mrp/parallel.hpp"
#include "mrp/rng.hpp"

namespace mrp {

void BootstrapConfig::validate() const {
  if (replicates < 1) throw ValidationError("bootstrap replicates must be >= 1");
  if (!(percentile_lo > 0.0) || !(percentile_hi < 100.0) ||
      !(percentile_lo < percentile_hi)) {
    throw ValidationError("percentiles must satisfy 0 < lo < hi < 100");
  }
}

double percentile_sorted(std::span<const double> sorted, double pct) {
  if (sorted.empty()) throw ValidationError("percentile of empty sample");
  if (sorted.size() == 1) return sorted[0];
  double rank = pct / 100.0 * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

// Replicate-major matrix of per-day estimates; NaN marks MISSING.
std::vector<double> replicate_matrix(const Panel& panel, const SeriesFn& series_fn,
                                     const BootstrapConfig& cfg) {
  std::size_t n = panel.size();
  if (n == 0) throw ValidationError("cannot bootstrap an empty panel");
  std::size_t replicates = static_cast<std::size_t>(cfg.replicates);
  std::vector<double> estimates(replicates * kNumDays,
                                std::numeric_limits<double>::quiet_NaN());
  parallel_for(replicates, cfg.threads, [&](std::size_t r) {
    Rng rng(cfg.seed, RngDomain::Bootstrap, r);
    std::vector<std::uint32_t> resampled(n);
    for (std::size_t i = 0; i < n; ++i) {
      resampled[i] = static_cast<std::uint32_t>(rng.below(n));
    }
    EstimateSeries series = series_fn(panel, resampled);
    for (int t = 0; t < kNumDays; ++t) {
      const auto& day = series.days[static_cast<std::size_t>(t)];
      if (day.estimate) estimates[r * kNumDays + static_cast<std::size_t>(t)] = *day.estimate;
    }
  });
  return estimates;
}

BootstrapBands bands_from_matrix(std::span<const double> estimates,
                                 const BootstrapConfig& cfg) {
  std::size_t replicates = static_cast<std::size_t>(cfg.replicates);
  BootstrapBands bands;
  std::vector<double> sample;
  for (int t = 0; t < kNumDays; ++t) {
    sample.clear();
    for (std::size_t r = 0; r < replicates; ++r) {
      double v = estimates[r * kNumDays + static_cast<std::size_t>(t)];
      if (!std::isnan(v)) sample.push_back(v);
    }
    auto& day = bands.days[static_cast<std::size_t>(t)];
    day.replicates_present = static_cast<int>(sample.size());
    // Band is MISSING when more than half the replicates are MISSING.
    if (sample.size() * 2 < replicates) continue;
    std::sort(sample.begin(), sample.end());
    day.lo = percentile_sorted(sample, cfg.percentile_lo);
    day.hi = percentile_sorted(sample, cfg.percentile_hi);
  }
  return bands;
}

}  // namespace

BootstrapBands cluster_bootstrap(const Panel& panel, const SeriesFn& series_fn,
                                 const BootstrapConfig& cfg) {
  cfg.validate();
  return bands_from_matrix(replicate_matrix(panel, series_fn, cfg), cfg);
}

EstimateSeries with_bootstrap_bands(const Panel& panel, const SeriesFn& series_fn,
                                    const BootstrapConfig& cfg, std::ostream* replicate_dump) {
  cfg.validate();
  std::vector<std::uint32_t> all(panel.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
  EstimateSeries series = series_fn(panel, all);

  std::vector<double> estimates = replicate_matrix(panel, series_fn, cfg);
  if (replicate_dump) {
    *replicate_dump << "replicate,day,estimate\n";
    for (std::size_t r = 0; r < static_cast<std::size_t>(cfg.replicates); ++r) {
      for (int t = 0; t < kNumDays; ++t) {
        double v = estimates[r * kNumDays + static_cast<std::size_t>(t)];
        if (std::isnan(v)) continue;
        *replicate_dump << r << ',' << t << ',' << csv::format_double(v, 6) << '\n';
      }
    }
  }
  BootstrapBands bands = bands_from_matrix(estimates, cfg);

  for (int t = 0; t < kNumDays; ++t) {
    auto& day = series.days[static_cast<std::size_t>(t)];
    const auto& band = bands.days[static_cast<std::size_t>(t)];
    if (!band.lo || !day.estimate) continue;
    day.ci_lo_raw = band.lo;
    day.ci_hi_raw = band.hi;
    // Percentile bands need not straddle the point estimate; the displayed
    // band is clamped to include it, the raw interval stays recorded.
    day.ci_lo = std::min(*band.lo, *day.estimate);
    day.ci_hi = std::max(*band.hi, *day.estimate);
  }
  return series;
}

}  // namespace mrp
