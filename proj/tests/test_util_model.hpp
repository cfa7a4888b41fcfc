#pragma once

// Random model/data generator used by the gradient finite-difference checks
// in both the unit and acceptance suites.

#include <random>
#include <vector>

#include "mrp/model.hpp"

namespace mrp::test {

struct RandomFit {
  ModelSpec spec;
  std::vector<Observation> observations;
  std::vector<double> params;
};

inline RandomFit random_fit_config(std::mt19937_64& rng) {
  RandomFit out;
  std::uniform_int_distribution<int> n_factors(1, 3);
  std::uniform_int_distribution<int> n_levels(2, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<FactorSpec> factors;
  int nf = n_factors(rng);
  for (int f = 0; f < nf; ++f) {
    FactorSpec spec;
    spec.name = "f" + std::to_string(f);
    int nl = n_levels(rng);
    for (int l = 0; l < nl; ++l) spec.levels.push_back("l" + std::to_string(l));
    factors.push_back(std::move(spec));
  }
  out.spec.lattice = std::make_shared<const CellLattice>(std::move(factors));
  out.spec.include_party = unit(rng) < 0.5;
  for (std::size_t f = 0; f < out.spec.num_model_factors(); ++f) {
    out.spec.initial_variance.push_back(0.3 + 3.7 * unit(rng));
  }

  std::uniform_int_distribution<int> n_obs(20, 200);
  int n = n_obs(rng);
  for (int i = 0; i < n; ++i) {
    Observation o;
    o.cell = static_cast<std::uint32_t>(rng() % out.spec.lattice->size());
    o.party = out.spec.include_party ? static_cast<std::int16_t>(rng() % kNumParties)
                                     : std::int16_t{-1};
    o.y = static_cast<std::uint8_t>(unit(rng) < 0.5);
    out.observations.push_back(o);
  }

  ParamLayout layout = ParamLayout::of(out.spec);
  for (std::size_t i = 0; i < layout.total; ++i) {
    out.params.push_back(2.0 * unit(rng) - 1.0);
  }
  return out;
}

// Central finite differences of neg_log_posterior.
inline std::vector<double> fd_gradient(const RandomFit& cfg, double h = 1e-5) {
  std::vector<double> g(cfg.params.size());
  std::vector<double> x = cfg.params;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double keep = x[i];
    x[i] = keep + h;
    double up = neg_log_posterior(x, cfg.observations, cfg.spec);
    x[i] = keep - h;
    double down = neg_log_posterior(x, cfg.observations, cfg.spec);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double max_relative_gradient_error(const RandomFit& cfg) {
  std::vector<double> analytic = gradient(cfg.params, cfg.observations, cfg.spec);
  std::vector<double> numeric = fd_gradient(cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    double scale = std::max({1.0, std::abs(analytic[i]), std::abs(numeric[i])});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}

}  // namespace mrp::test
