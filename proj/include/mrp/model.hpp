#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrp/panel.hpp"

namespace mrp {

// Hierarchical logistic regression over the cell lattice: additive per-factor
// effects with Gaussian priors, fitted by penalized maximum likelihood with
// empirical-Bayes variance updates.  Sparse cells borrow strength through the
// shared factor-level priors.
struct ModelSpec {
  LatticePtr lattice;
  bool include_party = false;

  // Initial prior variance per model factor (demographic factors in lattice
  // order, then party when included).  Empty means 1.0 everywhere.
  std::vector<double> initial_variance;
  double intercept_variance = 100.0;

  double grad_tolerance = 1e-6;   // inner stop: gradient inf-norm
  int max_inner_iterations = 500;
  int max_outer_iterations = 10;
  double variance_floor = 1e-4;
  double variance_cap = 25.0;
  double outer_tolerance = 1e-4;  // outer stop: max variance change

  std::size_t num_model_factors() const {
    return lattice->num_factors() + (include_party ? 1 : 0);
  }
  // Level count of model factor f (the party factor has kNumParties levels).
  std::size_t factor_levels(std::size_t f) const {
    return f < lattice->num_factors() ? lattice->factor(f).levels.size()
                                      : static_cast<std::size_t>(kNumParties);
  }
  std::string factor_name(std::size_t f) const {
    return f < lattice->num_factors() ? lattice->factor(f).name : std::string(kPartyFactorName);
  }

  void validate() const;
};

// Flat parameter vector layout: [intercept, factor 0 effects, factor 1
// effects, ...]; the party factor, when present, comes last.
struct ParamLayout {
  std::vector<std::size_t> offset;  // into the flat vector, per factor
  std::vector<std::size_t> levels;
  std::size_t total = 0;

  static ParamLayout of(const ModelSpec& spec);
};

struct ConvergenceReport {
  bool converged = false;
  int outer_iterations = 0;
  int inner_iterations = 0;  // total Newton steps across outer rounds
  double grad_inf_norm = 0.0;
};

class FittedModel {
 public:
  FittedModel(const ModelSpec& spec, double intercept,
              std::vector<std::vector<double>> effects, std::vector<double> variance,
              ConvergenceReport convergence);

  double intercept() const { return intercept_; }
  std::span<const double> effects(std::size_t f) const { return effects_[f]; }
  double variance(std::size_t f) const { return variance_[f]; }
  std::size_t num_factors() const { return effects_.size(); }
  bool include_party() const { return include_party_; }
  const ConvergenceReport& convergence() const { return convergence_; }
  const LatticePtr& lattice() const { return lattice_; }

  // Support probability for a demographic cell (plus party when the model
  // includes it).  Defined for every cell; strictly inside (0, 1).
  double predict(std::size_t cell_position, std::optional<Party> party = std::nullopt) const;

  // Probabilities for all cells: demographic lattice order, or, for a party
  // model, the party-extended lattice order (cell-major, party minor).
  std::vector<double> predict_all() const;

  std::string to_json() const;
  static FittedModel from_json(const std::string& text);

 private:
  FittedModel() = default;

  LatticePtr lattice_;
  bool include_party_ = false;
  double intercept_ = 0.0;
  double intercept_variance_ = 100.0;
  std::vector<std::string> factor_names_;
  std::vector<std::vector<double>> effects_;
  std::vector<double> variance_;
  ConvergenceReport convergence_;
};

// Penalized negative log-likelihood at `params` (ParamLayout order) with the
// spec's initial prior variances.  Observations' party field is consulted
// only when the spec includes party.
double neg_log_posterior(std::span<const double> params, std::span<const Observation> obs,
                         const ModelSpec& spec);

// Analytic gradient of neg_log_posterior, same layout as params.
std::vector<double> gradient(std::span<const double> params, std::span<const Observation> obs,
                             const ModelSpec& spec);

// MAP fit.  Inner loop: damped Newton with Armijo backtracking (a line-search
// descent method with exact analytic derivatives) to gradient inf-norm below
// spec.grad_tolerance.  Outer loop: re-center every factor to sum-to-zero
// (mean folded into the intercept), then set each factor's variance to the
// clamped mean squared effect; stop when no variance moves by
// spec.outer_tolerance or after max_outer_iterations.  Observations are
// canonically sorted before accumulation, so the result is bitwise
// deterministic and independent of input order.
//
// Throws NonConvergenceError when the inner loop cannot reach the gradient
// tolerance; callers that prefer to inspect the partial fit can use
// fit_map_report.
FittedModel fit_map(std::span<const Observation> obs, const ModelSpec& spec);

struct FitResult {
  FittedModel model;
  bool converged;
};
FitResult fit_map_report(std::span<const Observation> obs, const ModelSpec& spec);

}  // namespace mrp
