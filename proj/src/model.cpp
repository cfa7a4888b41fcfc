#include "mrp/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace mrp {

namespace {

constexpr double kEtaClamp = 34.5;  // sigmoid(34.5) < 1 in double precision

// Observations aggregated by (cell, party): shared linear predictor, so the
// likelihood needs only counts and successes per group.
struct Group {
  std::uint32_t cell;
  std::int16_t party;
  double n = 0.0;
  double successes = 0.0;
};

std::vector<Group> group_observations(std::span<const Observation> obs,
                                      const ModelSpec& spec) {
  std::vector<Observation> sorted(obs.begin(), obs.end());
  if (spec.include_party) {
    for (const auto& o : sorted) {
      if (o.party < 0 || o.party >= kNumParties) {
        throw ValidationError("observation lacks a party but the model includes party");
      }
    }
  }
  // Canonical order; makes every accumulation below independent of the
  // caller's observation order.
  std::sort(sorted.begin(), sorted.end(), [](const Observation& a, const Observation& b) {
    return std::tuple(a.cell, a.party, a.y) < std::tuple(b.cell, b.party, b.y);
  });

  std::vector<Group> groups;
  for (const auto& o : sorted) {
    if (o.cell >= spec.lattice->size()) {
      throw ValidationError("observation cell position out of range");
    }
    std::int16_t party = spec.include_party ? o.party : std::int16_t{-1};
    if (groups.empty() || groups.back().cell != o.cell || groups.back().party != party) {
      groups.push_back(Group{o.cell, party, 0.0, 0.0});
    }
    groups.back().n += 1.0;
    groups.back().successes += o.y != 0 ? 1.0 : 0.0;
  }
  return groups;
}

// Indices of the parameters active for a group: intercept plus one level per
// factor.
class ActiveIndex {
 public:
  ActiveIndex(const ModelSpec& spec, const ParamLayout& layout)
      : spec_(&spec), layout_(&layout), idx_(1 + spec.num_model_factors()) {}

  std::span<const std::size_t> of(const Group& g) {
    idx_[0] = 0;
    const CellLattice& lat = *spec_->lattice;
    for (std::size_t f = 0; f < lat.num_factors(); ++f) {
      idx_[1 + f] = 1 + layout_->offset[f] + lat.level_at(g.cell, f);
    }
    if (spec_->include_party) {
      std::size_t f = lat.num_factors();
      idx_[1 + f] = 1 + layout_->offset[f] + static_cast<std::size_t>(g.party);
    }
    return idx_;
  }

 private:
  const ModelSpec* spec_;
  const ParamLayout* layout_;
  std::vector<std::size_t> idx_;
};

double objective_impl(const Eigen::VectorXd& params, const std::vector<Group>& groups,
                      const ModelSpec& spec, const ParamLayout& layout,
                      std::span<const double> variances, ActiveIndex& active) {
  double loss = 0.0;
  for (const auto& g : groups) {
    double eta = 0.0;
    for (std::size_t c : active.of(g)) eta += params[static_cast<Eigen::Index>(c)];
    loss += g.n * log1p_exp(eta) - g.successes * eta;
  }
  double penalty = params[0] * params[0] / (2.0 * spec.intercept_variance);
  for (std::size_t f = 0; f < spec.num_model_factors(); ++f) {
    double acc = 0.0;
    for (std::size_t l = 0; l < layout.levels[f]; ++l) {
      double a = params[static_cast<Eigen::Index>(1 + layout.offset[f] + l)];
      acc += a * a;
    }
    penalty += acc / (2.0 * variances[f]);
  }
  return loss + penalty;
}

Eigen::VectorXd gradient_impl(const Eigen::VectorXd& params, const std::vector<Group>& groups,
                              const ModelSpec& spec, const ParamLayout& layout,
                              std::span<const double> variances, ActiveIndex& active) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
  for (const auto& g : groups) {
    auto idx = active.of(g);
    double eta = 0.0;
    for (std::size_t c : idx) eta += params[static_cast<Eigen::Index>(c)];
    double r = g.n * sigmoid(eta) - g.successes;
    for (std::size_t c : idx) grad[static_cast<Eigen::Index>(c)] += r;
  }
  grad[0] += params[0] / spec.intercept_variance;
  for (std::size_t f = 0; f < spec.num_model_factors(); ++f) {
    for (std::size_t l = 0; l < layout.levels[f]; ++l) {
      auto i = static_cast<Eigen::Index>(1 + layout.offset[f] + l);
      grad[i] += params[i] / variances[f];
    }
  }
  return grad;
}

Eigen::MatrixXd hessian_impl(const Eigen::VectorXd& params, const std::vector<Group>& groups,
                             const ModelSpec& spec, const ParamLayout& layout,
                             std::span<const double> variances, ActiveIndex& active) {
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(params.size(), params.size());
  for (const auto& g : groups) {
    auto idx = active.of(g);
    double eta = 0.0;
    for (std::size_t c : idx) eta += params[static_cast<Eigen::Index>(c)];
    double p = sigmoid(eta);
    double w = g.n * p * (1.0 - p);
    for (std::size_t a : idx) {
      for (std::size_t b : idx) {
        hess(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += w;
      }
    }
  }
  hess(0, 0) += 1.0 / spec.intercept_variance;
  for (std::size_t f = 0; f < spec.num_model_factors(); ++f) {
    for (std::size_t l = 0; l < layout.levels[f]; ++l) {
      auto i = static_cast<Eigen::Index>(1 + layout.offset[f] + l);
      hess(i, i) += 1.0 / variances[f];
    }
  }
  return hess;
}

struct InnerResult {
  bool converged = false;
  int iterations = 0;
  double grad_inf_norm = 0.0;
};

// Damped Newton iteration: strictly convex objective (proper priors), so the
// Newton direction always descends and Armijo backtracking guarantees
// progress.
InnerResult minimize(Eigen::VectorXd& params, const std::vector<Group>& groups,
                     const ModelSpec& spec, const ParamLayout& layout,
                     std::span<const double> variances, ActiveIndex& active) {
  InnerResult result;
  Eigen::VectorXd grad = gradient_impl(params, groups, spec, layout, variances, active);
  result.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < spec.max_inner_iterations; ++it) {
    if (result.grad_inf_norm < spec.grad_tolerance) {
      result.converged = true;
      return result;
    }
    Eigen::MatrixXd hess = hessian_impl(params, groups, spec, layout, variances, active);
    Eigen::VectorXd dir = hess.llt().solve(-grad);
    double f0 = objective_impl(params, groups, spec, layout, variances, active);
    double slope = grad.dot(dir);
    // Near the optimum the true decrease sinks below the objective's rounding
    // noise; the Armijo test becomes meaningless there and the plain Newton
    // step is accepted.
    double noise = 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f0));
    double step = 1.0;
    Eigen::VectorXd trial;
    for (;;) {
      trial = params + step * dir;
      double f1 = objective_impl(trial, groups, spec, layout, variances, active);
      if (f1 <= f0 + 1e-4 * step * slope) break;
      if (-slope * step <= noise) break;
      step *= 0.5;
    }
    params = trial;
    ++result.iterations;
    grad = gradient_impl(params, groups, spec, layout, variances, active);
    result.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
  }
  result.converged = result.grad_inf_norm < spec.grad_tolerance;
  return result;
}

}  // namespace

void ModelSpec::validate() const {
  if (!lattice) throw ValidationError("model spec has no lattice");
  if (!initial_variance.empty() && initial_variance.size() != num_model_factors()) {
    throw ValidationError("initial_variance has " + std::to_string(initial_variance.size()) +
                          " entries, model has " + std::to_string(num_model_factors()) +
                          " factors");
  }
  for (double v : initial_variance) {
    if (!(v > 0.0)) throw ValidationError("prior variances must be positive");
  }
  if (!(intercept_variance > 0.0)) throw ValidationError("intercept variance must be positive");
  if (!(grad_tolerance > 0.0) || !(outer_tolerance > 0.0)) {
    throw ValidationError("tolerances must be positive");
  }
  if (max_inner_iterations < 1 || max_outer_iterations < 1) {
    throw ValidationError("iteration limits must be positive");
  }
  if (!(variance_floor > 0.0) || variance_cap < variance_floor) {
    throw ValidationError("variance floor/cap invalid");
  }
}

ParamLayout ParamLayout::of(const ModelSpec& spec) {
  ParamLayout layout;
  std::size_t off = 0;
  for (std::size_t f = 0; f < spec.num_model_factors(); ++f) {
    layout.offset.push_back(off);
    layout.levels.push_back(spec.factor_levels(f));
    off += spec.factor_levels(f);
  }
  layout.total = 1 + off;
  return layout;
}

double neg_log_posterior(std::span<const double> params, std::span<const Observation> obs,
                         const ModelSpec& spec) {
  spec.validate();
  ParamLayout layout = ParamLayout::of(spec);
  if (params.size() != layout.total) {
    throw ValidationError("parameter vector has wrong length");
  }
  std::vector<Group> groups = group_observations(obs, spec);
  std::vector<double> variances(spec.num_model_factors(), 1.0);
  if (!spec.initial_variance.empty()) variances = spec.initial_variance;
  ActiveIndex active(spec, layout);
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(params.data(),
                                                        static_cast<Eigen::Index>(params.size()));
  return objective_impl(p, groups, spec, layout, variances, active);
}

std::vector<double> gradient(std::span<const double> params, std::span<const Observation> obs,
                             const ModelSpec& spec) {
  spec.validate();
  ParamLayout layout = ParamLayout::of(spec);
  if (params.size() != layout.total) {
    throw ValidationError("parameter vector has wrong length");
  }
  std::vector<Group> groups = group_observations(obs, spec);
  std::vector<double> variances(spec.num_model_factors(), 1.0);
  if (!spec.initial_variance.empty()) variances = spec.initial_variance;
  ActiveIndex active(spec, layout);
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(params.data(),
                                                        static_cast<Eigen::Index>(params.size()));
  Eigen::VectorXd g = gradient_impl(p, groups, spec, layout, variances, active);
  return std::vector<double>(g.data(), g.data() + g.size());
}

FitResult fit_map_report(std::span<const Observation> obs, const ModelSpec& spec) {
  spec.validate();
  ParamLayout layout = ParamLayout::of(spec);
  std::vector<Group> groups = group_observations(obs, spec);
  ActiveIndex active(spec, layout);

  std::vector<double> variances(spec.num_model_factors(), 1.0);
  if (!spec.initial_variance.empty()) variances = spec.initial_variance;
  for (double& v : variances) v = std::clamp(v, spec.variance_floor, spec.variance_cap);

  Eigen::VectorXd params = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.total));
  ConvergenceReport report;
  bool inner_ok = true;

  for (int outer = 0; outer < spec.max_outer_iterations; ++outer) {
    InnerResult inner = minimize(params, groups, spec, layout, variances, active);
    report.inner_iterations += inner.iterations;
    report.grad_inf_norm = inner.grad_inf_norm;
    report.outer_iterations = outer + 1;
    inner_ok = inner.converged;

    // Identification: fold each factor's mean effect into the intercept.
    for (std::size_t f = 0; f < spec.num_model_factors(); ++f) {
      double mean = 0.0;
      for (std::size_t l = 0; l < layout.levels[f]; ++l) {
        mean += params[static_cast<Eigen::Index>(1 + layout.offset[f] + l)];
      }
      mean /= static_cast<double>(layout.levels[f]);
      for (std::size_t l = 0; l < layout.levels[f]; ++l) {
        params[static_cast<Eigen::Index>(1 + layout.offset[f] + l)] -= mean;
      }
      params[0] += mean;
    }

    // Empirical-Bayes update: each factor's variance becomes its mean squared
    // effect, clamped to [floor, cap].
    double max_change = 0.0;
    for (std::size_t f = 0; f < spec.num_model_factors(); ++f) {
      double acc = 0.0;
      for (std::size_t l = 0; l < layout.levels[f]; ++l) {
        double a = params[static_cast<Eigen::Index>(1 + layout.offset[f] + l)];
        acc += a * a;
      }
      double next = std::clamp(acc / static_cast<double>(layout.levels[f]),
                               spec.variance_floor, spec.variance_cap);
      max_change = std::max(max_change, std::abs(next - variances[f]));
      variances[f] = next;
    }
    if (!inner_ok || max_change < spec.outer_tolerance) break;
  }
  report.converged = inner_ok;

  std::vector<std::vector<double>> effects(spec.num_model_factors());
  for (std::size_t f = 0; f < spec.num_model_factors(); ++f) {
    effects[f].resize(layout.levels[f]);
    for (std::size_t l = 0; l < layout.levels[f]; ++l) {
      effects[f][l] = params[static_cast<Eigen::Index>(1 + layout.offset[f] + l)];
    }
  }
  FittedModel model(spec, params[0], std::move(effects), variances, report);
  return FitResult{std::move(model), report.converged};
}

FittedModel fit_map(std::span<const Observation> obs, const ModelSpec& spec) {
  FitResult result = fit_map_report(obs, spec);
  if (!result.converged) {
    throw NonConvergenceError(
        "fit did not reach gradient tolerance (final inf-norm " +
            std::to_string(result.model.convergence().grad_inf_norm) + ")",
        result.model.convergence().grad_inf_norm);
  }
  return std::move(result.model);
}

FittedModel::FittedModel(const ModelSpec& spec, double intercept,
                         std::vector<std::vector<double>> effects,
                         std::vector<double> variance, ConvergenceReport convergence)
    : lattice_(spec.lattice),
      include_party_(spec.include_party),
      intercept_(intercept),
      intercept_variance_(spec.intercept_variance),
      effects_(std::move(effects)),
      variance_(std::move(variance)),
      convergence_(convergence) {
  for (std::size_t f = 0; f < spec.num_model_factors(); ++f) {
    factor_names_.push_back(spec.factor_name(f));
  }
}

double FittedModel::predict(std::size_t cell_position, std::optional<Party> party) const {
  if (include_party_ != party.has_value()) {
    throw ValidationError(include_party_ ? "model includes party; predict needs a party"
                                         : "model has no party factor; got a party");
  }
  if (cell_position >= lattice_->size()) {
    throw ValidationError("cell position out of range");
  }
  double eta = intercept_;
  for (std::size_t f = 0; f < lattice_->num_factors(); ++f) {
    eta += effects_[f][lattice_->level_at(cell_position, f)];
  }
  if (party) eta += effects_.back()[static_cast<std::size_t>(*party)];
  return sigmoid(std::clamp(eta, -kEtaClamp, kEtaClamp));
}

std::vector<double> FittedModel::predict_all() const {
  std::size_t cells = lattice_->size();
  std::vector<double> out;
  if (!include_party_) {
    out.resize(cells);
    for (std::size_t pos = 0; pos < cells; ++pos) out[pos] = predict(pos);
  } else {
    out.resize(cells * kNumParties);
    for (std::size_t pos = 0; pos < cells; ++pos) {
      for (int k = 0; k < kNumParties; ++k) {
        out[pos * kNumParties + k] = predict(pos, static_cast<Party>(k));
      }
    }
  }
  return out;
}

std::string FittedModel::to_json() const {
  nlohmann::json j;
  j["intercept"] = intercept_;
  j["intercept_variance"] = intercept_variance_;
  j["include_party"] = include_party_;
  nlohmann::json factors = nlohmann::json::array();
  for (std::size_t f = 0; f < effects_.size(); ++f) {
    nlohmann::json jf;
    jf["name"] = factor_names_[f];
    if (f < lattice_->num_factors()) {
      jf["levels"] = lattice_->factor(f).levels;
    } else {
      jf["levels"] = {"DEM", "REP", "OTHER"};
    }
    jf["effects"] = effects_[f];
    jf["variance"] = variance_[f];
    factors.push_back(std::move(jf));
  }
  j["factors"] = std::move(factors);
  j["convergence"] = {{"converged", convergence_.converged},
                      {"outer_iterations", convergence_.outer_iterations},
                      {"inner_iterations", convergence_.inner_iterations},
                      {"grad_inf_norm", convergence_.grad_inf_norm}};
  return j.dump(2);
}

FittedModel FittedModel::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  FittedModel m;
  m.intercept_ = j.at("intercept").get<double>();
  m.intercept_variance_ = j.at("intercept_variance").get<double>();
  m.include_party_ = j.at("include_party").get<bool>();
  std::vector<FactorSpec> factors;
  for (const auto& jf : j.at("factors")) {
    m.factor_names_.push_back(jf.at("name").get<std::string>());
    m.effects_.push_back(jf.at("effects").get<std::vector<double>>());
    m.variance_.push_back(jf.at("variance").get<double>());
    factors.push_back(FactorSpec{jf.at("name").get<std::string>(),
                                 jf.at("levels").get<std::vector<std::string>>()});
  }
  if (m.include_party_) {
    if (factors.empty() || factors.back().name != kPartyFactorName) {
      throw ValidationError("party model without trailing party factor");
    }
    factors.pop_back();
  }
  m.lattice_ = std::make_shared<const CellLattice>(std::move(factors));
  const auto& jc = j.at("convergence");
  m.convergence_.converged = jc.at("converged").get<bool>();
  m.convergence_.outer_iterations = jc.at("outer_iterations").get<int>();
  m.convergence_.inner_iterations = jc.at("inner_iterations").get<int>();
  m.convergence_.grad_inf_norm = jc.at("grad_inf_norm").get<double>();
  return m;
}

}  // namespace mrp
