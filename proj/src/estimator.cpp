#include "mrp/estimator.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "mrp/csv.hpp"
#include "mrp/parallel.hpp"

namespace mrp {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::Demo ? "DEMO" : "DEMO_PARTY";
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "DEMO") return ModelKind::Demo;
  if (s == "DEMO_PARTY") return ModelKind::DemoParty;
  throw ValidationError("unknown model kind '" + std::string(s) + "'");
}

double poststratify(std::span<const double> cell_probs, const WeightTable& weights) {
  if (cell_probs.size() != weights.lattice()->size()) {
    throw ValidationError("probability vector has " + std::to_string(cell_probs.size()) +
                          " entries, weight table has " +
                          std::to_string(weights.lattice()->size()) + " cells");
  }
  KahanSum sum;
  for (std::size_t j = 0; j < cell_probs.size(); ++j) {
    double w = weights.weight(j);
    if (w == 0.0) continue;
    if (std::isnan(cell_probs[j])) {
      throw ValidationError("missing probability for positive-weight cell " +
                            std::to_string(j));
    }
    sum.add(w * cell_probs[j]);
  }
  return sum.value();
}

namespace {

void check_series_inputs(const Panel& panel, const ModelSpec& spec,
                         const WeightTable& weights, ModelKind kind) {
  spec.validate();
  if (!spec.lattice->same_shape(*panel.lattice())) {
    throw ValidationError("model lattice does not match panel lattice");
  }
  if (kind == ModelKind::DemoParty) {
    if (!spec.include_party) {
      throw ValidationError("DEMO_PARTY series needs a model spec with include_party");
    }
    LatticePtr extended = extend_lattice_with_party(panel.lattice());
    if (!weights.lattice()->same_shape(*extended)) {
      throw ValidationError(
          "DEMO_PARTY series needs a party-extended weight table "
          "(demographic factors plus a trailing 'party' dimension)");
    }
  } else {
    if (spec.include_party) {
      throw ValidationError("DEMO series needs a model spec without include_party");
    }
    if (!weights.lattice()->same_shape(*panel.lattice())) {
      throw ValidationError("weight table lattice does not match panel lattice");
    }
  }
}

void check_options(const SeriesOptions& opts) {
  if (opts.window < 1) throw ValidationError("window length must be >= 1");
  if (opts.min_n < 1) throw ValidationError("min_n must be >= 1");
  if (opts.day_lo < 0 || opts.day_hi >= kNumDays || opts.day_lo > opts.day_hi) {
    throw ValidationError("day range invalid");
  }
}

template <typename ObsFn>
EstimateSeries run_series(const Panel& panel, std::span<const std::uint32_t> respondents,
                          const ModelSpec& spec, const WeightTable& weights, ModelKind kind,
                          const SeriesOptions& opts, ObsFn make_observations) {
  EstimateSeries series;
  series.kind = kind;
  std::size_t n_days = static_cast<std::size_t>(opts.day_hi - opts.day_lo + 1);
  parallel_for(n_days, opts.threads, [&](std::size_t i) {
    int t = opts.day_lo + static_cast<int>(i);
    ResponseSet rs = window_select(panel, respondents, t, opts.window, opts.window_rule);
    std::vector<Observation> obs = make_observations(rs);
    DayEstimate& day = series.days[static_cast<std::size_t>(t)];
    day.n_obs = static_cast<int>(obs.size());
    if (obs.size() < opts.min_n) return;  // MISSING
    try {
      FittedModel model = fit_map(obs, spec);
      day.estimate = poststratify(model.predict_all(), weights);
    } catch (const NonConvergenceError& e) {
      throw NonConvergenceError("day " + std::to_string(t) + ": " + e.what(),
                                e.grad_inf_norm());
    }
  });
  return series;
}

}  // namespace

EstimateSeries daily_series(const Panel& panel, std::span<const std::uint32_t> respondents,
                            const ModelSpec& spec, const WeightTable& weights, ModelKind kind,
                            const SeriesOptions& opts) {
  check_series_inputs(panel, spec, weights, kind);
  check_options(opts);
  return run_series(panel, respondents, spec, weights, kind, opts,
                    [](const ResponseSet& rs) { return two_party_subset(rs).observations; });
}

EstimateSeries daily_series(const Panel& panel, const ModelSpec& spec,
                            const WeightTable& weights, ModelKind kind,
                            const SeriesOptions& opts) {
  std::vector<std::uint32_t> all(panel.size());
  std::iota(all.begin(), all.end(), 0u);
  return daily_series(panel, all, spec, weights, kind, opts);
}

EstimateSeries partisan_share_series(const Panel& panel,
                                     std::span<const std::uint32_t> respondents,
                                     const ModelSpec& spec, const WeightTable& weights,
                                     const SeriesOptions& opts) {
  check_series_inputs(panel, spec, weights, ModelKind::Demo);
  check_options(opts);
  for (const auto& r : panel.respondents()) {
    if (!r.responses.empty() && !r.party_first) {
      throw ValidationError("partisan share series needs party_first; run fix_partisanship");
    }
  }
  // Observation = one respondent responding in the window whose fixed party
  // is DEM or REP; y = 1 for DEM.  The fit itself is demographics-only.
  return run_series(panel, respondents, spec, weights, ModelKind::Demo, opts,
                    [](const ResponseSet& rs) {
                      std::vector<Observation> obs;
                      for (const auto& s : rs.selected) {
                        if (!s.party_first || *s.party_first == Party::Other) continue;
                        obs.push_back(Observation{
                            s.cell, std::int16_t{-1},
                            static_cast<std::uint8_t>(*s.party_first == Party::Dem)});
                      }
                      return obs;
                    });
}

EstimateSeries partisan_share_series(const Panel& panel, const ModelSpec& spec,
                                     const WeightTable& weights, const SeriesOptions& opts) {
  std::vector<std::uint32_t> all(panel.size());
  std::iota(all.begin(), all.end(), 0u);
  return partisan_share_series(panel, all, spec, weights, opts);
}

void write_series_csv(std::ostream& out, std::span<const EstimateSeries> series) {
  out << "day,model_kind,estimate,ci_lo,ci_hi,n_obs\n";
  for (const auto& s : series) {
    for (int t = 0; t < kNumDays; ++t) {
      const DayEstimate& d = s.days[static_cast<std::size_t>(t)];
      out << t << ',' << to_string(s.kind) << ',';
      if (d.estimate) out << csv::format_double(*d.estimate, 6);
      out << ',';
      if (d.ci_lo) out << csv::format_double(*d.ci_lo, 6);
      out << ',';
      if (d.ci_hi) out << csv::format_double(*d.ci_hi, 6);
      out << ',' << d.n_obs << '\n';
    }
  }
}

std::vector<EstimateSeries> read_series_csv(std::istream& in, const std::string& name) {
  csv::Reader reader(in, name,
                     {"day", "model_kind", "estimate", "ci_lo", "ci_hi", "n_obs"},
                     /*exact=*/true);
  std::vector<EstimateSeries> out;
  auto series_for = [&](ModelKind kind) -> EstimateSeries& {
    for (auto& s : out) {
      if (s.kind == kind) return s;
    }
    out.emplace_back();
    out.back().kind = kind;
    return out.back();
  };
  while (reader.next()) {
    int day = reader.parse_int("day");
    if (day < 0 || day >= kNumDays) reader.fail("day out of range");
    ModelKind kind;
    try {
      kind = model_kind_from_string(reader.field("model_kind"));
    } catch (const ValidationError& e) {
      reader.fail(e.what());
    }
    DayEstimate& d = series_for(kind).days[static_cast<std::size_t>(day)];
    if (!reader.field("estimate").empty()) d.estimate = reader.parse_double("estimate");
    if (!reader.field("ci_lo").empty()) d.ci_lo = reader.parse_double("ci_lo");
    if (!reader.field("ci_hi").empty()) d.ci_hi = reader.parse_double("ci_hi");
    d.n_obs = reader.parse_int("n_obs");
  }
  return out;
}

}  // namespace mrp
