#include "mrp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mrp/csv.hpp"
#include "mrp/rng.hpp"

namespace mrp {

DaySchedule DaySchedule::constant(double v) {
  DaySchedule s;
  s.values_.fill(v);
  return s;
}

DaySchedule DaySchedule::from_values(const std::vector<double>& values) {
  if (values.size() != kNumDays) {
    throw ValidationError("day schedule needs exactly " + std::to_string(kNumDays) +
                          " values, got " + std::to_string(values.size()));
  }
  DaySchedule s;
  std::copy(values.begin(), values.end(), s.values_.begin());
  return s;
}

DaySchedule DaySchedule::with_steps(double base, std::vector<std::pair<int, double>> steps) {
  std::sort(steps.begin(), steps.end());
  DaySchedule s;
  double current = base;
  std::size_t next = 0;
  for (int day = 0; day < kNumDays; ++day) {
    while (next < steps.size() && steps[next].first == day) {
      current = steps[next].second;
      ++next;
    }
    s.values_[static_cast<std::size_t>(day)] = current;
  }
  if (next != steps.size()) {
    throw ValidationError("schedule step day outside [0, " + std::to_string(kNumDays - 1) +
                          "]");
  }
  return s;
}

namespace {

constexpr double kLogitGuard = 1e-12;

double logit(double p) {
  p = std::clamp(p, kLogitGuard, 1.0 - kLogitGuard);
  return std::log(p / (1.0 - p));
}

void check_schedule(const DaySchedule& s, double lo, double hi, bool hi_open,
                    const char* what) {
  for (int day = 0; day < kNumDays; ++day) {
    double v = s.at(day);
    bool ok = std::isfinite(v) && v >= lo && (hi_open ? v < hi : v <= hi);
    if (!ok) {
      throw ValidationError(std::string(what) + " out of range on day " +
                            std::to_string(day));
    }
  }
}

}  // namespace

void SimConfig::validate() const {
  if (!lattice) throw ValidationError("simulator config has no lattice");
  if (population.size() != lattice->size()) {
    throw ValidationError("population weights do not match the lattice");
  }
  if (respondents < 1) throw ValidationError("respondent pool must be >= 1");
  // 0 is allowed as the degenerate no-response case.
  if (!(base_propensity >= 0.0) || base_propensity > 1.0) {
    throw ValidationError("base response propensity must be in [0, 1]");
  }
  if (entry.size() != kNumDays) {
    throw ValidationError("entry distribution needs " + std::to_string(kNumDays) +
                          " weights");
  }
  double entry_total = 0.0;
  for (double w : entry) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("entry weights must be nonnegative");
    }
    entry_total += w;
  }
  if (!(entry_total > 0.0)) throw ValidationError("entry distribution has zero mass");

  for (int k = 0; k < kNumParties; ++k) {
    check_schedule(support[static_cast<std::size_t>(k)], 0.0, 1.0, false, "support");
    const DaySchedule& m = propensity_multiplier[static_cast<std::size_t>(k)];
    for (int day = 0; day < kNumDays; ++day) {
      if (!(m.at(day) > 0.0) || !std::isfinite(m.at(day))) {
        throw ValidationError("propensity multiplier must be positive");
      }
    }
  }
  check_schedule(undecided, 0.0, 1.0, true, "undecided rate");

  if (!party_tilts.empty() && party_tilts.size() != lattice->num_factors()) {
    throw ValidationError("party tilts must cover every factor or be empty");
  }
  for (std::size_t f = 0; f < party_tilts.size(); ++f) {
    if (party_tilts[f].size() != lattice->factor(f).levels.size()) {
      throw ValidationError("party tilts for factor '" + lattice->factor(f).name +
                            "' do not match its levels");
    }
  }
  if (!support_offsets.empty() && support_offsets.size() != lattice->num_factors()) {
    throw ValidationError("support offsets must cover every factor or be empty");
  }
  for (std::size_t f = 0; f < support_offsets.size(); ++f) {
    if (support_offsets[f].size() != lattice->factor(f).levels.size()) {
      throw ValidationError("support offsets for factor '" + lattice->factor(f).name +
                            "' do not match its levels");
    }
  }
  for (const auto& rule : switch_rules) {
    if (rule.day < 0 || rule.day >= kNumDays) {
      throw ValidationError("switch rule day outside the fielding period");
    }
    if (!(rule.fraction >= 0.0) || rule.fraction > 1.0) {
      throw ValidationError("switch rule fraction must be in [0, 1]");
    }
    if (rule.from == rule.to) throw ValidationError("switch rule must change the intent");
  }
}

WeightTable SimConfig::population_weights() const {
  return WeightTable(lattice, population);
}

std::array<double, kNumParties> SimConfig::party_given_cell(std::size_t position) const {
  std::array<double, kNumParties> q;
  if (party_tilts.empty()) {
    q = party_shares.share;
    return q;
  }
  double total = 0.0;
  for (int k = 0; k < kNumParties; ++k) {
    double log_w = std::log(std::max(party_shares.share[static_cast<std::size_t>(k)],
                                     kLogitGuard));
    for (std::size_t f = 0; f < party_tilts.size(); ++f) {
      log_w += party_tilts[f][lattice->level_at(position, f)][static_cast<std::size_t>(k)];
    }
    q[static_cast<std::size_t>(k)] = std::exp(log_w);
    total += q[static_cast<std::size_t>(k)];
  }
  for (double& v : q) v /= total;
  return q;
}

double SimConfig::support_prob(std::size_t position, Party party, int day) const {
  double base = support[static_cast<std::size_t>(party)].at(day);
  if (support_offsets.empty()) return base;
  double eta = logit(base);
  for (std::size_t f = 0; f < support_offsets.size(); ++f) {
    eta += support_offsets[f][lattice->level_at(position, f)];
  }
  return sigmoid(eta);
}

TruthSeries true_series(const SimConfig& cfg) {
  cfg.validate();
  WeightTable weights = cfg.population_weights();
  TruthSeries truth;
  for (int day = 0; day < kNumDays; ++day) {
    KahanSum sum;
    for (std::size_t pos = 0; pos < cfg.lattice->size(); ++pos) {
      double w = weights.weight(pos);
      if (w == 0.0) continue;
      std::array<double, kNumParties> q = cfg.party_given_cell(pos);
      double p = 0.0;
      for (int k = 0; k < kNumParties; ++k) {
        p += q[static_cast<std::size_t>(k)] *
             cfg.support_prob(pos, static_cast<Party>(k), day);
      }
      sum.add(w * p);
    }
    truth[static_cast<std::size_t>(day)] = sum.value();
  }
  return truth;
}

Panel simulate_panel(const SimConfig& cfg) {
  cfg.validate();
  WeightTable weights = cfg.population_weights();
  std::vector<double> pop_cdf = cumulative(weights.weights());
  std::vector<double> entry_cdf = cumulative(cfg.entry);

  std::map<int, std::vector<const SwitchRule*>> rules_by_day;
  for (const auto& rule : cfg.switch_rules) rules_by_day[rule.day].push_back(&rule);
  const bool persistent = !cfg.switch_rules.empty();

  char id_buf[24];
  std::vector<Respondent> respondents;
  respondents.reserve(cfg.respondents);

  for (std::size_t r = 0; r < cfg.respondents; ++r) {
    Rng rng(cfg.seed, RngDomain::Simulator, r);
    std::size_t cell = rng.from_cdf(pop_cdf);
    std::array<double, kNumParties> q = cfg.party_given_cell(cell);
    std::vector<double> q_cdf = cumulative(q);
    Party party = static_cast<Party>(rng.from_cdf(q_cdf));
    int entry_day = static_cast<int>(rng.from_cdf(entry_cdf));

    auto draw_intent = [&](int day) {
      if (rng.bernoulli(cfg.undecided.at(day))) return Intent::Undecided;
      return rng.bernoulli(cfg.support_prob(cell, party, day)) ? Intent::CandA
                                                               : Intent::CandB;
    };

    Intent state = persistent ? draw_intent(entry_day) : Intent::Undecided;

    std::snprintf(id_buf, sizeof id_buf, "r%06zu", r);
    Respondent resp;
    resp.id = id_buf;
    resp.cell = static_cast<std::uint32_t>(cell);
    resp.party_first = party;

    for (int day = entry_day; day < kNumDays; ++day) {
      if (persistent && day > entry_day) {
        auto it = rules_by_day.find(day);
        if (it != rules_by_day.end()) {
          for (const SwitchRule* rule : it->second) {
            if (state == rule->from && rng.bernoulli(rule->fraction)) state = rule->to;
          }
        }
      }
      double p_respond = std::min(1.0, cfg.base_propensity *
                                           cfg.propensity_multiplier[static_cast<std::size_t>(
                                               party)].at(day));
      if (!rng.bernoulli(p_respond)) continue;
      Intent intent = persistent ? state : draw_intent(day);
      resp.responses.push_back(Response{
          day, intent, party, static_cast<std::uint32_t>(resp.responses.size())});
    }
    if (!resp.responses.empty()) resp.first_response_day = resp.responses.front().day;
    respondents.push_back(std::move(resp));
  }
  return Panel(cfg.lattice, std::move(respondents));
}

void write_truth_csv(std::ostream& out, const TruthSeries& truth) {
  out << "day,truth\n";
  for (int day = 0; day < kNumDays; ++day) {
    out << day << ',' << csv::format_double(truth[static_cast<std::size_t>(day)], 9) << '\n';
  }
}

namespace {

using nlohmann::json;

DaySchedule schedule_from_json(const json& j, const char* what) {
  if (j.is_number()) return DaySchedule::constant(j.get<double>());
  if (j.is_array()) return DaySchedule::from_values(j.get<std::vector<double>>());
  if (j.is_object()) {
    double base = j.at("base").get<double>();
    std::vector<std::pair<int, double>> steps;
    if (j.contains("steps")) {
      for (const auto& js : j.at("steps")) {
        steps.emplace_back(js.at("at").get<int>(), js.at("value").get<double>());
      }
    }
    return DaySchedule::with_steps(base, std::move(steps));
  }
  throw ValidationError(std::string(what) +
                        ": expected a number, a 45-array, or {base, steps}");
}

LatticePtr lattice_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "default") {
    return default_demographic_lattice();
  }
  if (j.is_array()) {
    std::vector<FactorSpec> factors;
    for (const auto& jf : j) {
      factors.push_back(FactorSpec{jf.at("name").get<std::string>(),
                                   jf.at("levels").get<std::vector<std::string>>()});
    }
    return std::make_shared<const CellLattice>(std::move(factors));
  }
  throw ValidationError("lattice: expected \"default\" or an array of factors");
}

std::vector<double> population_from_json(const json& j, const LatticePtr& lattice,
                                         Warnings* warnings) {
  if (j.is_string() && j.get<std::string>() == "uniform") {
    return std::vector<double>(lattice->size(), 1.0);
  }
  if (j.is_object() && j.contains("csv")) {
    WeightTable table =
        load_weights_file(j.at("csv").get<std::string>(), lattice, warnings);
    return std::vector<double>(table.weights().begin(), table.weights().end());
  }
  if (j.is_object() && j.contains("marginals")) {
    // Product of per-factor marginal weights.
    const json& jm = j.at("marginals");
    std::vector<std::vector<double>> marginal(lattice->num_factors());
    for (std::size_t f = 0; f < lattice->num_factors(); ++f) {
      const auto& factor = lattice->factor(f);
      if (jm.contains(factor.name)) {
        marginal[f] = jm.at(factor.name).get<std::vector<double>>();
        if (marginal[f].size() != factor.levels.size()) {
          throw ValidationError("population marginals for '" + factor.name +
                                "' do not match its levels");
        }
      } else {
        marginal[f].assign(factor.levels.size(), 1.0);
      }
    }
    std::vector<double> w(lattice->size());
    for (std::size_t pos = 0; pos < lattice->size(); ++pos) {
      double v = 1.0;
      for (std::size_t f = 0; f < lattice->num_factors(); ++f) {
        v *= marginal[f][lattice->level_at(pos, f)];
      }
      w[pos] = v;
    }
    return w;
  }
  throw ValidationError("population: expected \"uniform\", {csv}, or {marginals}");
}

std::vector<double> entry_from_json(const json& j) {
  std::vector<double> entry(kNumDays, 0.0);
  if (j.is_array()) {
    auto v = j.get<std::vector<double>>();
    if (v.size() != kNumDays) {
      throw ValidationError("entry: array needs " + std::to_string(kNumDays) + " weights");
    }
    return v;
  }
  if (j.is_object() && j.contains("point")) {
    int d = j.at("point").get<int>();
    if (d < 0 || d >= kNumDays) throw ValidationError("entry point day out of range");
    entry[static_cast<std::size_t>(d)] = 1.0;
    return entry;
  }
  if (j.is_object() && j.contains("uniform")) {
    auto range = j.at("uniform").get<std::vector<int>>();
    if (range.size() != 2 || range[0] < 0 || range[1] >= kNumDays || range[0] > range[1]) {
      throw ValidationError("entry uniform range invalid");
    }
    for (int d = range[0]; d <= range[1]; ++d) entry[static_cast<std::size_t>(d)] = 1.0;
    return entry;
  }
  throw ValidationError("entry: expected a 45-array, {point}, or {uniform: [lo, hi]}");
}

Party party_key(const std::string& name) {
  auto p = try_party_from_string(name);
  if (!p) throw ValidationError("unknown party key '" + name + "'");
  return *p;
}

Intent intent_key(const std::string& name) {
  auto i = try_intent_from_string(name);
  if (!i) throw ValidationError("unknown intent '" + name + "'");
  return *i;
}

}  // namespace

SimConfig SimConfig::from_json_text(const std::string& text, Warnings* warnings) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("simulator config: ") + e.what());
  }
  try {
    SimConfig cfg;
    cfg.lattice = lattice_from_json(j.at("lattice"));
    cfg.population = population_from_json(
        j.contains("population") ? j.at("population") : json("uniform"), cfg.lattice,
        warnings);

    const json& shares = j.at("party_shares");
    cfg.party_shares = make_party_shares(shares.at("DEM").get<double>(),
                                         shares.at("REP").get<double>(),
                                         shares.at("OTHER").get<double>(), warnings);

    const json& support = j.at("support");
    for (int k = 0; k < kNumParties; ++k) {
      std::string key(to_string(static_cast<Party>(k)));
      cfg.support[static_cast<std::size_t>(k)] =
          schedule_from_json(support.at(key), "support");
    }

    cfg.undecided = j.contains("undecided")
                        ? schedule_from_json(j.at("undecided"), "undecided")
                        : DaySchedule::constant(0.0);

    cfg.respondents = j.at("respondents").get<std::size_t>();
    cfg.entry = entry_from_json(j.contains("entry") ? j.at("entry")
                                                    : json{{"uniform", {0, kNumDays - 1}}});
    cfg.base_propensity = j.at("base_propensity").get<double>();

    for (int k = 0; k < kNumParties; ++k) {
      cfg.propensity_multiplier[static_cast<std::size_t>(k)] = DaySchedule::constant(1.0);
    }
    if (j.contains("propensity_multipliers")) {
      for (const auto& [key, value] : j.at("propensity_multipliers").items()) {
        cfg.propensity_multiplier[static_cast<std::size_t>(party_key(key))] =
            schedule_from_json(value, "propensity multiplier");
      }
    }

    if (j.contains("party_tilts")) {
      cfg.party_tilts.assign(cfg.lattice->num_factors(), {});
      for (std::size_t f = 0; f < cfg.lattice->num_factors(); ++f) {
        const auto& factor = cfg.lattice->factor(f);
        cfg.party_tilts[f].assign(factor.levels.size(), {0.0, 0.0, 0.0});
        if (!j.at("party_tilts").contains(factor.name)) continue;
        const json& jt = j.at("party_tilts").at(factor.name);
        for (std::size_t l = 0; l < factor.levels.size(); ++l) {
          if (!jt.contains(factor.levels[l])) continue;
          const json& jl = jt.at(factor.levels[l]);
          for (int k = 0; k < kNumParties; ++k) {
            std::string key(to_string(static_cast<Party>(k)));
            if (jl.contains(key)) {
              cfg.party_tilts[f][l][static_cast<std::size_t>(k)] = jl.at(key).get<double>();
            }
          }
        }
      }
    }

    if (j.contains("support_offsets")) {
      cfg.support_offsets.assign(cfg.lattice->num_factors(), {});
      for (std::size_t f = 0; f < cfg.lattice->num_factors(); ++f) {
        const auto& factor = cfg.lattice->factor(f);
        cfg.support_offsets[f].assign(factor.levels.size(), 0.0);
        if (!j.at("support_offsets").contains(factor.name)) continue;
        const json& jo = j.at("support_offsets").at(factor.name);
        for (std::size_t l = 0; l < factor.levels.size(); ++l) {
          if (jo.contains(factor.levels[l])) {
            cfg.support_offsets[f][l] = jo.at(factor.levels[l]).get<double>();
          }
        }
      }
    }

    if (j.contains("switch_rules")) {
      for (const auto& jr : j.at("switch_rules")) {
        SwitchRule rule;
        rule.day = jr.at("day").get<int>();
        rule.from = intent_key(jr.at("from").get<std::string>());
        rule.to = intent_key(jr.at("to").get<std::string>());
        rule.fraction = jr.at("fraction").get<double>();
        cfg.switch_rules.push_back(rule);
      }
    }

    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("simulator config: ") + e.what());
  }
}

SimConfig SimConfig::from_json_file(const std::string& path, Warnings* warnings) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open simulator config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str(), warnings);
}

}  // namespace mrp
