#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "mrp/panel.hpp"
#include "mrp/weights.hpp"

namespace mrp {

// One value per fielding day; built from a constant, an explicit 45-vector,
// or a base plus step changes.
class DaySchedule {
 public:
  DaySchedule() { values_.fill(0.0); }
  static DaySchedule constant(double v);
  static DaySchedule from_values(const std::vector<double>& values);
  // Piecewise constant: base until the first step, then each step's value
  // from its day onward.
  static DaySchedule with_steps(double base, std::vector<std::pair<int, double>> steps);

  double at(int day) const { return values_[static_cast<std::size_t>(day)]; }

 private:
  std::array<double, kNumDays> values_;
};

struct SwitchRule {
  int day = 0;
  Intent from = Intent::Undecided;
  Intent to = Intent::CandB;
  double fraction = 0.0;
};

// Generative description of a synthetic electorate: who exists (cells,
// parties), what they believe (per-party support schedules, optional
// cell-level logit offsets), and how they respond (entry day, base
// propensity, per-party propensity multipliers).  simulate_panel draws from
// it; true_series integrates it exactly.
struct SimConfig {
  LatticePtr lattice;
  std::vector<double> population;  // raw cell weights; normalized internally

  PartyShares party_shares{{1.0 / 3, 1.0 / 3, 1.0 / 3}};
  // Optional per-(factor, level) additive log-weights making party depend on
  // demographics; empty = independent of cells.
  std::vector<std::vector<std::array<double, kNumParties>>> party_tilts;

  // p(intends CAND_A | two-party supporter, party, day)
  std::array<DaySchedule, kNumParties> support;
  // Optional per-(factor, level) logit offsets on the support probability.
  std::vector<std::vector<double>> support_offsets;

  DaySchedule undecided;  // probability a response is UNDECIDED

  std::size_t respondents = 0;
  std::vector<double> entry;  // entry-day weights over [0, 44]
  double base_propensity = 0.1;
  std::array<DaySchedule, kNumParties> propensity_multiplier;

  // Non-empty turns on persistent per-respondent intents: the intent is
  // drawn once at entry and then changed only by these rules.
  std::vector<SwitchRule> switch_rules;

  std::uint64_t seed = 0;

  void validate() const;

  WeightTable population_weights() const;
  std::array<double, kNumParties> party_given_cell(std::size_t position) const;
  double support_prob(std::size_t position, Party party, int day) const;

  static SimConfig from_json_text(const std::string& text, Warnings* warnings = nullptr);
  static SimConfig from_json_file(const std::string& path, Warnings* warnings = nullptr);
};

// Population two-party share of CAND_A per day, integrated exactly over
// cells and parties.  Seed-independent by construction.
using TruthSeries = std::array<double, kNumDays>;

TruthSeries true_series(const SimConfig& cfg);

// Draws the panel: per respondent, a cell, a party (fixed and truthfully
// reported), an entry day, then a response on each day >= entry with
// probability min(1, base * multiplier(party, day)).  Respondents who never
// respond stay in the panel (with no responses), so the respondent count is
// exactly cfg.respondents.  Bitwise deterministic given (config, seed) via
// per-respondent RNG substreams.
Panel simulate_panel(const SimConfig& cfg);

void write_truth_csv(std::ostream& out, const TruthSeries& truth);

}  // namespace mrp
