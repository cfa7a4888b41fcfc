#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "mrp/simulator.hpp"
#include "test_util.hpp"

using namespace mrp;

namespace {

SimConfig small_config(std::uint64_t seed = 1) {
  SimConfig cfg;
  cfg.lattice = test::tiny_lattice();
  cfg.population.assign(cfg.lattice->size(), 1.0);
  cfg.party_shares = make_party_shares(0.4, 0.4, 0.2);
  cfg.support = {DaySchedule::constant(0.9), DaySchedule::constant(0.1),
                 DaySchedule::constant(0.6)};
  cfg.undecided = DaySchedule::constant(0.1);
  cfg.respondents = 2000;
  cfg.entry.assign(kNumDays, 1.0);
  cfg.base_propensity = 0.2;
  cfg.propensity_multiplier = {DaySchedule::constant(1.0), DaySchedule::constant(1.0),
                               DaySchedule::constant(1.0)};
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("true_series: constant, step, and mixture arithmetic") {
  SimConfig cfg = small_config();
  cfg.support = {DaySchedule::constant(0.52), DaySchedule::constant(0.52),
                 DaySchedule::constant(0.52)};
  TruthSeries truth = true_series(cfg);
  for (double v : truth) CHECK(std::abs(v - 0.52) < 1e-12);

  // party-uniform step 0.52 -> 0.49 at day 17 steps the series identically
  DaySchedule step = DaySchedule::with_steps(0.52, {{17, 0.49}});
  cfg.support = {step, step, step};
  truth = true_series(cfg);
  CHECK(std::abs(truth[16] - 0.52) < 1e-12);
  CHECK(std::abs(truth[17] - 0.49) < 1e-12);
  CHECK(std::abs(truth[44] - 0.49) < 1e-12);

  // two parties at 0.5/0.5 with supports 0.9/0.1 mix to 0.50
  cfg.party_shares = make_party_shares(0.5, 0.5, 0.0);
  cfg.support = {DaySchedule::constant(0.9), DaySchedule::constant(0.1),
                 DaySchedule::constant(0.3)};
  truth = true_series(cfg);
  CHECK(std::abs(truth[0] - 0.50) < 1e-12);
}

TEST_CASE("true_series is seed-independent") {
  SimConfig a = small_config(1);
  SimConfig b = small_config(999);
  TruthSeries ta = true_series(a);
  TruthSeries tb = true_series(b);
  for (int t = 0; t < kNumDays; ++t) CHECK(ta[t] == tb[t]);
}

TEST_CASE("zero base propensity yields an empty response set") {
  SimConfig cfg = small_config();
  cfg.base_propensity = 0.0;
  Panel p = simulate_panel(cfg);
  CHECK(p.size() == cfg.respondents);
  CHECK(p.response_count() == 0);
}

TEST_CASE("raw responder share matches the truth within 3 binomial errors") {
  SimConfig cfg = small_config(77);
  cfg.respondents = 5000;
  Panel p = simulate_panel(cfg);
  double truth = true_series(cfg)[0];

  std::size_t n = 0, a = 0;
  for (const auto& r : p.respondents()) {
    for (const auto& resp : r.responses) {
      if (resp.intent == Intent::CandA) ++a;
      if (resp.intent == Intent::CandA || resp.intent == Intent::CandB) ++n;
    }
  }
  REQUIRE(n > 1000);
  double share = static_cast<double>(a) / static_cast<double>(n);
  double se = std::sqrt(truth * (1 - truth) / static_cast<double>(n));
  CHECK(std::abs(share - truth) <= 3 * se);
}

TEST_CASE("undecided responses appear at the configured rate") {
  SimConfig cfg = small_config(31);
  cfg.respondents = 5000;
  cfg.undecided = DaySchedule::constant(0.25);
  Panel p = simulate_panel(cfg);
  std::size_t n = p.response_count(), u = 0;
  for (const auto& r : p.respondents()) {
    for (const auto& resp : r.responses) u += resp.intent == Intent::Undecided;
  }
  double rate = static_cast<double>(u) / static_cast<double>(n);
  double se = std::sqrt(0.25 * 0.75 / static_cast<double>(n));
  CHECK(std::abs(rate - 0.25) <= 3 * se);
}

TEST_CASE("propensity dip changes the responder party mix by the closed form") {
  SimConfig cfg = small_config(4242);
  cfg.respondents = 8000;
  cfg.entry.assign(kNumDays, 0.0);
  cfg.entry[0] = 1.0;
  cfg.propensity_multiplier[static_cast<std::size_t>(Party::Dem)] =
      DaySchedule::with_steps(1.0, {{17, 0.6}, {31, 1.0}});
  Panel p = simulate_panel(cfg);

  auto dem_share = [&](int lo, int hi) {
    std::size_t dem = 0, rep = 0;
    for (const auto& r : p.respondents()) {
      for (const auto& resp : r.responses) {
        if (resp.day < lo || resp.day > hi) continue;
        if (r.party_first == Party::Dem) ++dem;
        if (r.party_first == Party::Rep) ++rep;
      }
    }
    return static_cast<double>(dem) / static_cast<double>(dem + rep);
  };

  double pre = dem_share(0, 16);
  double dip = dem_share(17, 30);
  double post = dem_share(31, 44);
  // equal DEM/REP shares: response-level mix falls to d*0.6/(d*0.6 + 1-d)
  double expected = 0.5 * 0.6 / (0.5 * 0.6 + 0.5);
  CHECK(std::abs(pre - 0.5) < 0.02);
  CHECK(std::abs(dip - expected) < 0.02);
  CHECK(std::abs(post - 0.5) < 0.02);
}

TEST_CASE("panel respects respondent count and entry days") {
  SimConfig cfg = small_config(9);
  cfg.entry.assign(kNumDays, 0.0);
  cfg.entry[5] = 1.0;
  Panel p = simulate_panel(cfg);
  CHECK(p.size() == cfg.respondents);
  for (const auto& r : p.respondents()) {
    for (const auto& resp : r.responses) CHECK(resp.day >= 5);
    CHECK(r.party_first.has_value());
  }
}

TEST_CASE("panel stats agree with a manual recount of the simulation") {
  SimConfig cfg = small_config(808);
  cfg.base_propensity = 0.05;  // leaves some respondents silent
  Panel p = simulate_panel(cfg);
  PanelStats stats = panel_stats(p);
  CHECK(stats.respondents == cfg.respondents);

  std::size_t responses = 0, with_any = 0;
  for (const auto& r : p.respondents()) {
    responses += r.responses.size();
    with_any += !r.responses.empty();
  }
  CHECK(stats.responses == responses);
  CHECK(stats.count_with_at_least(1) == with_any);
  CHECK(with_any < cfg.respondents);  // the silent ones stay in the panel
}

TEST_CASE("simulation is bitwise reproducible; different seeds differ") {
  SimConfig cfg = small_config(123);
  std::ostringstream a, b;
  write_responses_csv(a, simulate_panel(cfg));
  write_responses_csv(b, simulate_panel(cfg));
  CHECK(a.str() == b.str());

  cfg.seed = 124;
  std::ostringstream c;
  write_responses_csv(c, simulate_panel(cfg));
  CHECK(a.str() != c.str());
}

TEST_CASE("switch rules hold intents fixed between rule days") {
  SimConfig cfg = small_config(55);
  cfg.respondents = 400;
  cfg.switch_rules = {{20, Intent::Undecided, Intent::CandB, 0.5}};
  cfg.undecided = DaySchedule::constant(0.4);
  Panel p = simulate_panel(cfg);
  for (const auto& r : p.respondents()) {
    std::set<Intent> before;
    for (const auto& resp : r.responses) {
      if (resp.day < 20) before.insert(resp.intent);
    }
    CHECK(before.size() <= 1);  // persistent until the first rule day
  }
}

TEST_CASE("party tilts make party depend on demographics") {
  SimConfig cfg = small_config();
  cfg.party_tilts.assign(cfg.lattice->num_factors(), {});
  for (std::size_t f = 0; f < cfg.lattice->num_factors(); ++f) {
    cfg.party_tilts[f].assign(cfg.lattice->factor(f).levels.size(), {0.0, 0.0, 0.0});
  }
  cfg.party_tilts[0][0] = {1.0, -1.0, 0.0};  // males lean DEM

  auto male = cfg.party_given_cell(cfg.lattice->position(CellKey{0, 0}));
  auto female = cfg.party_given_cell(cfg.lattice->position(CellKey{1, 0}));
  CHECK(male[0] > female[0]);
  CHECK(std::abs(male[0] + male[1] + male[2] - 1.0) < 1e-12);
  CHECK(std::abs(female[0] - 0.4) < 1e-12);  // untouched level keeps the base shares
}

TEST_CASE("support offsets shift cell-level support on the logit scale") {
  SimConfig cfg = small_config();
  cfg.support_offsets.assign(cfg.lattice->num_factors(), {});
  cfg.support_offsets[0] = {0.5, -0.5};
  cfg.support_offsets[1] = {0.0, 0.0, 0.0};
  std::size_t male_cell = cfg.lattice->position(CellKey{0, 0});
  std::size_t female_cell = cfg.lattice->position(CellKey{1, 0});
  CHECK(cfg.support_prob(male_cell, Party::Other, 0) > 0.6);
  CHECK(cfg.support_prob(female_cell, Party::Other, 0) < 0.6);
  TruthSeries truth = true_series(cfg);
  CHECK(truth[0] > 0.0);
  CHECK(truth[0] < 1.0);
}

TEST_CASE("config validation rejects bad fields") {
  SimConfig cfg = small_config();
  cfg.base_propensity = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  cfg = small_config();
  cfg.undecided = DaySchedule::constant(1.0);  // must stay below 1
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  cfg = small_config();
  cfg.propensity_multiplier[0] = DaySchedule::constant(0.0);
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  cfg = small_config();
  cfg.respondents = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  cfg = small_config();
  cfg.entry.assign(kNumDays, 0.0);
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  cfg = small_config();
  cfg.switch_rules = {{20, Intent::CandA, Intent::CandA, 0.5}};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("sim config parses from JSON") {
  const char* text = R"({
    "lattice": [
      {"name": "gender", "levels": ["male", "female"]},
      {"name": "region", "levels": ["north", "south", "west"]}
    ],
    "population": {"marginals": {"gender": [3, 1]}},
    "party_shares": {"DEM": 0.4, "REP": 0.4, "OTHER": 0.2},
    "support": {
      "DEM": 0.95,
      "REP": {"base": 0.05, "steps": [{"at": 17, "value": 0.02}]},
      "OTHER": 0.6
    },
    "undecided": 0.05,
    "respondents": 100,
    "entry": {"uniform": [0, 16]},
    "base_propensity": 0.35,
    "propensity_multipliers": {"DEM": {"base": 1.0, "steps": [{"at": 17, "value": 0.6}, {"at": 31, "value": 1.0}]}},
    "switch_rules": [{"day": 17, "from": "UNDECIDED", "to": "CAND_B", "fraction": 0.5}],
    "seed": 42
  })";
  SimConfig cfg = SimConfig::from_json_text(text);
  CHECK(cfg.lattice->size() == 6);
  CHECK(cfg.respondents == 100);
  CHECK(cfg.seed == 42);
  CHECK(cfg.support[1].at(16) == doctest::Approx(0.05));
  CHECK(cfg.support[1].at(17) == doctest::Approx(0.02));
  CHECK(cfg.propensity_multiplier[0].at(30) == doctest::Approx(0.6));
  CHECK(cfg.propensity_multiplier[0].at(31) == doctest::Approx(1.0));
  CHECK(cfg.switch_rules.size() == 1);
  // marginals: male cells get 3x the female weight
  CHECK(cfg.population[0] == doctest::Approx(3.0));
  CHECK(cfg.population[3] == doctest::Approx(1.0));

  CHECK_THROWS_AS(SimConfig::from_json_text("{not json"), ValidationError);
  CHECK_THROWS_AS(SimConfig::from_json_text("{}"), ValidationError);
}

TEST_CASE("truth CSV has one row per day") {
  SimConfig cfg = small_config();
  std::ostringstream out;
  write_truth_csv(out, true_series(cfg));
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == kNumDays + 1);
}
