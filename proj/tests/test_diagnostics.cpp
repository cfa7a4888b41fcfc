#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mrp/diagnostics.hpp"
#include "mrp/simulator.hpp"
#include "test_util.hpp"

using namespace mrp;
using test::kTinyHeader;
using test::panel_from_csv;
using test::tiny_lattice;

namespace {

EstimateSeries series_of(std::initializer_list<std::pair<int, double>> values,
                         ModelKind kind = ModelKind::Demo) {
  EstimateSeries s;
  s.kind = kind;
  for (auto [day, v] : values) {
    s.days[static_cast<std::size_t>(day)].estimate = v;
    s.days[static_cast<std::size_t>(day)].n_obs = 1000;
  }
  return s;
}

}  // namespace

TEST_CASE("transition matrix counts respondents present in both windows") {
  Panel p = panel_from_csv(std::string(kTinyHeader) +
                               "a,14,male,north,DEM,UNDECIDED\n"
                               "a,20,male,north,DEM,CAND_B\n"
                               "b,15,female,south,REP,CAND_A\n"  // absent after
                               "c,21,female,west,OTHER,CAND_A\n",  // absent before
                           tiny_lattice());
  TransitionMatrix m = transition_matrix(p, 16, 4, 21, 4);
  CHECK(m.count(Intent::Undecided, Intent::CandB) == 1);
  CHECK(m.respondents_both == 1);
  CHECK(m.respondents_before == 2);
  CHECK(m.respondents_after == 2);

  // no overlap in respondents: zero matrix
  Panel q = panel_from_csv(std::string(kTinyHeader) +
                               "a,14,male,north,DEM,CAND_A\n"
                               "b,21,female,south,REP,CAND_B\n",
                           tiny_lattice());
  TransitionMatrix z = transition_matrix(q, 16, 4, 21, 4);
  CHECK(z.respondents_both == 0);
  for (int b = 0; b < kNumIntents; ++b) {
    for (int a = 0; a < kNumIntents; ++a) {
      CHECK(z.counts[b][a] == 0);
    }
  }
}

TEST_CASE("transition matrix rejects overlapping windows") {
  Panel p = panel_from_csv(std::string(kTinyHeader) + "a,14,male,north,DEM,CAND_A\n",
                           tiny_lattice());
  CHECK_THROWS_WITH_AS(transition_matrix(p, 16, 4, 19, 4),
                       doctest::Contains("overlap"), ValidationError);
  // touching but disjoint is fine: before ends 16, after covers [17, 20]
  CHECK_NOTHROW(transition_matrix(p, 16, 4, 20, 4));
}

TEST_CASE("transition matrix uses the latest response per window") {
  Panel p = panel_from_csv(std::string(kTinyHeader) +
                               "a,13,male,north,DEM,CAND_A\n"
                               "a,16,male,north,DEM,UNDECIDED\n"
                               "a,20,male,north,DEM,CAND_B\n",
                           tiny_lattice());
  TransitionMatrix m = transition_matrix(p, 16, 4, 21, 4);
  CHECK(m.count(Intent::Undecided, Intent::CandB) == 1);
  CHECK(m.count(Intent::CandA, Intent::CandB) == 0);
}

TEST_CASE("transition CSV is a labeled 4x4") {
  Panel p = panel_from_csv(std::string(kTinyHeader) +
                               "a,14,male,north,DEM,UNDECIDED\n"
                               "a,20,male,north,DEM,CAND_B\n",
                           tiny_lattice());
  std::ostringstream out;
  write_transition_csv(out, transition_matrix(p, 16, 4, 21, 4));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "before\\after,CAND_A,CAND_B,OTHER,UNDECIDED");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("swing stats: drop and total variation") {
  EstimateSeries flat = series_of({{0, 0.5}, {1, 0.5}, {2, 0.5}});
  SwingStats s0 = swing_stats(flat, 0, 2);
  CHECK(s0.drop == 0.0);
  CHECK(s0.total_variation == 0.0);

  EstimateSeries s = series_of({{0, 0.54}, {1, 0.50}, {2, 0.52}});
  SwingStats st = swing_stats(s, 0, 2);
  CHECK(st.total_variation == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(st.drop == doctest::Approx(0.02).epsilon(1e-12));

  // MISSING endpoints are rejected
  CHECK_THROWS_AS(swing_stats(s, 0, 10), ValidationError);
}

TEST_CASE("swing stats: shift invariance and drop antisymmetry") {
  EstimateSeries s = series_of({{0, 0.54}, {1, 0.50}, {2, 0.52}, {4, 0.58}});
  EstimateSeries shifted = s;
  for (auto& d : shifted.days) {
    if (d.estimate) d.estimate = *d.estimate + 0.1;
  }
  CHECK(swing_stats(s, 0, 2).total_variation ==
        doctest::Approx(swing_stats(shifted, 0, 2).total_variation).epsilon(1e-12));
  CHECK(swing_stats(s, 0, 2).drop == doctest::Approx(-swing_stats(s, 2, 0).drop));
  // day 3 is MISSING: the 2-3 and 3-4 deltas are excluded from TV
  CHECK(swing_stats(s, 0, 4).total_variation == doctest::Approx(0.06).epsilon(1e-12));
}

TEST_CASE("swing reduction ratio") {
  EstimateSeries demo = series_of({{0, 0.54}, {1, 0.48}, {2, 0.52}});
  EstimateSeries same = demo;
  same.kind = ModelKind::DemoParty;
  CHECK(swing_reduction(demo, same).ratio == doctest::Approx(1.0));

  EstimateSeries constant =
      series_of({{0, 0.52}, {1, 0.52}, {2, 0.52}}, ModelKind::DemoParty);
  SwingComparison inf = swing_reduction(demo, constant);
  CHECK(inf.infinite());

  // only intersecting adjacent pairs count
  EstimateSeries sparse = series_of({{0, 0.5}, {2, 0.5}}, ModelKind::DemoParty);
  CHECK_THROWS_AS(swing_reduction(demo, sparse), ValidationError);

  EstimateSeries partial =
      series_of({{0, 0.52}, {1, 0.50}, {2, 0.51}, {10, 0.9}}, ModelKind::DemoParty);
  SwingComparison cmp = swing_reduction(demo, partial);
  CHECK(cmp.tv_demo == doctest::Approx(0.10).epsilon(1e-9));
  CHECK(cmp.tv_party == doctest::Approx(0.03).epsilon(1e-9));
}

TEST_CASE("simulated undecided-to-B flows dominate A-to-B switches") {
  SimConfig cfg;
  cfg.lattice = tiny_lattice();
  cfg.population.assign(cfg.lattice->size(), 1.0);
  cfg.party_shares = make_party_shares(0.4, 0.4, 0.2);
  cfg.support = {DaySchedule::constant(0.8), DaySchedule::constant(0.3),
                 DaySchedule::constant(0.55)};
  cfg.undecided = DaySchedule::constant(0.35);
  cfg.respondents = 4000;
  cfg.entry.assign(kNumDays, 0.0);
  for (int d = 0; d <= 16; ++d) cfg.entry[d] = 1.0;
  cfg.base_propensity = 0.3;
  cfg.propensity_multiplier = {DaySchedule::constant(1.0), DaySchedule::constant(1.0),
                               DaySchedule::constant(1.0)};
  // CAND_B's gains come from undecideds
  cfg.switch_rules = {{17, Intent::Undecided, Intent::CandB, 0.5},
                      {17, Intent::CandA, Intent::CandB, 0.05}};
  cfg.seed = 4242;

  Panel panel = simulate_panel(cfg);
  TransitionMatrix m = transition_matrix(panel, 16, 4, 21, 4);
  CHECK(m.count(Intent::Undecided, Intent::CandB) > m.count(Intent::CandA, Intent::CandB));
  CHECK(m.respondents_both > 500);
}
