// mrp — batch front door for panel ingestion, simulation, poststratified
// estimation, bootstrap bands, and swing diagnostics.
//
// Exit codes: 0 success, 1 validation error, 2 computation error.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mrp/bootstrap.hpp"
#include "mrp/diagnostics.hpp"
#include "mrp/estimator.hpp"
#include "mrp/simulator.hpp"

namespace {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mrp::ValidationError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return hex64(fnv1a64(buffer.str()));
}

// One JSON line per run: enough to reproduce it exactly.
struct Manifest {
  std::string path = "mrp_manifest.jsonl";
  std::string subcommand;
  json config = json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  void append() const {
    json entry;
    entry["subcommand"] = subcommand;
    entry["config_hash"] = hex64(fnv1a64(config.dump()));
    entry["config"] = config;
    entry["seed"] = seed;
    json in_hashes = json::object();
    for (const auto& p : inputs) in_hashes[p] = hash_file(p);
    entry["inputs"] = in_hashes;
    entry["outputs"] = outputs;
    std::ofstream out(path, std::ios::app);
    if (!out) {
      std::cerr << "warning: cannot append manifest to " << path << "\n";
      return;
    }
    out << entry.dump() << "\n";
  }
};

void print_warnings(const mrp::Warnings& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

void check_distinct_output(const std::string& out, const std::vector<std::string>& inputs) {
  for (const auto& in : inputs) {
    if (!out.empty() && out == in) {
      throw mrp::ValidationError("output path '" + out + "' collides with an input");
    }
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw mrp::ValidationError("cannot write output file: " + path);
  return out;
}

mrp::LatticePtr load_lattice(const std::string& lattice_path) {
  if (lattice_path.empty()) return mrp::default_demographic_lattice();
  std::ifstream in(lattice_path);
  if (!in) throw mrp::ValidationError("cannot open lattice file: " + lattice_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw mrp::ValidationError(lattice_path + ": " + e.what());
  }
  std::vector<mrp::FactorSpec> factors;
  try {
    for (const auto& jf : j) {
      factors.push_back(mrp::FactorSpec{jf.at("name").get<std::string>(),
                                        jf.at("levels").get<std::vector<std::string>>()});
    }
  } catch (const json::exception& e) {
    throw mrp::ValidationError(lattice_path + ": " + e.what());
  }
  return std::make_shared<const mrp::CellLattice>(std::move(factors));
}

// Weight tables as the subcommands need them: the file may be demographic or
// party-extended; party shares can extend a demographic file.
struct LoadedWeights {
  std::optional<mrp::WeightTable> demographic;
  std::optional<mrp::WeightTable> extended;
};

LoadedWeights load_weight_tables(const std::string& weights_path,
                                 const std::string& party_shares_text,
                                 const mrp::LatticePtr& lattice, bool need_demo,
                                 bool need_party, mrp::Warnings* warnings) {
  LoadedWeights out;
  if (mrp::weight_file_has_party(weights_path)) {
    if (!party_shares_text.empty()) {
      throw mrp::ValidationError(
          "--party-shares cannot be combined with a party-extended weight file");
    }
    mrp::LatticePtr extended = mrp::extend_lattice_with_party(lattice);
    out.extended = mrp::load_weights_file(weights_path, extended, warnings);
    if (need_demo) out.demographic = mrp::marginalize_party(*out.extended);
  } else {
    out.demographic = mrp::load_weights_file(weights_path, lattice, warnings);
    if (need_party) {
      if (party_shares_text.empty()) {
        throw mrp::ValidationError(
            "the demographics+partisanship model needs the party dimension: pass "
            "--party-shares DEM,REP,OTHER or a weight file with a party column");
      }
      mrp::PartyShares shares = mrp::parse_party_shares(party_shares_text, warnings);
      out.extended = mrp::extend_with_party(*out.demographic, shares);
    }
  }
  return out;
}

struct EstimateArgs {
  std::string responses, weights, party_shares, model = "demo", out, party_share_out;
  std::string lattice_path, window_rule = "latest", manifest = "mrp_manifest.jsonl";
  std::string election_eve, dump_model;
  int window = 4;
  int min_n = 100;
  int cut_day = -1;
  int threads = 1;
  int dump_model_day = mrp::kNumDays - 1;
};

mrp::WindowRule parse_window_rule(const std::string& s) {
  if (s == "latest") return mrp::WindowRule::LatestPerRespondent;
  if (s == "all") return mrp::WindowRule::AllResponses;
  throw mrp::ValidationError("unknown window rule '" + s + "' (latest|all)");
}

int run_estimate(const EstimateArgs& args) {
  mrp::Warnings warnings;
  bool want_demo = args.model == "demo" || args.model == "both";
  bool want_party = args.model == "demo+party" || args.model == "both";
  if (!want_demo && !want_party) {
    throw mrp::ValidationError("unknown model '" + args.model + "' (demo|demo+party|both)");
  }
  check_distinct_output(args.out, {args.responses, args.weights});
  check_distinct_output(args.party_share_out, {args.responses, args.weights, args.out});

  mrp::LatticePtr lattice = load_lattice(args.lattice_path);
  LoadedWeights tables =
      load_weight_tables(args.weights, args.party_shares, lattice,
                         want_demo || !args.party_share_out.empty(), want_party, &warnings);

  std::optional<mrp::DayAnchor> anchor;
  if (!args.election_eve.empty()) anchor = mrp::DayAnchor{args.election_eve};
  mrp::Panel panel = mrp::parse_panel_file(args.responses, lattice, &warnings, anchor);
  bool need_party_first = want_party || !args.party_share_out.empty();
  if (need_party_first) panel = mrp::fix_partisanship(panel, &warnings);
  if (args.cut_day >= 0) panel = mrp::filter_first_before(panel, args.cut_day);

  mrp::SeriesOptions opts;
  opts.window = args.window;
  opts.min_n = static_cast<std::size_t>(args.min_n);
  opts.window_rule = parse_window_rule(args.window_rule);
  opts.threads = args.threads;

  std::vector<mrp::EstimateSeries> series;
  if (want_demo) {
    mrp::ModelSpec spec;
    spec.lattice = lattice;
    series.push_back(mrp::daily_series(panel, spec, *tables.demographic,
                                       mrp::ModelKind::Demo, opts));
  }
  if (want_party) {
    mrp::ModelSpec spec;
    spec.lattice = lattice;
    spec.include_party = true;
    series.push_back(mrp::daily_series(panel, spec, *tables.extended,
                                       mrp::ModelKind::DemoParty, opts));
  }
  {
    auto out = open_output(args.out);
    mrp::write_series_csv(out, series);
  }

  if (!args.party_share_out.empty()) {
    mrp::ModelSpec spec;
    spec.lattice = lattice;
    mrp::EstimateSeries shares =
        mrp::partisan_share_series(panel, spec, *tables.demographic, opts);
    auto out = open_output(args.party_share_out);
    mrp::write_series_csv(out, {&shares, 1});
  }

  if (!args.dump_model.empty()) {
    // one day's fitted model(s), serialized losslessly
    json dump;
    dump["day"] = args.dump_model_day;
    mrp::ResponseSet rs =
        mrp::window_select(panel, args.dump_model_day, opts.window, opts.window_rule);
    std::vector<mrp::Observation> obs = mrp::two_party_subset(rs).observations;
    if (want_demo) {
      mrp::ModelSpec spec;
      spec.lattice = lattice;
      dump["models"]["DEMO"] = json::parse(mrp::fit_map(obs, spec).to_json());
    }
    if (want_party) {
      mrp::ModelSpec spec;
      spec.lattice = lattice;
      spec.include_party = true;
      dump["models"]["DEMO_PARTY"] = json::parse(mrp::fit_map(obs, spec).to_json());
    }
    auto out = open_output(args.dump_model);
    out << dump.dump(2) << "\n";
  }

  print_warnings(warnings);

  Manifest manifest;
  manifest.path = args.manifest;
  manifest.subcommand = "estimate";
  manifest.config = {{"model", args.model},       {"window", args.window},
                     {"min_n", args.min_n},       {"cut_day", args.cut_day},
                     {"window_rule", args.window_rule},
                     {"party_shares", args.party_shares},
                     {"election_eve", args.election_eve}};
  manifest.inputs = {args.responses, args.weights};
  manifest.outputs = {args.out};
  if (!args.party_share_out.empty()) manifest.outputs.push_back(args.party_share_out);
  manifest.append();
  return 0;
}

struct SimulateArgs {
  std::string config, out, truth_out, manifest = "mrp_manifest.jsonl";
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& args) {
  mrp::Warnings warnings;
  check_distinct_output(args.out, {args.config});
  check_distinct_output(args.truth_out, {args.config, args.out});

  mrp::SimConfig cfg = mrp::SimConfig::from_json_file(args.config, &warnings);
  if (args.seed) cfg.seed = *args.seed;

  mrp::Panel panel = mrp::simulate_panel(cfg);
  {
    auto out = open_output(args.out);
    mrp::write_responses_csv(out, panel);
  }
  if (!args.truth_out.empty()) {
    auto out = open_output(args.truth_out);
    mrp::write_truth_csv(out, mrp::true_series(cfg));
  }
  print_warnings(warnings);

  mrp::PanelStats stats = mrp::panel_stats(panel);
  std::cerr << "simulated " << stats.respondents << " respondents, " << stats.responses
            << " responses\n";

  Manifest manifest;
  manifest.path = args.manifest;
  manifest.subcommand = "simulate";
  manifest.seed = cfg.seed;
  manifest.config = {{"config_file", args.config}};
  manifest.inputs = {args.config};
  manifest.outputs = {args.out};
  if (!args.truth_out.empty()) manifest.outputs.push_back(args.truth_out);
  manifest.append();
  return 0;
}

struct BootstrapArgs {
  std::string responses, weights, party_shares, model = "demo", target = "support", out;
  std::string replicate_dump, lattice_path, window_rule = "latest";
  std::string manifest = "mrp_manifest.jsonl";
  int window = 4;
  int min_n = 100;
  int cut_day = -1;
  int threads = 1;
  int replicates = 200;
  std::uint64_t seed = 0;
  std::pair<double, double> percentiles{2.5, 97.5};
};

int run_bootstrap(const BootstrapArgs& args) {
  mrp::Warnings warnings;
  bool party_model = args.model == "demo+party";
  if (!party_model && args.model != "demo") {
    throw mrp::ValidationError("unknown model '" + args.model + "' (demo|demo+party)");
  }
  bool share_target = args.target == "party-share";
  if (!share_target && args.target != "support") {
    throw mrp::ValidationError("unknown target '" + args.target + "' (support|party-share)");
  }
  if (share_target && party_model) {
    throw mrp::ValidationError("the party-share series is demographics-adjusted only");
  }
  check_distinct_output(args.out, {args.responses, args.weights});

  mrp::LatticePtr lattice = load_lattice(args.lattice_path);
  LoadedWeights tables = load_weight_tables(args.weights, args.party_shares, lattice,
                                            !party_model, party_model, &warnings);

  mrp::Panel panel = mrp::parse_panel_file(args.responses, lattice, &warnings);
  if (party_model || share_target) panel = mrp::fix_partisanship(panel, &warnings);
  if (args.cut_day >= 0) panel = mrp::filter_first_before(panel, args.cut_day);

  mrp::SeriesOptions opts;
  opts.window = args.window;
  opts.min_n = static_cast<std::size_t>(args.min_n);
  opts.window_rule = parse_window_rule(args.window_rule);
  opts.threads = 1;  // parallelism lives at the replicate level

  mrp::ModelSpec spec;
  spec.lattice = lattice;
  spec.include_party = party_model;
  const mrp::WeightTable& weights = party_model ? *tables.extended : *tables.demographic;
  mrp::ModelKind kind = party_model ? mrp::ModelKind::DemoParty : mrp::ModelKind::Demo;

  mrp::SeriesFn series_fn;
  if (share_target) {
    series_fn = [&](const mrp::Panel& p, std::span<const std::uint32_t> idx) {
      return mrp::partisan_share_series(p, idx, spec, weights, opts);
    };
  } else {
    series_fn = [&](const mrp::Panel& p, std::span<const std::uint32_t> idx) {
      return mrp::daily_series(p, idx, spec, weights, kind, opts);
    };
  }

  mrp::BootstrapConfig cfg;
  cfg.replicates = args.replicates;
  cfg.seed = args.seed;
  cfg.percentile_lo = args.percentiles.first;
  cfg.percentile_hi = args.percentiles.second;
  cfg.threads = args.threads;

  std::ofstream dump;
  std::ostream* dump_ptr = nullptr;
  if (!args.replicate_dump.empty()) {
    dump = open_output(args.replicate_dump);
    dump_ptr = &dump;
  }

  mrp::EstimateSeries series = mrp::with_bootstrap_bands(panel, series_fn, cfg, dump_ptr);
  {
    auto out = open_output(args.out);
    mrp::write_series_csv(out, {&series, 1});
  }
  print_warnings(warnings);

  Manifest manifest;
  manifest.path = args.manifest;
  manifest.subcommand = "bootstrap";
  manifest.seed = args.seed;
  manifest.config = {{"model", args.model},           {"target", args.target},
                     {"window", args.window},         {"min_n", args.min_n},
                     {"cut_day", args.cut_day},       {"replicates", args.replicates},
                     {"percentile_lo", cfg.percentile_lo},
                     {"percentile_hi", cfg.percentile_hi},
                     {"party_shares", args.party_shares}};
  manifest.inputs = {args.responses, args.weights};
  manifest.outputs = {args.out};
  if (!args.replicate_dump.empty()) manifest.outputs.push_back(args.replicate_dump);
  manifest.append();
  return 0;
}

struct DiagnoseArgs {
  std::string series, responses, lattice_path, out, transitions_out;
  std::string manifest = "mrp_manifest.jsonl";
  std::pair<int, int> before{-1, -1}, after{-1, -1};
  int t0 = -1, t1 = -1;
};

int run_diagnose(const DiagnoseArgs& args) {
  mrp::Warnings warnings;
  bool want_swings = !args.series.empty();
  bool want_transitions = !args.responses.empty();
  if (!want_swings && !want_transitions) {
    throw mrp::ValidationError("diagnose needs --series and/or --responses with windows");
  }

  json report = json::object();
  std::vector<std::string> inputs;

  if (want_swings) {
    inputs.push_back(args.series);
    std::ifstream in(args.series);
    if (!in) throw mrp::ValidationError("cannot open series file: " + args.series);
    std::vector<mrp::EstimateSeries> all = mrp::read_series_csv(in, args.series);
    json stats = json::array();
    for (const auto& s : all) {
      json js;
      js["model_kind"] = std::string(mrp::to_string(s.kind));
      if (args.t0 >= 0 && args.t1 >= 0) {
        mrp::SwingStats sw = mrp::swing_stats(s, args.t0, args.t1);
        js["drop"] = sw.drop;
        js["total_variation"] = sw.total_variation;
        js["t0"] = args.t0;
        js["t1"] = args.t1;
      } else {
        // no endpoints: still report the series TV
        double tv = 0.0;
        for (int t = 0; t + 1 < mrp::kNumDays; ++t) {
          const auto& a = s.days[static_cast<std::size_t>(t)];
          const auto& b = s.days[static_cast<std::size_t>(t + 1)];
          if (a.estimate && b.estimate) tv += std::abs(*b.estimate - *a.estimate);
        }
        js["total_variation"] = tv;
      }
      stats.push_back(std::move(js));
    }
    report["series"] = std::move(stats);

    const mrp::EstimateSeries* demo = nullptr;
    const mrp::EstimateSeries* party = nullptr;
    for (const auto& s : all) {
      if (s.kind == mrp::ModelKind::Demo) demo = &s;
      if (s.kind == mrp::ModelKind::DemoParty) party = &s;
    }
    if (demo && party) {
      mrp::SwingComparison cmp = mrp::swing_reduction(*demo, *party);
      json jc;
      jc["tv_demo"] = cmp.tv_demo;
      jc["tv_party"] = cmp.tv_party;
      if (cmp.infinite()) {
        jc["swing_reduction"] = "INFINITE";
      } else {
        jc["swing_reduction"] = cmp.ratio;
      }
      report["comparison"] = std::move(jc);
    }
  }

  if (want_transitions) {
    if (args.before.first < 0 || args.after.first < 0) {
      throw mrp::ValidationError("transitions need --before t,w and --after t,w");
    }
    inputs.push_back(args.responses);
    mrp::LatticePtr lattice = load_lattice(args.lattice_path);
    mrp::Panel panel = mrp::parse_panel_file(args.responses, lattice, &warnings);
    mrp::TransitionMatrix m =
        mrp::transition_matrix(panel, args.before.first, args.before.second,
                               args.after.first, args.after.second);
    if (!args.transitions_out.empty()) {
      auto out = open_output(args.transitions_out);
      mrp::write_transition_csv(out, m);
    } else {
      mrp::write_transition_csv(std::cout, m);
    }
    report["transitions"] = {{"respondents_before", m.respondents_before},
                             {"respondents_after", m.respondents_after},
                             {"respondents_both", m.respondents_both}};
  }

  if (!args.out.empty()) {
    auto out = open_output(args.out);
    out << report.dump(2) << "\n";
  } else {
    std::cout << report.dump(2) << "\n";
  }
  print_warnings(warnings);

  Manifest manifest;
  manifest.path = args.manifest;
  manifest.subcommand = "diagnose";
  manifest.config = {{"t0", args.t0},
                     {"t1", args.t1},
                     {"before", {args.before.first, args.before.second}},
                     {"after", {args.after.first, args.after.second}}};
  manifest.inputs = inputs;
  if (!args.out.empty()) manifest.outputs.push_back(args.out);
  if (!args.transitions_out.empty()) manifest.outputs.push_back(args.transitions_out);
  manifest.append();
  return 0;
}

struct ValidateArgs {
  std::string responses, weights, sim_config, lattice_path;
};

int run_validate(const ValidateArgs& args) {
  mrp::Warnings warnings;
  if (args.responses.empty() && args.weights.empty() && args.sim_config.empty()) {
    throw mrp::ValidationError("validate needs --responses, --weights, or --sim-config");
  }
  mrp::LatticePtr lattice = load_lattice(args.lattice_path);
  if (!args.weights.empty()) {
    if (mrp::weight_file_has_party(args.weights)) {
      mrp::load_weights_file(args.weights, mrp::extend_lattice_with_party(lattice),
                             &warnings);
      std::cout << "weights: ok (party-extended, "
                << lattice->size() * mrp::kNumParties << " cells)\n";
    } else {
      mrp::load_weights_file(args.weights, lattice, &warnings);
      std::cout << "weights: ok (" << lattice->size() << " cells)\n";
    }
  }
  if (!args.responses.empty()) {
    mrp::Panel panel = mrp::parse_panel_file(args.responses, lattice, &warnings);
    mrp::PanelStats stats = mrp::panel_stats(panel);
    std::cout << "responses: ok (" << stats.respondents << " respondents, "
              << stats.responses << " responses, mean " << stats.mean_responses()
              << " per respondent)\n";
  }
  if (!args.sim_config.empty()) {
    mrp::SimConfig cfg = mrp::SimConfig::from_json_file(args.sim_config, &warnings);
    std::cout << "sim-config: ok (" << cfg.lattice->size() << " cells, "
              << cfg.respondents << " respondents)\n";
  }
  print_warnings(warnings);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MRP poll-adjustment engine over a demographic x party cell lattice"};
  app.require_subcommand(1);

  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "Daily poststratified support series from a response panel");
  estimate->add_option("--responses", est.responses, "response CSV")->required();
  estimate->add_option("--weights", est.weights, "electorate weight CSV")->required();
  estimate->add_option("--party-shares", est.party_shares,
                       "DEM,REP,OTHER shares extending a demographic weight table");
  estimate->add_option("--model", est.model, "demo|demo+party|both");
  estimate->add_option("--window", est.window, "moving window length (days)");
  estimate->add_option("--min-n", est.min_n, "minimum window observations");
  estimate->add_option("--cut-day", est.cut_day, "keep respondents first seen before this day");
  estimate->add_option("--window-rule", est.window_rule, "latest|all responses per respondent");
  estimate->add_option("--threads", est.threads, "day-level parallelism");
  estimate->add_option("--election-eve", est.election_eve,
                       "map a `date` column to days with this day-44 anchor (YYYY-MM-DD)");
  estimate->add_option("--dump-model", est.dump_model, "write one day's fitted model JSON");
  estimate->add_option("--dump-model-day", est.dump_model_day, "day for --dump-model");
  estimate->add_option("--lattice", est.lattice_path, "lattice JSON (default: built-in)");
  estimate->add_option("--out", est.out, "series CSV output")->required();
  estimate->add_option("--party-share-out", est.party_share_out,
                       "also write the Democrat share-of-responders series");
  estimate->add_option("--manifest", est.manifest, "manifest JSONL path");

  SimulateArgs sim;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Draw a synthetic panel from a generative config");
  simulate->add_option("--config", sim.config, "simulator JSON config")->required();
  std::uint64_t sim_seed = 0;
  CLI::Option* sim_seed_opt =
      simulate->add_option("--seed", sim_seed, "override the config seed");
  simulate->add_option("--out", sim.out, "responses CSV output")->required();
  simulate->add_option("--truth-out", sim.truth_out, "analytic truth CSV output");
  simulate->add_option("--manifest", sim.manifest, "manifest JSONL path");

  BootstrapArgs boot;
  CLI::App* bootstrap = app.add_subcommand(
      "bootstrap", "Cluster-bootstrap confidence bands for a series");
  bootstrap->add_option("--responses", boot.responses, "response CSV")->required();
  bootstrap->add_option("--weights", boot.weights, "electorate weight CSV")->required();
  bootstrap->add_option("--party-shares", boot.party_shares, "DEM,REP,OTHER shares");
  bootstrap->add_option("--model", boot.model, "demo|demo+party");
  bootstrap->add_option("--target", boot.target, "support|party-share");
  bootstrap->add_option("--window", boot.window, "moving window length (days)");
  bootstrap->add_option("--min-n", boot.min_n, "minimum window observations");
  bootstrap->add_option("--cut-day", boot.cut_day, "entry filter day");
  bootstrap->add_option("--window-rule", boot.window_rule, "latest|all");
  bootstrap->add_option("--replicates", boot.replicates, "bootstrap replicates");
  bootstrap->add_option("--seed", boot.seed, "bootstrap RNG seed");
  bootstrap->add_option("--threads", boot.threads, "replicate-level parallelism");
  bootstrap->add_option("--percentiles", boot.percentiles, "band percentiles (lo hi)");
  bootstrap->add_option("--lattice", boot.lattice_path, "lattice JSON");
  bootstrap->add_option("--out", boot.out, "series+bands CSV output")->required();
  bootstrap->add_option("--replicate-dump", boot.replicate_dump,
                        "write replicate,day,estimate CSV");
  bootstrap->add_option("--manifest", boot.manifest, "manifest JSONL path");

  DiagnoseArgs diag;
  CLI::App* diagnose =
      app.add_subcommand("diagnose", "Swing statistics and intent transitions");
  diagnose->add_option("--series", diag.series, "series CSV from estimate/bootstrap");
  diagnose->add_option("--t0", diag.t0, "drop start day");
  diagnose->add_option("--t1", diag.t1, "drop end day");
  diagnose->add_option("--responses", diag.responses, "response CSV for transitions");
  diagnose->add_option("--before", diag.before, "before window t,w")->delimiter(',');
  diagnose->add_option("--after", diag.after, "after window t,w")->delimiter(',');
  diagnose->add_option("--lattice", diag.lattice_path, "lattice JSON");
  diagnose->add_option("--out", diag.out, "stats JSON output (default stdout)");
  diagnose->add_option("--transitions-out", diag.transitions_out, "transition CSV output");
  diagnose->add_option("--manifest", diag.manifest, "manifest JSONL path");

  ValidateArgs val;
  CLI::App* validate =
      app.add_subcommand("validate", "Schema-check inputs without computing");
  validate->add_option("--responses", val.responses, "response CSV");
  validate->add_option("--weights", val.weights, "weight CSV");
  validate->add_option("--sim-config", val.sim_config, "simulator JSON config");
  validate->add_option("--lattice", val.lattice_path, "lattice JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (estimate->parsed()) return run_estimate(est);
    if (simulate->parsed()) {
      if (sim_seed_opt->count() > 0) sim.seed = sim_seed;
      return run_simulate(sim);
    }
    if (bootstrap->parsed()) return run_bootstrap(boot);
    if (diagnose->parsed()) return run_diagnose(diag);
    if (validate->parsed()) return run_validate(val);
  } catch (const mrp::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const mrp::ComputationError& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
