#include "mrp/panel.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "mrp/csv.hpp"

namespace mrp {

Panel::Panel(LatticePtr lattice, std::vector<Respondent> respondents,
             std::size_t duplicate_rows_dropped)
    : lattice_(std::move(lattice)),
      respondents_(std::move(respondents)),
      duplicate_rows_dropped_(duplicate_rows_dropped) {
  std::unordered_set<std::string> ids;
  response_count_ = 0;
  for (const auto& r : respondents_) {
    if (!ids.insert(r.id).second) {
      throw ValidationError("duplicate respondent id '" + r.id + "'");
    }
    if (r.cell >= lattice_->size()) {
      throw ValidationError("respondent '" + r.id + "': cell position out of range");
    }
    for (const auto& resp : r.responses) {
      if (resp.day < 0 || resp.day >= kNumDays) {
        throw ValidationError("respondent '" + r.id + "': response day " +
                              std::to_string(resp.day) + " outside [0, " +
                              std::to_string(kNumDays - 1) + "]");
      }
    }
    if (!std::is_sorted(r.responses.begin(), r.responses.end(),
                        [](const Response& a, const Response& b) {
                          return std::pair(a.day, a.seq) < std::pair(b.day, b.seq);
                        })) {
      throw ValidationError("respondent '" + r.id + "': responses not in (day, seq) order");
    }
    if (!r.responses.empty()) {
      if (!r.first_response_day || *r.first_response_day != r.responses.front().day) {
        throw ValidationError("respondent '" + r.id +
                              "': first_response_day does not match responses");
      }
    }
    response_count_ += r.responses.size();
  }
}

namespace {

// Days since the civil epoch; standard Gregorian conversion.
long civil_days(int y, int m, int d) {
  y -= m <= 2;
  long era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

long parse_iso_date(std::string_view iso) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(std::string(iso).c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 ||
      m > 12 || d < 1 || d > 31) {
    throw ValidationError("bad ISO date '" + std::string(iso) + "' (want YYYY-MM-DD)");
  }
  return civil_days(y, m, d);
}

}  // namespace

int DayAnchor::day_of(std::string_view iso_date) const {
  long eve = parse_iso_date(election_eve);
  long day = parse_iso_date(iso_date);
  return kNumDays - 1 - static_cast<int>(eve - day);
}

Panel parse_panel(std::istream& in, const std::string& name, LatticePtr lattice,
                  Warnings* warnings, const std::optional<DayAnchor>& anchor) {
  std::vector<std::string> required{"respondent_id", anchor ? "date" : "day"};
  for (const auto& f : lattice->factors()) required.push_back(f.name);
  required.push_back("party");
  required.push_back("intent");
  csv::Reader reader(in, name, required, /*exact=*/true);

  std::vector<Respondent> respondents;
  std::unordered_map<std::string, std::size_t> by_id;
  std::unordered_set<std::string> seen_rows;
  std::size_t duplicates = 0;
  CellKey key(lattice->num_factors());

  while (reader.next()) {
    const std::string& id = reader.field("respondent_id");
    if (id.empty()) reader.fail("empty respondent_id");

    int day;
    if (anchor) {
      try {
        day = anchor->day_of(reader.field("date"));
      } catch (const ValidationError& e) {
        reader.fail(e.what());
      }
    } else {
      day = reader.parse_int("day");
    }
    if (day < 0 || day >= kNumDays) {
      reader.fail("day " + std::to_string(day) + " outside [0, " +
                  std::to_string(kNumDays - 1) + "]");
    }

    for (std::size_t f = 0; f < lattice->num_factors(); ++f) {
      try {
        key[f] = lattice->level_index(f, reader.field(lattice->factor(f).name));
      } catch (const ValidationError& e) {
        reader.fail(e.what());
      }
    }
    std::uint32_t cell = static_cast<std::uint32_t>(lattice->position(key));

    const std::string& party_text = reader.field("party");
    std::optional<Party> party;
    if (!party_text.empty()) {
      party = try_party_from_string(party_text);
      if (!party) reader.fail("unknown party label '" + party_text + "'");
    }

    auto intent = try_intent_from_string(reader.field("intent"));
    if (!intent) reader.fail("unknown intent label '" + reader.field("intent") + "'");

    // Bit-identical duplicate rows are dropped (counted); same-day rows that
    // differ in any field are all kept.
    std::string row_key = id + '\x1f' + std::to_string(day) + '\x1f' +
                          std::to_string(cell) + '\x1f' + party_text + '\x1f' +
                          reader.field("intent");
    if (!seen_rows.insert(row_key).second) {
      ++duplicates;
      continue;
    }

    auto [it, inserted] = by_id.emplace(id, respondents.size());
    if (inserted) {
      respondents.push_back(Respondent{id, cell, std::nullopt, std::nullopt, {}});
    }
    Respondent& r = respondents[it->second];
    if (r.cell != cell) {
      reader.fail("respondent '" + id + "' has inconsistent demographics across rows");
    }
    r.responses.push_back(
        Response{day, *intent, party, static_cast<std::uint32_t>(r.responses.size())});
  }

  for (auto& r : respondents) {
    std::sort(r.responses.begin(), r.responses.end(),
              [](const Response& a, const Response& b) {
                return std::pair(a.day, a.seq) < std::pair(b.day, b.seq);
              });
    if (!r.responses.empty()) r.first_response_day = r.responses.front().day;
  }

  if (warnings && duplicates > 0) {
    warnings->push_back(name + ": dropped " + std::to_string(duplicates) +
                        " duplicate row(s)");
  }
  return Panel(std::move(lattice), std::move(respondents), duplicates);
}

Panel parse_panel_file(const std::string& path, LatticePtr lattice, Warnings* warnings,
                       const std::optional<DayAnchor>& anchor) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open response file: " + path);
  return parse_panel(in, path, std::move(lattice), warnings, anchor);
}

void write_responses_csv(std::ostream& out, const Panel& panel) {
  const CellLattice& lat = *panel.lattice();
  out << "respondent_id,day";
  for (std::size_t f = 0; f < lat.num_factors(); ++f) out << ',' << lat.factor(f).name;
  out << ",party,intent\n";
  for (const auto& r : panel.respondents()) {
    for (const auto& resp : r.responses) {
      out << r.id << ',' << resp.day;
      for (std::size_t f = 0; f < lat.num_factors(); ++f) {
        out << ',' << lat.factor(f).levels[lat.level_at(r.cell, f)];
      }
      out << ',';
      if (resp.party_reported) out << to_string(*resp.party_reported);
      out << ',' << to_string(resp.intent) << '\n';
    }
  }
}

Panel fix_partisanship(const Panel& panel, Warnings* warnings) {
  std::vector<Respondent> out(panel.respondents().begin(), panel.respondents().end());
  for (auto& r : out) {
    const Response* first_report = nullptr;
    for (const auto& resp : r.responses) {  // (day, seq) order
      if (resp.party_reported) {
        first_report = &resp;
        break;
      }
    }
    if (!first_report) {
      throw ValidationError("respondent '" + r.id + "' has no party report on any response");
    }
    r.party_first = *first_report->party_reported;
    if (warnings) {
      for (const auto& resp : r.responses) {
        if (resp.day == first_report->day && resp.party_reported &&
            *resp.party_reported != *first_report->party_reported) {
          warnings->push_back("respondent '" + r.id + "': conflicting party reports on day " +
                              std::to_string(resp.day) + "; kept first in stream order");
          break;
        }
      }
    }
  }
  return Panel(panel.lattice(), std::move(out), panel.duplicate_rows_dropped());
}

Panel filter_first_before(const Panel& panel, int cut_day) {
  if (cut_day < 0 || cut_day > kNumDays) {
    throw ValidationError("cut_day " + std::to_string(cut_day) + " outside [0, " +
                          std::to_string(kNumDays) + "]");
  }
  std::vector<Respondent> kept;
  for (const auto& r : panel.respondents()) {
    if (r.first_response_day && *r.first_response_day < cut_day) kept.push_back(r);
  }
  return Panel(panel.lattice(), std::move(kept), panel.duplicate_rows_dropped());
}

namespace {

void select_for(const Panel& panel, std::uint32_t respondent_index, int lo, int t,
                WindowRule rule, std::vector<SelectedResponse>& out) {
  const Respondent& r = panel.respondent(respondent_index);
  const SelectedResponse base{respondent_index, r.cell, 0, Intent::Undecided, r.party_first};
  if (rule == WindowRule::LatestPerRespondent) {
    // Responses are (day, seq)-sorted, so the last one with day <= t wins
    // same-day ties by stream order.
    const Response* pick = nullptr;
    for (const auto& resp : r.responses) {
      if (resp.day > t) break;
      if (resp.day >= lo) pick = &resp;
    }
    if (pick) {
      SelectedResponse s = base;
      s.day = pick->day;
      s.intent = pick->intent;
      out.push_back(s);
    }
  } else {
    for (const auto& resp : r.responses) {
      if (resp.day > t) break;
      if (resp.day >= lo) {
        SelectedResponse s = base;
        s.day = resp.day;
        s.intent = resp.intent;
        out.push_back(s);
      }
    }
  }
}

}  // namespace

ResponseSet window_select(const Panel& panel, std::span<const std::uint32_t> respondents,
                          int t, int w, WindowRule rule) {
  if (w < 1) throw ValidationError("window length must be >= 1");
  if (t < 0 || t >= kNumDays) {
    throw ValidationError("day " + std::to_string(t) + " outside [0, " +
                          std::to_string(kNumDays - 1) + "]");
  }
  ResponseSet set;
  set.day = t;
  set.window = w;
  int lo = t - w + 1;
  for (std::uint32_t idx : respondents) {
    select_for(panel, idx, lo, t, rule, set.selected);
  }
  return set;
}

ResponseSet window_select(const Panel& panel, int t, int w, WindowRule rule) {
  std::vector<std::uint32_t> all(panel.size());
  std::iota(all.begin(), all.end(), 0u);
  return window_select(panel, all, t, w, rule);
}

TwoPartyObservations two_party_subset(const ResponseSet& set) {
  TwoPartyObservations out;
  for (const auto& s : set.selected) {
    if (s.intent == Intent::CandA || s.intent == Intent::CandB) {
      std::int16_t party =
          s.party_first ? static_cast<std::int16_t>(*s.party_first) : std::int16_t{-1};
      out.observations.push_back(
          Observation{s.cell, party, static_cast<std::uint8_t>(s.intent == Intent::CandA)});
    } else {
      ++out.dropped;
    }
  }
  return out;
}

std::size_t PanelStats::count_with_at_least(std::size_t k) const {
  std::size_t n = 0;
  for (std::size_t c = k; c < histogram.size(); ++c) n += histogram[c];
  return n;
}

PanelStats panel_stats(const Panel& panel) {
  PanelStats stats;
  stats.respondents = panel.size();
  stats.responses = panel.response_count();
  for (const auto& r : panel.respondents()) {
    std::size_t n = r.responses.size();
    if (stats.histogram.size() <= n) stats.histogram.resize(n + 1, 0);
    ++stats.histogram[n];
  }
  return stats;
}

}  // namespace mrp
