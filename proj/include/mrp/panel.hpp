#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrp/lattice.hpp"

namespace mrp {

// One labeled two-party observation: cell position in the demographic
// lattice, optional party (index into Party, -1 when not attached), and
// y = 1 for CAND_A, 0 for CAND_B.
struct Observation {
  std::uint32_t cell;
  std::int16_t party;
  std::uint8_t y;
};

struct Response {
  int day;
  Intent intent;
  std::optional<Party> party_reported;
  // Position in the input stream, within the respondent; breaks same-day
  // ties deterministically.
  std::uint32_t seq;
};

struct Respondent {
  std::string id;
  std::uint32_t cell;  // demographic lattice position, constant across responses
  std::optional<Party> party_first;
  std::optional<int> first_response_day;
  std::vector<Response> responses;  // ordered by (day, seq)
};

// An immutable validated panel.  Respondents keep their stream order; all
// slicing operations below are pure and safe to run concurrently.
class Panel {
 public:
  Panel(LatticePtr lattice, std::vector<Respondent> respondents,
        std::size_t duplicate_rows_dropped = 0);

  const LatticePtr& lattice() const { return lattice_; }
  std::span<const Respondent> respondents() const { return respondents_; }
  const Respondent& respondent(std::size_t i) const { return respondents_[i]; }
  std::size_t size() const { return respondents_.size(); }
  std::size_t response_count() const { return response_count_; }
  std::size_t duplicate_rows_dropped() const { return duplicate_rows_dropped_; }

 private:
  LatticePtr lattice_;
  std::vector<Respondent> respondents_;
  std::size_t duplicate_rows_dropped_;
  std::size_t response_count_;
};

// Maps an ISO date (YYYY-MM-DD) to a fielding day given the election-eve
// date (day 44).
struct DayAnchor {
  std::string election_eve;
  int day_of(std::string_view iso_date) const;
};

// Reads the response CSV (columns: respondent_id, day, one per factor,
// party, intent).  Bit-identical duplicate rows are dropped and counted; an
// empty party field means "no party reported on this response".  Rows may
// carry a `date` column instead of `day` when an anchor is supplied.
Panel parse_panel(std::istream& in, const std::string& name, LatticePtr lattice,
                  Warnings* warnings = nullptr,
                  const std::optional<DayAnchor>& anchor = std::nullopt);
Panel parse_panel_file(const std::string& path, LatticePtr lattice,
                       Warnings* warnings = nullptr,
                       const std::optional<DayAnchor>& anchor = std::nullopt);

void write_responses_csv(std::ostream& out, const Panel& panel);

// Sets party_first from each respondent's earliest response carrying a party
// report (same-day ties: first in stream order, with a warning when the
// reports disagree).  Later party reports stay in the raw records but are
// never consulted by estimators.  Idempotent.
Panel fix_partisanship(const Panel& panel, Warnings* warnings = nullptr);

// Keeps exactly the respondents whose first response predates cut_day
// (strict), with ALL their responses, including later ones.  cut_day may be
// kNumDays to keep everyone.
Panel filter_first_before(const Panel& panel, int cut_day);

enum class WindowRule {
  LatestPerRespondent,  // one response per respondent: the latest in window
  AllResponses,         // every in-window response
};

struct SelectedResponse {
  std::uint32_t respondent;  // index into the panel
  std::uint32_t cell;
  int day;
  Intent intent;
  std::optional<Party> party_first;
};

struct ResponseSet {
  int day = 0;
  int window = 1;
  std::vector<SelectedResponse> selected;
};

// Selects responses with day in [t-w+1, t].  Under the default rule each
// respondent contributes their latest in-window response (same-day tie: last
// in stream order).
ResponseSet window_select(const Panel& panel, int t, int w,
                          WindowRule rule = WindowRule::LatestPerRespondent);

// Same, over a caller-chosen multiset of respondent indices (bootstrap
// replicates resample respondents with replacement).
ResponseSet window_select(const Panel& panel, std::span<const std::uint32_t> respondents,
                          int t, int w, WindowRule rule = WindowRule::LatestPerRespondent);

struct TwoPartyObservations {
  std::vector<Observation> observations;
  std::size_t dropped = 0;  // OTHER + UNDECIDED responses
};

// Keeps CAND_A/CAND_B responses as labeled observations (y = 1 for CAND_A)
// with the respondent's cell and party_first attached.
TwoPartyObservations two_party_subset(const ResponseSet& set);

struct PanelStats {
  std::size_t respondents = 0;
  std::size_t responses = 0;
  // histogram[n] = number of respondents with exactly n responses
  std::vector<std::size_t> histogram;

  double mean_responses() const {
    return respondents == 0 ? 0.0 : static_cast<double>(responses) / respondents;
  }
  std::size_t count_with_at_least(std::size_t k) const;
};

PanelStats panel_stats(const Panel& panel);

}  // namespace mrp
