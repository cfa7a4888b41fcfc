#include "mrp/common.hpp"

#include <cctype>
#include <cmath>

namespace mrp {

std::string_view to_string(Party p) {
  switch (p) {
    case Party::Dem: return "DEM";
    case Party::Rep: return "REP";
    case Party::Other: return "OTHER";
  }
  return "?";
}

std::string_view to_string(Intent i) {
  switch (i) {
    case Intent::CandA: return "CAND_A";
    case Intent::CandB: return "CAND_B";
    case Intent::Other: return "OTHER";
    case Intent::Undecided: return "UNDECIDED";
  }
  return "?";
}

std::optional<Party> try_party_from_string(std::string_view s) {
  if (s == "DEM") return Party::Dem;
  if (s == "REP") return Party::Rep;
  if (s == "OTHER") return Party::Other;
  return std::nullopt;
}

std::optional<Intent> try_intent_from_string(std::string_view s) {
  if (s == "CAND_A") return Intent::CandA;
  if (s == "CAND_B") return Intent::CandB;
  if (s == "OTHER") return Intent::Other;
  if (s == "UNDECIDED") return Intent::Undecided;
  return std::nullopt;
}

Party party_from_string(std::string_view s) {
  if (auto p = try_party_from_string(s)) return *p;
  throw ValidationError("unknown party label '" + std::string(s) +
                        "' (expected DEM, REP or OTHER)");
}

Intent intent_from_string(std::string_view s) {
  if (auto i = try_intent_from_string(s)) return *i;
  throw ValidationError("unknown intent label '" + std::string(s) +
                        "' (expected CAND_A, CAND_B, OTHER or UNDECIDED)");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double sigmoid(double eta) {
  if (eta >= 0.0) {
    return 1.0 / (1.0 + std::exp(-eta));
  }
  double e = std::exp(eta);
  return e / (1.0 + e);
}

double log1p_exp(double eta) {
  if (eta > 0.0) return eta + std::log1p(std::exp(-eta));
  return std::log1p(std::exp(eta));
}

}  // namespace mrp
