#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mrp {

// Fielding period: day 0 is the first day the poll is open, day 44 is
// election eve.
inline constexpr int kNumDays = 45;

enum class Party : std::uint8_t { Dem = 0, Rep = 1, Other = 2 };
inline constexpr int kNumParties = 3;

enum class Intent : std::uint8_t { CandA = 0, CandB = 1, Other = 2, Undecided = 3 };
inline constexpr int kNumIntents = 4;

// Input rows that violate a schema or an invariant.  Carries enough context
// (file, row, field) to be actionable; the CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation that started from valid inputs but could not finish
// (e.g. the optimizer failed to reach its gradient tolerance).  Exit code 2.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergenceError : public ComputationError {
 public:
  NonConvergenceError(const std::string& what, double grad_inf_norm)
      : ComputationError(what), grad_inf_norm_(grad_inf_norm) {}
  double grad_inf_norm() const { return grad_inf_norm_; }

 private:
  double grad_inf_norm_;
};

// Non-fatal diagnostics (duplicate rows, off-by-rounding weight totals, ...).
// Callers that care pass a sink; everyone else passes nullptr.
using Warnings = std::vector<std::string>;

std::string_view to_string(Party p);
std::string_view to_string(Intent i);
Party party_from_string(std::string_view s);
Intent intent_from_string(std::string_view s);
std::optional<Party> try_party_from_string(std::string_view s);
std::optional<Intent> try_intent_from_string(std::string_view s);

// Trims ASCII whitespace from both ends; labels are matched case-sensitively
// after trimming.
std::string_view trim(std::string_view s);

double sigmoid(double eta);

// log(1 + exp(eta)) without overflow for large |eta|.
double log1p_exp(double eta);

// Compensated (Kahan) accumulator.  Weight normalization and
// poststratification sums must hold to ~1e-12 over several thousand terms.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace mrp
