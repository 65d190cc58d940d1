#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amo/errors.hpp"

namespace amo {

using Int = std::int64_t;
using Wide = __int128;

struct Convergent {
  Int p = 0;
  Int q = 1;
};

/// Options controlling how far a continued-fraction expansion is carried.
struct FrequencyOptions {
  /// Largest admissible denominator. Expansion stops (and the model is marked
  /// truncated) before the first q_n exceeding it.
  Int q_cap = 1'000'000;
};

/// An irrational frequency alpha in (0,1) given by its continued-fraction
/// digits alpha = [0; a_1, a_2, ...].
///
/// Index convention: q_0 = 1, p_0 = 0, and q_n, p_n for n = 1..depth() are the
/// convergents of the digits. The deepest convergent P/Q built from *all*
/// retained digits is the working value of alpha; every fractional part
/// {m alpha} is computed exactly from it in integer arithmetic. The model is
/// immutable after construction.
class FrequencyModel {
 public:
  FrequencyModel() = default;

  const std::vector<Int>& digits() const { return digits_; }
  /// n_max: the largest exposed convergent index.
  std::size_t depth() const { return depth_; }
  Int q(std::size_t n) const;
  Int p(std::size_t n) const;
  /// Convergents for n = 0..depth().
  const std::vector<Convergent>& convergents() const { return conv_; }

  /// Delta_n = ||q_n alpha|| for n = 0..depth()-1 (the range where q_{n+1} is stored).
  double delta(std::size_t n) const;
  const std::vector<double>& deltas() const { return deltas_; }
  /// Integer numerator of Delta_n over precision_q().
  Wide delta_numerator(std::size_t n) const;

  /// ln q_{n+1} / q_n for n = 1..depth()-1 (entry i holds n = i + 1).
  const std::vector<double>& beta_sequence() const { return beta_seq_; }

  double value() const { return value_; }
  /// |alpha - P/Q| < 1/Q^2 for any irrational continuation of the digits.
  double value_error_bound() const;
  Int precision_p() const { return conv_all_.back().p; }
  Int precision_q() const { return conv_all_.back().q; }

  bool truncated() const { return truncated_; }
  /// Human-readable note on why digits were dropped, empty if not truncated.
  const std::string& truncation_note() const { return truncation_note_; }

  /// (m * P) mod Q in [0, Q).
  Wide residue(Wide m) const;
  /// {m alpha} in [0, 1), exact up to the final rounding to double.
  double frac_multiple(Wide m) const;
  /// ||m alpha||_{R/Z} computed exactly, rounded to double.
  double dist_multiple(Wide m) const;
  /// Integer numerator of ||m alpha|| over precision_q().
  Wide dist_numerator(Wide m) const;

  friend FrequencyModel build_frequency(const std::vector<Int>& digits, std::size_t n_max,
                                        const FrequencyOptions& opts);

 private:
  std::vector<Int> digits_;
  std::vector<Convergent> conv_;      // 0..depth
  std::vector<Convergent> conv_all_;  // 0..digits_.size()
  std::vector<double> deltas_;
  std::vector<Wide> delta_num_;
  std::vector<double> beta_seq_;
  std::size_t depth_ = 0;
  double value_ = 0.0;
  bool truncated_ = false;
  std::string truncation_note_;
};

/// Builds the model from explicit digits. Digits beyond the denominator cap are
/// dropped and reported through truncated(); n_max is clamped to what remains.
FrequencyModel build_frequency(const std::vector<Int>& digits, std::size_t n_max,
                               const FrequencyOptions& opts = {});

/// Digit schedule a_{n+1} = max(1, round(e^{beta q_n} / q_n)) for indices past
/// the seed; produces frequencies with ln q_{n+1} / q_n ~ beta along the tail.
std::vector<Int> exp_schedule_digits(double beta, const std::vector<Int>& seed, const FrequencyOptions& opts,
                                     std::size_t max_digits = 64);

struct BetaEstimate {
  std::vector<double> sequence;
  double tail_sup = 0.0;
  /// First sequence index of the window (sequence index i holds n = i + 1).
  std::size_t window_begin = 0;
};

/// window = number of trailing sequence entries; 0 selects the last half
/// (rounded up).
BetaEstimate beta_estimate(const FrequencyModel& model, std::size_t window = 0);

/// ||x||_{R/Z}.
double dist_to_integers(double x);

struct BestDenominatorReport {
  bool holds = true;
  /// Minimizer of ||k alpha|| over 1 <= k < q_{n+1}; 0 when the range is empty.
  Int worst_k = 0;
};

BestDenominatorReport verify_best_denominators(const FrequencyModel& model, std::size_t n,
                                               Int brute_force_cap = 100'000);

/// b_n = q_n^{8/9}.
double resonance_scale(const FrequencyModel& model, std::size_t n);
/// Exact test d <= q^{8/9} for non-negative integer d.
bool within_resonance_scale(Int d, Int q);

/// A completely resonant phase: 2 theta - p alpha is an integer.
struct ResonantPhase {
  Int p = 0;
  Int j = 0;
  double theta = 0.0;
  /// theta = numerator / (2 Q) exactly, Q = precision_q() of the model used.
  Wide numerator = 0;
};

/// theta = (j + {p alpha}) / 2 reduced mod 1. Rejects p > 0.
ResonantPhase make_resonant_phase(const FrequencyModel& model, Int p, Int j);

/// Parsed frequency specification: `golden`, `silver`, `cf:[a1,a2,...]` or
/// `cf-rule:exp(beta=B,seed=[...])`, with optional `;depth=` / `;cap=` suffixes
/// left to the caller.
struct FrequencySpec {
  enum class Kind { Golden, Silver, Digits, ExpRule };
  Kind kind = Kind::Golden;
  std::vector<Int> digits;
  double beta = 0.0;
  std::string text;
};

FrequencySpec parse_frequency_spec(std::string_view text);

/// Materializes a spec. depth = 0 means "as deep as the cap allows".
FrequencyModel make_frequency(const FrequencySpec& spec, std::size_t depth = 0, const FrequencyOptions& opts = {});

}  // namespace amo
