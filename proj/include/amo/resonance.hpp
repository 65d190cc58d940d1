#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "amo/determinant.hpp"
#include "amo/greens.hpp"

namespace amo {

/// Which side of the resonance dichotomy a site y falls on at its scale n,
/// where b_n <= y < b_{n+1} and b_n = q_n^{8/9}.
struct ResonanceReport {
  Int y = 0;
  std::size_t n = 0;
  Int q_n = 0;
  double b_n = 0.0;
  bool resonant = false;
  /// Resonant branch: l >= 1 with |y - l q_n| <= b_n (closest such multiple).
  std::optional<Int> ell;
  /// Non-resonant branch: y = m q_n + sign * y0 with y0 = dist(y, {l q_n : l >= 0}).
  Int m = 0;
  Int y0 = 0;
  int offset_sign = 1;
};

ResonanceReport classify_resonance(Int y, const FrequencyModel& model);

enum class PhaseSetKind { NonResonant, Resonant };

/// theta_j = theta + j alpha for j in I1 u I2.
struct PhaseSet {
  PhaseSetKind kind = PhaseSetKind::NonResonant;
  IntervalZ i1;
  IntervalZ i2;
  Int s = 0;
  std::size_t n = 0;
  Int q_prev = 0;  // q_{n-1}
  Int q_n = 0;
  std::shared_ptr<const FrequencyModel> freq;
  double theta = 0.0;
  std::optional<ResonantPhase> resonant;
  std::vector<Int> indices;   // I1 then I2, ascending
  std::vector<double> thetas; // matching indices

  std::size_t size() const { return indices.size(); }
  /// Window length k of the A_{k,r} test the set feeds: size() - 1.
  std::size_t window() const { return indices.size() - 1; }
  bool in_i1(Int j) const { return i1.contains(j); }
  bool in_i2(Int j) const { return i2.contains(j); }
};

/// Non-resonant construction: s = max{s : 4 s q_{n-1} - p + 1 <= y0},
/// I1 = [-2 s q_{n-1}, -1], I2 = [y - 2 s q_{n-1}, y + 2 s q_{n-1} - 1].
PhaseSet build_nonresonant_sets(const ResonanceReport& report, const ResonantPhase& phase,
                                std::shared_ptr<const FrequencyModel> model);
PhaseSet build_nonresonant_sets(const ResonanceReport& report, Int p, std::shared_ptr<const FrequencyModel> model);

/// Resonant construction: s = max{s : 7 s q_{n-1} <= q_n + p - 1},
/// I1 = [-4 s q_{n-1}, -1], I2 = [l q_n - 3 s q_{n-1}, l q_n + 3 s q_{n-1} - 1].
PhaseSet build_resonant_sets(const ResonanceReport& report, const ResonantPhase& phase,
                             std::shared_ptr<const FrequencyModel> model);
PhaseSet build_resonant_sets(const ResonanceReport& report, Int p, std::shared_ptr<const FrequencyModel> model);

/// Resonant construction at an explicit scale n and multiple l (no site needed).
PhaseSet build_resonant_sets_at(std::size_t n, Int ell, const ResonantPhase& phase,
                                std::shared_ptr<const FrequencyModel> model);

struct UniformityOptions {
  /// Chebyshev-Lobatto grid size on [-1,1]; 0 selects 4 x set size.
  std::size_t grid_points = 0;
  /// Golden-section refinement around the grid argmax.
  bool refine = true;
};

struct UniformityReport {
  double epsilon_hat = 0.0;
  std::size_t argmax_i = 0;  // position in PhaseSet::indices
  Int argmax_index = 0;      // the j value itself
  double argmax_x = 0.0;
  std::size_t grid_points = 0;
  bool refined = false;
  /// ln of the max Lagrange-product, i.e. k * epsilon_hat.
  double log_max_product = 0.0;
};

/// epsilon_hat = (1/k) max_{x, i} sum_{j != i} [ln|x - cos 2 pi theta_j| - ln|cos 2 pi theta_i - cos 2 pi theta_j|].
/// Throws DegenerateError on coincident cosines.
UniformityReport uniformity_margin(const PhaseSet& phases, const UniformityOptions& opts = {});

/// The margins the constructions are proven against, reported next to epsilon_hat.
struct ReferenceMargins {
  double nonresonant = 0.0;  // -2 ln(s / q_n) / q_{n-1}
  double resonant = 0.0;     // (7/5) beta_hat
  double resonant_finite = 0.0;  // -2 ln(s/q_n)/q_{n-1} + ln q_{n+1} / (5 s q_{n-1}), if q_{n+1} is stored
};
ReferenceMargins reference_margins(const PhaseSet& phases, double beta_hat);

struct LogSinSum {
  double sum_excl_min = 0.0;  // sum_{l != l0} ln|sin pi (x + l alpha)| + (q - 1) ln 2
  double c_hat = 0.0;         // |sum| / q
  Int ell0 = 0;
};

LogSinSum log_sin_sum(double x, Int q_n, const FrequencyModel& model);

struct NonUniformSelection {
  Int j0 = 0;
  bool found = false;
  double margin = 0.0;  // membership margin at j0 (negative when found)
  std::size_t scanned = 0;
};

/// First j of the set (I1 first) with theta_j outside A_{k, rate_r}, k = window().
NonUniformSelection select_nonuniform_theta(const PhaseSet& phases, const OperatorParams& params, double rate_r);
/// Same scan with the energy carried in Extended precision.
NonUniformSelection select_nonuniform_theta_extended(const PhaseSet& phases, const OperatorParams& params,
                                                     const Extended& energy, double rate_r);

}  // namespace amo
