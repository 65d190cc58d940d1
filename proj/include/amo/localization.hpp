#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "amo/determinant.hpp"
#include "amo/greens.hpp"
#include "amo/resonance.hpp"

namespace amo {

struct DecayFitPolicy {
  /// Fit distances |k - center| in [lo_fraction N, hi_fraction N] on each side.
  double lo_fraction = 0.2;
  double hi_fraction = 0.8;
  /// Linear amplitudes below this are dropped. Log profiles skip the floor.
  double noise_floor = 1e-14;
  std::size_t min_points = 50;
  double min_r2 = 0.9;
};

struct DecayFit {
  double rate = 0.0;  // c, the two sides averaged
  double r2 = 0.0;
  IntervalZ window;   // site range spanned by the points used
  std::size_t points = 0;
  /// r2 >= min_r2 and points >= min_points.
  bool reportable = false;
};

/// Linear amplitudes phi(first_site + i); center is an index into the vector.
DecayFit decay_fit(const std::vector<double>& amplitudes, std::size_t center, const DecayFitPolicy& policy = {},
                   Int first_site = 0);
/// Same fit on ln|phi|; no noise floor is applied.
DecayFit decay_fit_log(const std::vector<double>& log_amplitudes, std::size_t center,
                       const DecayFitPolicy& policy = {}, Int first_site = 0);

struct EigenMode {
  double energy = 0.0;
  std::size_t index = 0;  // position in the sorted spectrum
  Int half_width = 0;     // N; sites run over [-N, N]
  Int center = 0;         // site of max |phi|
  double log_amp_origin = 0.0;  // ln|phi(0)|, ||phi||_2 = 1
  /// ln|phi(n)| for n = -N..N, kept only on request.
  std::vector<double> log_profile;
  /// Dense eigenvector, filled only on request (small N).
  std::vector<double> vector;
  std::optional<double> decay_rate;  // set only when the fit is reportable
  DecayFit fit;
};

struct DiagonalizeOptions {
  bool keep_profiles = false;
  bool dense_vectors = false;
  DecayFitPolicy fit;
};

inline constexpr Int kMaxHalfWidth = 10'000;
inline constexpr Int kMaxDenseHalfWidth = 1'000;

/// All 2N+1 eigenpairs of H restricted to [-N, N] with Dirichlet boundary,
/// sorted by energy. params.energy is ignored. Profiles come from the
/// transfer recurrence run inward from both ends and joined where both are
/// accurate, so tails far below machine epsilon stay resolved.
std::vector<EigenMode> diagonalize(const OperatorParams& params, Int N, const DiagonalizeOptions& opts = {});

/// Sorted eigenvalues only.
std::vector<double> truncation_spectrum(const OperatorParams& params, Int N);

/// ln|phi(n)|, n = -N..N, of the eigenvector at energy E, normalized to ||phi||_2 = 1.
std::vector<double> eigen_log_profile(const OperatorParams& params, Int N, double energy);

/// Number of eigenvalues of the truncation strictly below x.
std::size_t sturm_count(const std::vector<Extended>& diagonal, const Extended& x);
/// The index-th eigenvalue (ascending) of the truncation to 50 digits, bracketed around guess.
Extended refine_eigenvalue(const OperatorParams& params, Int N, std::size_t index, double guess);
/// Same for an arbitrary symmetric tridiagonal matrix with unit off-diagonal.
Extended refine_eigenvalue(const std::vector<Extended>& diagonal, std::size_t index, double guess);

/// Potentials v(n), n = -N..N, in Extended precision.
std::vector<Extended> extended_diagonal(const OperatorParams& params, Int N);

/// Energy of the truncation eigenstate localized at site 0. The state is
/// identified on the local box [-h, h] (the local eigenvector largest at 0),
/// its energy refined to 50 digits, and matched to the adjacent eigenvalue of
/// [-N, N] by Sturm count. Clusters of eigenvalues that coincide in double
/// precision are resolved this way.
struct SiteEnergy {
  Extended energy;           // eigenvalue of [-N, N]
  std::size_t index = 0;     // its position in the sorted spectrum
  Extended local_energy;     // eigenvalue of [-h, h]
  double local_weight = 0.0; // |phi_local(0)|
};
SiteEnergy origin_localized_energy(const OperatorParams& params, Int N, Int local_half_width);

struct ProbeSite {
  Int offset = 0;  // y, relative to the mode center
  Int d = 0;       // dist(y, {j q_n : j >= 0})
  double log_ratio = 0.0;  // ln|phi(center + y)| - ln|phi(center)|
  double bound = 0.0;      // -(ln lambda - eps) d
  double margin = 0.0;     // bound - log_ratio
  bool bound_ok = false;
};

/// |phi(y)| < e^{-(ln lambda - eps) d} after rescaling |phi(center)| = 1.
/// Offsets with 100 d <= q_n are rejected.
std::vector<ProbeSite> extended_state_probe(const OperatorParams& params, const EigenMode& mode,
                                            const std::vector<Int>& offsets, Int q_n, double eps = 0.3);

struct RateSummary {
  std::size_t count = 0;
  double median = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct VerdictPolicy {
  /// Modes qualify when |center| <= center_fraction * N.
  double center_fraction = 0.25;
  double tolerance = 0.3;
  std::size_t beta_window = 0;
  DecayFitPolicy fit;
};

struct TheoremVerdict {
  double lambda = 0.0;
  double beta_hat = 0.0;
  double threshold_7beta = 0.0;
  double threshold_2beta = 0.0;
  double reference_lnlambda = 0.0;
  double tolerance = 0.0;
  Int half_width = 0;
  bool regime_ok = false;  // lambda > e^{7 beta_hat}
  /// Unset outside the regime.
  std::optional<bool> pass;
  RateSummary rates;
  std::size_t modes_total = 0;
  std::size_t modes_interior = 0;
  std::size_t modes_qualifying = 0;
  /// Every mode of the truncation, profiles dropped.
  std::vector<EigenMode> modes;
  /// Positions in modes of the qualifying ones.
  std::vector<std::size_t> selected;
  std::string note;
};

/// Diagonalizes, keeps interior modes with reportable fits and compares their
/// median rate with ln lambda - 7 beta_hat. Requires a completely resonant phase.
TheoremVerdict theorem_verdict(const OperatorParams& params, Int N, const VerdictPolicy& policy = {});

RateSummary summarize_rates(std::vector<double> rates);

/// Scales n >= 1 where the resonant construction is non-degenerate for phase
/// p and the set has at most max_set_size elements, ascending.
std::vector<std::size_t> admissible_resonant_scales(const FrequencyModel& model, Int p, Int max_set_size = 100'000);

struct FilterCheck {
  std::size_t n = 0;
  Int ell = 1;
  Int s = 0;
  std::size_t k = 0;
  double rate = 0.0;
  IntervalZ i1;
  IntervalZ i2;
  std::size_t i1_nonmembers = 0;
  std::size_t i2_nonmembers = 0;
  std::optional<Int> first_nonmember;  // scanning I1 then I2
  double worst_i1_margin = 0.0;        // smallest (k+1) r - ln|Q_k| over I1
  bool pass = false;                   // no non-member in I1
};

/// Membership of every theta_j, j in I1 u I2 of the resonant construction at
/// scale n, in A_{k, rate} with k = |I1 u I2| - 1 and the energy in Extended precision.
FilterCheck resonant_filter_check(const OperatorParams& params, const Extended& energy, std::size_t n, Int ell,
                                   double rate);

}  // namespace amo
