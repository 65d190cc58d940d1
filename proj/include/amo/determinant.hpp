#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "amo/cf_engine.hpp"
#include "amo/log_scalar.hpp"

namespace amo {

/// 50 significant digits; used where a double energy cannot resolve the
/// exponentially small gaps a test depends on.
using Extended = boost::multiprecision::cpp_bin_float_50;

/// cos 2 pi x with the argument reduced to |f| <= 1/8 around the nearest
/// quarter, so quarter points give exact 0 and +-1.
double cos_two_pi(double x);

/// One point (lambda, alpha, theta, E) of H_{lambda,alpha,theta} - E with
/// (H u)(n) = u(n+1) + u(n-1) + 2 lambda cos 2 pi (theta + n alpha) u(n).
struct OperatorParams {
  double lambda = 1.0;
  std::shared_ptr<const FrequencyModel> freq;
  double theta = 0.0;
  double energy = 0.0;
  /// When set, theta is this completely resonant phase and every site phase
  /// is reduced exactly.
  std::optional<ResonantPhase> resonant;

  /// Validates lambda > 0, theta in [0,1), freq present.
  void validate() const;

  /// theta + h alpha / 2 reduced to [0,1); site n is h = 2n.
  double phase_half(Wide h) const;
  double phase(Int n) const { return phase_half(2 * static_cast<Wide>(n)); }
  /// lambda v(theta + n alpha) = 2 lambda cos 2 pi (theta + n alpha).
  double potential(Int n) const;

  Extended phase_half_extended(Wide h) const;
  Extended potential_extended(Int n) const;
};

OperatorParams make_params(double lambda, std::shared_ptr<const FrequencyModel> freq, double theta, double energy);
OperatorParams make_params(double lambda, std::shared_ptr<const FrequencyModel> freq, const ResonantPhase& phase,
                           double energy);

/// H_{lambda,alpha,theta} = H_{-lambda,alpha,theta+1/2}: maps lambda < 0 onto
/// the lambda > 0 normalization.
OperatorParams reduce_negative_coupling(double lambda, std::shared_ptr<const FrequencyModel> freq, double theta,
                                        double energy);

/// Output of the renormalized three-term recurrence
/// D_{j+1} = d_j D_j - D_{j-1}, D_0 = 1, D_{-1} = 0.
template <class Real>
struct RecurrenceState {
  Real value = Real(1);     // renormalized D_k
  Real previous = Real(0);  // renormalized D_{k-1}
  double log_scale = 0.0;   // sum of ln(divisor) over all renormalizations
  /// ln of the largest term entering the final step; |P_k| far below it
  /// means the last subtraction cancelled.
  double log_running_scale = 0.0;
  std::vector<Real> divisors;  // filled only when requested
};

namespace detail {

inline double to_log(double x) { return std::log(std::fabs(x)); }
inline double to_log(const Extended& x) { return static_cast<double>(boost::multiprecision::log(boost::multiprecision::abs(x))); }
/// Exact types (rationals) go through double; only used at small k.
template <class Real>
double to_log(const Real& x) {
  return std::log(std::fabs(static_cast<double>(x)));
}

template <class Real>
Real magnitude(const Real& x) {
  using std::abs;
  return Real(abs(x));
}

}  // namespace detail

/// Runs the recurrence over k diagonal entries supplied by diag(j), dividing
/// the running pair by its larger magnitude after every step.
template <class Real, class DiagFn>
RecurrenceState<Real> run_recurrence(std::size_t k, DiagFn&& diag, bool record_divisors = false) {
  using detail::magnitude;
  RecurrenceState<Real> st;
  Real cur(1), prev(0);
  for (std::size_t j = 0; j < k; ++j) {
    const Real d = diag(j);
    const Real term_a = d * cur;
    Real next = term_a - prev;
    if (j + 1 == k) {
      const Real big = magnitude(term_a) > magnitude(prev) ? magnitude(term_a) : magnitude(prev);
      st.log_running_scale = st.log_scale + (big == 0 ? -std::numeric_limits<double>::infinity() : detail::to_log(big));
    }
    prev = cur;
    cur = next;
    const Real m = magnitude(cur) > magnitude(prev) ? magnitude(cur) : magnitude(prev);
    if (m != 0) {
      cur /= m;
      prev /= m;
      st.log_scale += detail::to_log(m);
      if (record_divisors) st.divisors.push_back(m);
    }
  }
  if (k == 0) st.log_running_scale = 0.0;
  st.value = cur;
  st.previous = prev;
  return st;
}

template <class Real>
LogScalar to_log_scalar(const RecurrenceState<Real>& st) {
  if (st.value == 0) {
    LogScalar z;
    z.cancellation = true;
    return z;
  }
  LogScalar r(st.value > 0 ? 1 : -1, st.log_scale + detail::to_log(st.value));
  r.cancellation = (r.log_mag - st.log_running_scale) < std::log(LogScalar::kCancellationThreshold);
  return r;
}

struct PkDetail {
  LogScalar value;
  double log_running_scale = 0.0;
};

/// P_k at base phase theta + h0 alpha/2: the determinant of the k-site box whose
/// site m carries phase theta + (h0 + 2m) alpha / 2.
PkDetail pk_half(const OperatorParams& params, std::size_t k, Wide h0);
/// P_k(theta + first_site alpha) = det R_[x,x+k-1] (H - E) R_[x,x+k-1], x = first_site.
LogScalar pk_at(const OperatorParams& params, std::size_t k, Int first_site);
/// P_k(theta + theta_offset). Non-integer offsets go beyond the integer shifts
/// the localization argument uses.
LogScalar pk_eval(const OperatorParams& params, std::size_t k, double theta_offset = 0.0);
PkDetail pk_eval_detail(const OperatorParams& params, std::size_t k, double theta_offset = 0.0);

/// pk_at with the diagonal and the energy carried in Extended precision.
LogScalar pk_at_extended(const OperatorParams& params, const Extended& energy, std::size_t k, Int first_site);

/// Q_k(x), |x| <= 1, via the back-solved phase theta* with
/// cos 2 pi (theta* + (k-1) alpha / 2) = x.
LogScalar qk_eval(const OperatorParams& params, std::size_t k, double x);

struct MembershipResult {
  bool member = false;
  /// (k+1) r - ln|Q_k|; +inf when Q_k = 0.
  double margin = 0.0;
  double log_abs_q = 0.0;
};

/// Membership of theta_test in A_{k,r} = {theta : |Q_k(cos 2 pi theta)| <= e^{(k+1) r}}.
MembershipResult in_A_kr(const OperatorParams& params, std::size_t k, double r, double theta_test);
/// Same, for theta_test = theta + j alpha with exact phase reduction.
MembershipResult in_A_kr_site(const OperatorParams& params, std::size_t k, double r, Int j);
/// Extended-precision variant of in_A_kr_site.
MembershipResult in_A_kr_site_extended(const OperatorParams& params, const Extended& energy, std::size_t k, double r,
                                       Int j);

struct GrowthPoint {
  std::size_t k = 0;
  double sup_rate = 0.0;  // max over the grid of (1/k) ln|P_k(theta)|
  double argmax_theta = 0.0;
  std::size_t grid_points = 0;
  bool exceeds = false;  // sup_rate > ln lambda + epsilon
};

struct GrowthOptions {
  /// Grid points per unit k; values below 4 are rejected.
  std::size_t points_per_k = 4;
  double epsilon = 0.1;
};

/// Grid supremum of (1/k) ln|P_k(theta)| over theta in [0,1); params.theta is ignored.
std::vector<GrowthPoint> sup_growth_profile(const OperatorParams& params, const std::vector<std::size_t>& ks,
                                            const GrowthOptions& opts = {});

}  // namespace amo
