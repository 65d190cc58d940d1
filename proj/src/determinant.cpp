#include "amo/determinant.hpp"

#include <boost/math/constants/constants.hpp>
#include <numbers>

namespace amo {

namespace {

Wide mod_positive(Wide a, Wide m) {
  Wide r = a % m;
  return r < 0 ? r + m : r;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

void OperatorParams::validate() const {
  if (!freq) throw UsageError("OperatorParams: missing frequency model");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw UsageError("OperatorParams: lambda must be positive (reduce lambda < 0 via theta + 1/2)");
  }
  if (!(theta >= 0.0 && theta < 1.0)) throw UsageError("OperatorParams: theta must lie in [0,1)");
  if (!std::isfinite(energy)) throw UsageError("OperatorParams: energy must be finite");
}

double OperatorParams::phase_half(Wide h) const {
  const Wide two_q = 2 * static_cast<Wide>(freq->precision_q());
  const Wide step = mod_positive(h, two_q) * static_cast<Wide>(freq->precision_p());
  if (resonant) {
    const Wide num = mod_positive(resonant->numerator + step, two_q);
    return static_cast<double>(num) / static_cast<double>(two_q);
  }
  double x = theta + static_cast<double>(step % two_q) / static_cast<double>(two_q);
  if (x >= 1.0) x -= 1.0;
  return x;
}

double cos_two_pi(double x) {
  const double quarters = std::nearbyint(4.0 * x);
  const double t = kTwoPi * (x - 0.25 * quarters);
  switch (static_cast<int>(std::fmod(quarters, 4.0) + 4.0) % 4) {
    case 0:
      return std::cos(t);
    case 1:
      return -std::sin(t);
    case 2:
      return -std::cos(t);
    default:
      return std::sin(t);
  }
}

double OperatorParams::potential(Int n) const { return 2.0 * lambda * cos_two_pi(phase(n)); }

Extended OperatorParams::phase_half_extended(Wide h) const {
  const Wide two_q = 2 * static_cast<Wide>(freq->precision_q());
  const Wide step = mod_positive(h, two_q) * static_cast<Wide>(freq->precision_p());
  const Extended denom(static_cast<std::int64_t>(two_q));
  if (resonant) {
    const Wide num = mod_positive(resonant->numerator + step, two_q);
    return Extended(static_cast<std::int64_t>(num)) / denom;
  }
  Extended x = Extended(theta) + Extended(static_cast<std::int64_t>(step % two_q)) / denom;
  if (x >= 1) x -= 1;
  return x;
}

Extended OperatorParams::potential_extended(Int n) const {
  const Extended two_pi = 2 * boost::math::constants::pi<Extended>();
  return 2 * Extended(lambda) * boost::multiprecision::cos(two_pi * phase_half_extended(2 * static_cast<Wide>(n)));
}

OperatorParams make_params(double lambda, std::shared_ptr<const FrequencyModel> freq, double theta, double energy) {
  OperatorParams p;
  p.lambda = lambda;
  p.freq = std::move(freq);
  p.theta = theta;
  p.energy = energy;
  p.validate();
  return p;
}

OperatorParams make_params(double lambda, std::shared_ptr<const FrequencyModel> freq, const ResonantPhase& phase,
                           double energy) {
  OperatorParams p = make_params(lambda, std::move(freq), phase.theta, energy);
  p.resonant = phase;
  return p;
}

OperatorParams reduce_negative_coupling(double lambda, std::shared_ptr<const FrequencyModel> freq, double theta,
                                        double energy) {
  if (lambda == 0.0) throw UsageError("reduce_negative_coupling: lambda = 0 is outside the model");
  double t = theta - std::floor(theta);
  if (lambda < 0.0) {
    lambda = -lambda;
    t += 0.5;
    if (t >= 1.0) t -= 1.0;
  }
  return make_params(lambda, std::move(freq), t, energy);
}

PkDetail pk_half(const OperatorParams& params, std::size_t k, Wide h0) {
  const double two_lambda = 2.0 * params.lambda;
  const double e = params.energy;
  auto diag = [&](std::size_t m) {
    return two_lambda * cos_two_pi(params.phase_half(h0 + 2 * static_cast<Wide>(m))) - e;
  };
  const auto st = run_recurrence<double>(k, diag);
  return {to_log_scalar(st), st.log_running_scale};
}

LogScalar pk_at(const OperatorParams& params, std::size_t k, Int first_site) {
  return pk_half(params, k, 2 * static_cast<Wide>(first_site)).value;
}

PkDetail pk_eval_detail(const OperatorParams& params, std::size_t k, double theta_offset) {
  if (theta_offset == 0.0) return pk_half(params, k, 0);
  OperatorParams shifted = params;
  shifted.resonant.reset();
  shifted.theta = params.theta + theta_offset;
  shifted.theta -= std::floor(shifted.theta);
  return pk_half(shifted, k, 0);
}

LogScalar pk_eval(const OperatorParams& params, std::size_t k, double theta_offset) {
  return pk_eval_detail(params, k, theta_offset).value;
}

LogScalar pk_at_extended(const OperatorParams& params, const Extended& energy, std::size_t k, Int first_site) {
  const Extended two_pi = 2 * boost::math::constants::pi<Extended>();
  const Extended two_lambda = 2 * Extended(params.lambda);
  const Wide h0 = 2 * static_cast<Wide>(first_site);
  auto diag = [&](std::size_t m) {
    return Extended(two_lambda * boost::multiprecision::cos(two_pi * params.phase_half_extended(
                                                                         h0 + 2 * static_cast<Wide>(m))) -
                    energy);
  };
  return to_log_scalar(run_recurrence<Extended>(k, diag));
}

namespace {

MembershipResult membership(const LogScalar& q, std::size_t k, double r) {
  MembershipResult res;
  res.log_abs_q = q.log_mag;
  if (q.is_zero()) {
    res.member = true;
    res.margin = std::numeric_limits<double>::infinity();
    return res;
  }
  const double bound = static_cast<double>(k + 1) * r;
  res.margin = bound - q.log_mag;
  res.member = q.log_mag <= bound;
  return res;
}

}  // namespace

LogScalar qk_eval(const OperatorParams& params, std::size_t k, double x) {
  if (k < 1) throw UsageError("qk_eval: k must be at least 1");
  if (!(std::fabs(x) <= 1.0)) throw UsageError("qk_eval: |x| must not exceed 1");
  OperatorParams star = params;
  star.resonant.reset();
  star.theta = std::acos(x) / kTwoPi;
  return pk_half(star, k, -static_cast<Wide>(k - 1)).value;
}

MembershipResult in_A_kr(const OperatorParams& params, std::size_t k, double r, double theta_test) {
  if (!(r > 0.0)) throw UsageError("in_A_kr: r must be positive");
  OperatorParams star = params;
  star.resonant.reset();
  star.theta = theta_test - std::floor(theta_test);
  return membership(pk_half(star, k, -static_cast<Wide>(k) + 1).value, k, r);
}

MembershipResult in_A_kr_site(const OperatorParams& params, std::size_t k, double r, Int j) {
  if (!(r > 0.0)) throw UsageError("in_A_kr: r must be positive");
  const Wide h0 = 2 * static_cast<Wide>(j) - static_cast<Wide>(k) + 1;
  return membership(pk_half(params, k, h0).value, k, r);
}

MembershipResult in_A_kr_site_extended(const OperatorParams& params, const Extended& energy, std::size_t k, double r,
                                       Int j) {
  if (!(r > 0.0)) throw UsageError("in_A_kr: r must be positive");
  const Extended two_pi = 2 * boost::math::constants::pi<Extended>();
  const Extended two_lambda = 2 * Extended(params.lambda);
  const Wide h0 = 2 * static_cast<Wide>(j) - static_cast<Wide>(k) + 1;
  auto diag = [&](std::size_t m) {
    return Extended(two_lambda * boost::multiprecision::cos(two_pi * params.phase_half_extended(
                                                                         h0 + 2 * static_cast<Wide>(m))) -
                    energy);
  };
  return membership(to_log_scalar(run_recurrence<Extended>(k, diag)), k, r);
}

std::vector<GrowthPoint> sup_growth_profile(const OperatorParams& params, const std::vector<std::size_t>& ks,
                                            const GrowthOptions& opts) {
  if (opts.points_per_k < 4) throw UsageError("sup_growth_profile: need at least 4k grid points");
  std::vector<GrowthPoint> out;
  out.reserve(ks.size());
  OperatorParams grid_params = params;
  grid_params.resonant.reset();
  for (std::size_t k : ks) {
    if (k == 0) throw UsageError("sup_growth_profile: k must be positive");
    GrowthPoint gp;
    gp.k = k;
    gp.grid_points = opts.points_per_k * k;
    gp.sup_rate = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gp.grid_points; ++i) {
      grid_params.theta = static_cast<double>(i) / static_cast<double>(gp.grid_points);
      const LogScalar v = pk_half(grid_params, k, 0).value;
      const double rate = v.log_mag / static_cast<double>(k);
      if (rate > gp.sup_rate) {
        gp.sup_rate = rate;
        gp.argmax_theta = grid_params.theta;
      }
    }
    gp.exceeds = gp.sup_rate > std::log(params.lambda) + opts.epsilon;
    out.push_back(gp);
  }
  return out;
}

}  // namespace amo
