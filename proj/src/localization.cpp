#include "amo/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/constants/constants.hpp>

namespace amo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_half_width(Int N) {
  if (N < 1 || N > kMaxHalfWidth) {
    throw UsageError("diagonalize: N must lie in [1, " + std::to_string(kMaxHalfWidth) + "]");
  }
}

Eigen::VectorXd diagonal_of(const OperatorParams& params, Int N) {
  Eigen::VectorXd d(2 * N + 1);
  for (Int n = -N; n <= N; ++n) d(n + N) = params.potential(n);
  return d;
}

/// ln|u(n)| along the recurrence started with u = 1 at one end and 0 beyond it.
/// direction +1 runs left to right, -1 right to left.
std::vector<double> one_sided_profile(const Eigen::VectorXd& diag, double energy, int direction) {
  const std::size_t len = static_cast<std::size_t>(diag.size());
  std::vector<double> out(len, kNegInf);
  double cur = 1.0;
  double prev = 0.0;
  double scale = 0.0;
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t i = direction > 0 ? step : len - 1 - step;
    out[i] = cur == 0.0 ? kNegInf : scale + std::log(std::fabs(cur));
    const double next = (energy - diag(static_cast<Eigen::Index>(i))) * cur - prev;
    prev = cur;
    cur = next;
    const double m = std::max(std::fabs(cur), std::fabs(prev));
    if (m > 0.0) {
      cur /= m;
      prev /= m;
      scale += std::log(m);
    }
  }
  return out;
}

/// A one-sided solution is exact until it has fallen kTrust below its running
/// maximum; past that, rounding in E grows back at the same rate.
constexpr double kTrust = 12.0;
/// Relative spacing below which eigenvalues are treated as one cluster.
constexpr double kClusterTolerance = 1e-12;

std::size_t trusted_until(const std::vector<double>& prof, int direction) {
  const std::size_t len = prof.size();
  double top = kNegInf;
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t i = direction > 0 ? step : len - 1 - step;
    top = std::max(top, prof[i]);
    if (prof[i] < top - kTrust) return direction > 0 ? i - 1 : i + 1;
  }
  return direction > 0 ? len - 1 : 0;
}

/// Peaks of the sawtooth a one-sided solution traces when E sits within
/// rounding of several localized states: rise to a well, fall kTrust, regrow.
std::vector<std::size_t> sawtooth_peaks(const std::vector<double>& prof, int direction) {
  const std::size_t len = prof.size();
  std::vector<std::size_t> peaks;
  double top = kNegInf;
  std::size_t at = 0;
  bool open = false;
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t i = direction > 0 ? step : len - 1 - step;
    if (!open || prof[i] > top) {
      top = prof[i];
      at = i;
      open = true;
    } else if (prof[i] < top - kTrust) {
      peaks.push_back(at);
      top = prof[i];
      at = i;
    }
  }
  if (open) peaks.push_back(at);
  std::sort(peaks.begin(), peaks.end());
  return peaks;
}

/// Wells seen from both ends, ascending.
std::vector<std::size_t> wells(const std::vector<double>& left, const std::vector<double>& right) {
  const auto a = sawtooth_peaks(left, 1);
  const auto b = sawtooth_peaks(right, -1);
  std::vector<std::size_t> out;
  for (std::size_t x : a) {
    for (std::size_t y : b) {
      if ((x > y ? x - y : y - x) <= 2) {
        out.push_back(std::max(left[x] + right[x], left[y] + right[y]) == left[x] + right[x] ? x : y);
        break;
      }
    }
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> joined(const std::vector<double>& left, const std::vector<double>& right, std::size_t join) {
  std::vector<double> out(left.size());
  const double shift = left[join] - right[join];
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i <= join ? left[i] : right[i] + shift;
  double norm = kNegInf;
  for (double v : out) norm = log_add_exp(norm, 2.0 * v);
  for (double& v : out) v -= 0.5 * norm;
  return out;
}

/// rank / cluster: position of this eigenvalue among those that coincide with
/// it to rounding. A cluster of k such states is split over k wells in
/// position order; which exact eigenvalue owns which well is below double
/// precision, but the set of profiles is not.
std::vector<double> stitched_profile(const Eigen::VectorXd& diag, double energy, std::size_t rank = 0,
                                     std::size_t cluster = 1) {
  const std::vector<double> left = one_sided_profile(diag, energy, 1);
  const std::vector<double> right = one_sided_profile(diag, energy, -1);
  const std::size_t end_left = trusted_until(left, 1);
  const std::size_t end_right = trusted_until(right, -1);
  if (end_right <= end_left) {
    // both pieces exact on [end_right, end_left]: join at the peak there
    std::size_t join = end_right;
    for (std::size_t i = end_right; i <= end_left; ++i) {
      if (left[i] > left[join]) join = i;
    }
    return joined(left, right, join);
  }
  std::vector<std::size_t> w = wells(left, right);
  if (w.empty()) w.push_back(end_left);
  if (w.size() > cluster) {
    // keep the cluster-many strongest, back in position order
    std::stable_sort(w.begin(), w.end(), [&](std::size_t x, std::size_t y) {
      return left[x] + right[x] > left[y] + right[y];
    });
    w.resize(cluster);
    std::sort(w.begin(), w.end());
  }
  return joined(left, right, w[std::min(rank, w.size() - 1)]);
}

struct SideFit {
  double slope = 0.0;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  std::size_t points = 0;
};

SideFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  SideFit f;
  f.points = x.size();
  if (f.points < 2) return f;
  const double n = static_cast<double>(f.points);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + f.slope * x[i]);
    f.ss_res += r * r;
    f.ss_tot += (y[i] - my) * (y[i] - my);
  }
  return f;
}

DecayFit fit_logs(const std::vector<double>& logs, std::size_t center, const DecayFitPolicy& policy, Int first_site) {
  if (logs.size() < 200) throw UsageError("decay_fit: vector length must be at least 200");
  if (center >= logs.size()) throw UsageError("decay_fit: center outside the vector");
  if (!(policy.lo_fraction >= 0.0 && policy.lo_fraction < policy.hi_fraction)) {
    throw UsageError("decay_fit: need 0 <= lo_fraction < hi_fraction");
  }
  const double half = static_cast<double>((logs.size() - 1) / 2);
  const auto lo = static_cast<Int>(std::ceil(policy.lo_fraction * half));
  const auto hi = static_cast<Int>(std::floor(policy.hi_fraction * half));
  const auto len = static_cast<Int>(logs.size());
  const auto c = static_cast<Int>(center);

  DecayFit out;
  Int first_used = len, last_used = -1;
  double rate_sum = 0.0;
  int sides = 0;
  double ss_res = 0.0, ss_tot = 0.0;
  for (int side : {-1, 1}) {
    std::vector<double> xs, ys;
    for (Int d = lo; d <= hi; ++d) {
      const Int idx = c + side * d;
      if (idx < 0 || idx >= len) continue;
      const double v = logs[static_cast<std::size_t>(idx)];
      if (!std::isfinite(v)) continue;
      xs.push_back(static_cast<double>(d));
      ys.push_back(v);
      first_used = std::min(first_used, idx);
      last_used = std::max(last_used, idx);
    }
    const SideFit f = least_squares(xs, ys);
    if (f.points < 2) continue;
    rate_sum += -f.slope;
    ++sides;
    ss_res += f.ss_res;
    ss_tot += f.ss_tot;
    out.points += f.points;
  }
  if (sides == 0) throw DegenerateError("decay_fit: window empty after noise-floor exclusion");
  out.rate = rate_sum / sides + 0.0;
  out.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  out.window = IntervalZ(first_site + first_used, first_site + last_used);
  out.reportable = out.r2 >= policy.min_r2 && out.points >= policy.min_points;
  return out;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

DecayFit decay_fit(const std::vector<double>& amplitudes, std::size_t center, const DecayFitPolicy& policy,
                   Int first_site) {
  std::vector<double> logs(amplitudes.size());
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    const double a = std::fabs(amplitudes[i]);
    logs[i] = a >= policy.noise_floor && a > 0.0 ? std::log(a) : kNegInf;
  }
  return fit_logs(logs, center, policy, first_site);
}

DecayFit decay_fit_log(const std::vector<double>& log_amplitudes, std::size_t center, const DecayFitPolicy& policy,
                       Int first_site) {
  return fit_logs(log_amplitudes, center, policy, first_site);
}

std::vector<double> truncation_spectrum(const OperatorParams& params, Int N) {
  check_half_width(N);
  const Eigen::VectorXd diag = diagonal_of(params, N);
  const Eigen::VectorXd sub = Eigen::VectorXd::Ones(2 * N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw DegenerateError("truncation_spectrum: eigensolver did not converge");
  const Eigen::VectorXd& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

std::vector<double> eigen_log_profile(const OperatorParams& params, Int N, double energy) {
  check_half_width(N);
  return stitched_profile(diagonal_of(params, N), energy);
}

std::vector<EigenMode> diagonalize(const OperatorParams& params, Int N, const DiagonalizeOptions& opts) {
  check_half_width(N);
  if (opts.dense_vectors && N > kMaxDenseHalfWidth) {
    throw UsageError("diagonalize: dense eigenvectors need N <= " + std::to_string(kMaxDenseHalfWidth));
  }
  const Eigen::VectorXd diag = diagonal_of(params, N);
  const Eigen::VectorXd sub = Eigen::VectorXd::Ones(2 * N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, opts.dense_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw DegenerateError("diagonalize: eigensolver did not converge");

  const auto size = static_cast<std::size_t>(2 * N + 1);
  const Eigen::VectorXd& ev = es.eigenvalues();
  // eigenvalues equal to rounding, as runs [first, last)
  const double tol = kClusterTolerance * std::max(1.0, diag.cwiseAbs().maxCoeff() + 2.0);
  std::vector<std::size_t> run_start(size), run_end(size);
  for (std::size_t i = 0; i < size;) {
    std::size_t j = i + 1;
    while (j < size && ev(static_cast<Eigen::Index>(j)) - ev(static_cast<Eigen::Index>(j - 1)) <= tol) ++j;
    for (std::size_t k = i; k < j; ++k) {
      run_start[k] = i;
      run_end[k] = j;
    }
    i = j;
  }
  std::vector<EigenMode> modes(size);
  for (std::size_t i = 0; i < size; ++i) {
    EigenMode& m = modes[i];
    m.energy = ev(static_cast<Eigen::Index>(i));
    m.index = i;
    m.half_width = N;
    std::vector<double> profile = stitched_profile(diag, m.energy, i - run_start[i], run_end[i] - run_start[i]);
    const std::size_t c = argmax(profile);
    m.center = static_cast<Int>(c) - N;
    m.log_amp_origin = profile[static_cast<std::size_t>(N)];
    if (size >= 200) {
      try {
        m.fit = fit_logs(profile, c, opts.fit, -N);
        if (m.fit.reportable) m.decay_rate = m.fit.rate;
      } catch (const DegenerateError&) {
      }
    }
    if (opts.dense_vectors) {
      const auto col = es.eigenvectors().col(static_cast<Eigen::Index>(i));
      Eigen::Index big = 0;
      col.cwiseAbs().maxCoeff(&big);
      const double sign = col(big) < 0.0 ? -1.0 : 1.0;
      m.vector.resize(size);
      for (std::size_t r = 0; r < size; ++r) m.vector[r] = sign * col(static_cast<Eigen::Index>(r));
    }
    if (opts.keep_profiles) m.log_profile = std::move(profile);
  }
  return modes;
}

std::size_t sturm_count(const std::vector<Extended>& diagonal, const Extended& x) {
  std::size_t count = 0;
  Extended d = 0;
  const Extended tiny("1e-80");
  for (std::size_t i = 0; i < diagonal.size(); ++i) {
    d = i == 0 ? diagonal[0] - x : diagonal[i] - x - 1 / d;
    if (d == 0) d = tiny;
    if (d < 0) ++count;
  }
  return count;
}

std::vector<Extended> extended_diagonal(const OperatorParams& params, Int N) {
  check_half_width(N);
  std::vector<Extended> diag;
  diag.reserve(static_cast<std::size_t>(2 * N + 1));
  for (Int n = -N; n <= N; ++n) diag.push_back(params.potential_extended(n));
  return diag;
}

Extended refine_eigenvalue(const std::vector<Extended>& diag, std::size_t index, double guess) {
  if (index >= diag.size()) throw UsageError("refine_eigenvalue: index out of range");
  const double base = 1e-9 * std::max(1.0, std::fabs(guess));
  Extended width = base;
  Extended lo = Extended(guess) - width;
  while (sturm_count(diag, lo) > index) {
    width *= 2;
    lo -= width;
  }
  width = base;
  Extended hi = Extended(guess) + width;
  while (sturm_count(diag, hi) <= index) {
    width *= 2;
    hi += width;
  }
  const Extended resolution = Extended("1e-46") * std::max(1.0, std::fabs(guess));
  for (int it = 0; it < 400 && hi - lo > resolution; ++it) {
    const Extended mid = (lo + hi) / 2;
    if (sturm_count(diag, mid) > index) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return (lo + hi) / 2;
}

Extended refine_eigenvalue(const OperatorParams& params, Int N, std::size_t index, double guess) {
  return refine_eigenvalue(extended_diagonal(params, N), index, guess);
}

SiteEnergy origin_localized_energy(const OperatorParams& params, Int N, Int local_half_width) {
  if (local_half_width < 1 || local_half_width > std::min(N, kMaxDenseHalfWidth)) {
    throw UsageError("origin_localized_energy: local half-width must lie in [1, min(N, 1000)]");
  }
  DiagonalizeOptions opts;
  opts.dense_vectors = true;
  const std::vector<EigenMode> local = diagonalize(params, local_half_width, opts);
  const auto origin = static_cast<std::size_t>(local_half_width);
  std::size_t pick = 0;
  for (std::size_t i = 1; i < local.size(); ++i) {
    if (std::fabs(local[i].vector[origin]) > std::fabs(local[pick].vector[origin])) pick = i;
  }
  SiteEnergy out;
  out.local_weight = std::fabs(local[pick].vector[origin]);
  out.local_energy = refine_eigenvalue(extended_diagonal(params, local_half_width), pick, local[pick].energy);

  const std::vector<Extended> full = extended_diagonal(params, N);
  const std::size_t below = sturm_count(full, out.local_energy);
  const double guess = static_cast<double>(out.local_energy);
  bool have = false;
  for (std::size_t idx : {below == 0 ? below : below - 1, below}) {
    if (idx >= full.size()) continue;
    const Extended e = refine_eigenvalue(full, idx, guess);
    if (!have || abs(e - out.local_energy) < abs(out.energy - out.local_energy)) {
      out.energy = e;
      out.index = idx;
      have = true;
    }
  }
  return out;
}

std::vector<ProbeSite> extended_state_probe(const OperatorParams& params, const EigenMode& mode,
                                            const std::vector<Int>& offsets, Int q_n, double eps) {
  if (mode.log_profile.empty()) throw UsageError("extended_state_probe: mode carries no profile");
  if (q_n < 1) throw UsageError("extended_state_probe: q_n must be positive");
  const Int N = mode.half_width;
  const double center_log = mode.log_profile[static_cast<std::size_t>(mode.center + N)];
  const double rate = std::log(params.lambda) - eps;
  std::vector<ProbeSite> out;
  for (Int y : offsets) {
    ProbeSite p;
    p.offset = y;
    if (y < 0) {
      p.d = -y;
    } else {
      const Int r = y % q_n;
      p.d = std::min(r, q_n - r);
    }
    if (100 * p.d <= q_n) {
      throw UsageError("extended_state_probe: offset " + std::to_string(y) + " has d = " + std::to_string(p.d) +
                       " <= q_n/100");
    }
    const Int site = mode.center + y;
    if (site < -N || site > N) throw UsageError("extended_state_probe: offset leaves the truncation");
    p.log_ratio = mode.log_profile[static_cast<std::size_t>(site + N)] - center_log;
    p.bound = -rate * static_cast<double>(p.d);
    p.margin = p.bound - p.log_ratio;
    p.bound_ok = p.log_ratio < p.bound;
    out.push_back(p);
  }
  return out;
}

RateSummary summarize_rates(std::vector<double> rates) {
  RateSummary s;
  s.count = rates.size();
  if (rates.empty()) return s;
  std::sort(rates.begin(), rates.end());
  const std::size_t h = rates.size() / 2;
  s.median = rates.size() % 2 == 1 ? rates[h] : 0.5 * (rates[h - 1] + rates[h]);
  double sum = 0.0;
  for (double r : rates) sum += r;
  s.mean = sum / static_cast<double>(rates.size());
  s.min = rates.front();
  s.max = rates.back();
  return s;
}

TheoremVerdict theorem_verdict(const OperatorParams& params, Int N, const VerdictPolicy& policy) {
  params.validate();
  if (!params.resonant) throw UsageError("theorem_verdict: theta must be a completely resonant phase");
  TheoremVerdict v;
  v.lambda = params.lambda;
  v.half_width = N;
  v.tolerance = policy.tolerance;
  v.beta_hat = beta_estimate(*params.freq, policy.beta_window).tail_sup;
  v.reference_lnlambda = std::log(params.lambda);
  v.threshold_7beta = v.reference_lnlambda - 7.0 * v.beta_hat;
  v.threshold_2beta = v.reference_lnlambda - 2.0 * v.beta_hat;
  v.regime_ok = v.threshold_7beta > 0.0;

  DiagonalizeOptions opts;
  opts.fit = policy.fit;
  v.modes = diagonalize(params, N, opts);
  v.modes_total = v.modes.size();
  std::vector<double> rates;
  const double limit = policy.center_fraction * static_cast<double>(N);
  for (std::size_t i = 0; i < v.modes.size(); ++i) {
    const EigenMode& m = v.modes[i];
    if (std::fabs(static_cast<double>(m.center)) > limit) continue;
    ++v.modes_interior;
    if (!m.decay_rate) continue;
    rates.push_back(*m.decay_rate);
    v.selected.push_back(i);
  }
  v.modes_qualifying = rates.size();
  if (rates.empty()) {
    std::ostringstream os;
    os << "theorem_verdict: no qualifying modes (total " << v.modes_total << ", interior " << v.modes_interior
       << ", min r2 " << policy.fit.min_r2 << ")";
    throw DegenerateError(os.str());
  }
  v.rates = summarize_rates(rates);
  std::ostringstream note;
  note << "finite truncation [-N, N] with Dirichlet boundary; modes centered within " << policy.center_fraction
       << " N stand in for the infinite-volume eigenfunctions";
  if (v.regime_ok) {
    v.pass = v.rates.median >= v.threshold_7beta - v.tolerance;
  } else {
    note << "; lambda <= e^{7 beta_hat}: outside the localization regime, pass undefined";
  }
  v.note = note.str();
  return v;
}

std::vector<std::size_t> admissible_resonant_scales(const FrequencyModel& model, Int p, Int max_set_size) {
  std::vector<std::size_t> out;
  for (std::size_t n = 1; n <= model.depth(); ++n) {
    const Int q_prev = model.q(n - 1);
    const Int cap = model.q(n) + p - 1;
    if (cap < 7 * q_prev) continue;
    const Wide s = cap / (7 * q_prev);
    if (10 * s * static_cast<Wide>(q_prev) <= max_set_size) out.push_back(n);
  }
  return out;
}

FilterCheck resonant_filter_check(const OperatorParams& params, const Extended& energy, std::size_t n, Int ell,
                                   double rate) {
  if (!params.resonant) throw UsageError("resonant_filter_check: theta must be a completely resonant phase");
  if (!(rate > 0.0)) throw UsageError("resonant_filter_check: rate must be positive");
  const PhaseSet set = build_resonant_sets_at(n, ell, *params.resonant, params.freq);
  FilterCheck fc;
  fc.n = n;
  fc.ell = ell;
  fc.s = set.s;
  fc.k = set.window();
  fc.rate = rate;
  fc.i1 = set.i1;
  fc.i2 = set.i2;
  fc.worst_i1_margin = std::numeric_limits<double>::infinity();

  // All tests share the parity of h0 = 2j - k + 1, so one table of half-site
  // potentials covers every window.
  const auto k = static_cast<Wide>(fc.k);
  const Wide h_lo = 2 * static_cast<Wide>(set.indices.front()) - k + 1;
  const Wide h_hi = 2 * static_cast<Wide>(set.indices.back()) - k + 1 + 2 * (k - 1);
  const Extended two_pi = 2 * boost::math::constants::pi<Extended>();
  const Extended two_lambda = 2 * Extended(params.lambda);
  std::vector<Extended> table;
  table.reserve(static_cast<std::size_t>((h_hi - h_lo) / 2 + 1));
  for (Wide h = h_lo; h <= h_hi; h += 2) {
    table.push_back(two_lambda * boost::multiprecision::cos(two_pi * params.phase_half_extended(h)) - energy);
  }
  const double bound = static_cast<double>(fc.k + 1) * rate;
  for (Int j : set.indices) {
    const auto base = static_cast<std::size_t>((2 * static_cast<Wide>(j) - k + 1 - h_lo) / 2);
    const auto st = run_recurrence<Extended>(fc.k, [&](std::size_t m) { return table[base + m]; });
    const LogScalar q = to_log_scalar(st);
    const double margin = q.is_zero() ? std::numeric_limits<double>::infinity() : bound - q.log_mag;
    const bool member = margin >= 0.0;
    if (set.in_i1(j)) {
      fc.worst_i1_margin = std::min(fc.worst_i1_margin, margin);
      if (!member) ++fc.i1_nonmembers;
    } else if (!member) {
      ++fc.i2_nonmembers;
    }
    if (!member && !fc.first_nonmember) fc.first_nonmember = j;
  }
  fc.pass = fc.i1_nonmembers == 0;
  return fc;
}

}  // namespace amo
