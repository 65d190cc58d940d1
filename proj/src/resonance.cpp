#include "amo/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace amo {

namespace {

constexpr double kLn2 = std::numbers::ln2;

/// b_q = q^{8/9} <= y for integers q >= 1, y >= 0.
bool scale_at_most(Int q, Int y) {
  if (y <= 0) return false;
  const double root = std::round(std::pow(static_cast<double>(q), 1.0 / 9.0));
  Wide r9 = 1;
  for (int i = 0; i < 9; ++i) r9 *= static_cast<Wide>(root);
  if (r9 == q) return r9 / static_cast<Wide>(root) <= y;
  return 8.0 * std::log(static_cast<double>(q)) <= 9.0 * std::log(static_cast<double>(y));
}

OperatorParams phase_carrier(std::shared_ptr<const FrequencyModel> model, const ResonantPhase& phase) {
  OperatorParams p;
  p.lambda = 1.0;
  p.freq = std::move(model);
  p.theta = phase.theta;
  p.resonant = phase;
  return p;
}

void fill_phases(PhaseSet& set, const OperatorParams& carrier) {
  set.indices.clear();
  set.thetas.clear();
  for (Int j = set.i1.x1; j <= set.i1.x2; ++j) set.indices.push_back(j);
  for (Int j = set.i2.x1; j <= set.i2.x2; ++j) set.indices.push_back(j);
  set.thetas.reserve(set.indices.size());
  for (Int j : set.indices) set.thetas.push_back(carrier.phase(j));
}

}  // namespace

ResonanceReport classify_resonance(Int y, const FrequencyModel& model) {
  if (model.depth() < 2) throw UsageError("classify_resonance: model needs at least two convergents");
  std::size_t n = 0;
  for (std::size_t i = 1; i <= model.depth(); ++i) {
    if (scale_at_most(model.q(i), y)) n = i;
  }
  if (n == 0) throw UsageError("classify_resonance: y = " + std::to_string(y) + " lies below b_1");
  if (n == model.depth()) {
    throw UsageError("classify_resonance: model too shallow, no stored b_{n+1} above y = " + std::to_string(y));
  }
  ResonanceReport r;
  r.y = y;
  r.n = n;
  r.q_n = model.q(n);
  r.b_n = resonance_scale(model, n);

  const Int q = r.q_n;
  const Int below = y / q;
  // closest positive multiple
  Int best_ell = 0;
  Int best_d = 0;
  for (Int ell : {below, below + 1}) {
    if (ell < 1) continue;
    const Int d = y > ell * q ? y - ell * q : ell * q - y;
    if (best_ell == 0 || d < best_d) {
      best_ell = ell;
      best_d = d;
    }
  }
  if (best_ell >= 1 && within_resonance_scale(best_d, q)) {
    r.resonant = true;
    r.ell = best_ell;
    return r;
  }
  const Int d_lo = y - below * q;
  const Int d_hi = (below + 1) * q - y;
  if (d_lo <= d_hi) {
    r.m = below;
    r.y0 = d_lo;
    r.offset_sign = 1;
  } else {
    r.m = below + 1;
    r.y0 = d_hi;
    r.offset_sign = -1;
  }
  return r;
}

PhaseSet build_nonresonant_sets(const ResonanceReport& report, const ResonantPhase& phase,
                                std::shared_ptr<const FrequencyModel> model) {
  if (report.resonant) throw UsageError("build_nonresonant_sets: report is resonant");
  if (phase.p > 0) throw UsageError("build_nonresonant_sets: p must be non-positive");
  if (report.n < 1) throw UsageError("build_nonresonant_sets: scale index must be at least 1");
  const Int q_prev = model->q(report.n - 1);
  const Int q_n = model->q(report.n);
  const Int p = phase.p;
  // largest s with 4 s q_{n-1} - p + 1 <= y0
  const Int s = (report.y0 + p - 1) >= 0 ? (report.y0 + p - 1) / (4 * q_prev) : 0;
  if (s < 1) {
    throw DegenerateError("nonresonant construction degenerate: 4 q_{n-1} - p + 1 = " +
                          std::to_string(4 * q_prev - p + 1) + " > y0 = " + std::to_string(report.y0) + " (s = 0)");
  }
  if (8 * s * q_prev >= q_n) {
    throw DegenerateError("nonresonant construction degenerate: 8 s q_{n-1} >= q_n");
  }
  PhaseSet set;
  set.kind = PhaseSetKind::NonResonant;
  set.s = s;
  set.n = report.n;
  set.q_prev = q_prev;
  set.q_n = q_n;
  set.i1 = IntervalZ(-2 * s * q_prev, -1);
  set.i2 = IntervalZ(report.y - 2 * s * q_prev, report.y + 2 * s * q_prev - 1);
  set.theta = phase.theta;
  set.resonant = phase;
  set.freq = model;
  fill_phases(set, phase_carrier(model, phase));
  return set;
}

PhaseSet build_nonresonant_sets(const ResonanceReport& report, Int p, std::shared_ptr<const FrequencyModel> model) {
  const ResonantPhase phase = make_resonant_phase(*model, p, 0);
  return build_nonresonant_sets(report, phase, std::move(model));
}

PhaseSet build_resonant_sets_at(std::size_t n, Int ell, const ResonantPhase& phase,
                                std::shared_ptr<const FrequencyModel> model) {
  if (phase.p > 0) throw UsageError("build_resonant_sets: p must be non-positive");
  if (n < 1) throw UsageError("build_resonant_sets: scale index must be at least 1");
  if (ell < 1) throw UsageError("build_resonant_sets: l must be positive");
  const Int q_prev = model->q(n - 1);
  const Int q_n = model->q(n);
  const Int cap = q_n + phase.p - 1;
  const Int s = cap >= 0 ? cap / (7 * q_prev) : 0;
  if (s < 1) {
    throw DegenerateError("resonant construction degenerate: 7 q_{n-1} = " + std::to_string(7 * q_prev) +
                          " > q_n + p - 1 = " + std::to_string(cap) + " (s = 0)");
  }
  PhaseSet set;
  set.kind = PhaseSetKind::Resonant;
  set.s = s;
  set.n = n;
  set.q_prev = q_prev;
  set.q_n = q_n;
  set.i1 = IntervalZ(-4 * s * q_prev, -1);
  set.i2 = IntervalZ(ell * q_n - 3 * s * q_prev, ell * q_n + 3 * s * q_prev - 1);
  set.theta = phase.theta;
  set.resonant = phase;
  set.freq = model;
  fill_phases(set, phase_carrier(model, phase));
  return set;
}

PhaseSet build_resonant_sets(const ResonanceReport& report, const ResonantPhase& phase,
                             std::shared_ptr<const FrequencyModel> model) {
  if (!report.resonant || !report.ell) throw UsageError("build_resonant_sets: report is not resonant");
  return build_resonant_sets_at(report.n, *report.ell, phase, std::move(model));
}

PhaseSet build_resonant_sets(const ResonanceReport& report, Int p, std::shared_ptr<const FrequencyModel> model) {
  const ResonantPhase phase = make_resonant_phase(*model, p, 0);
  return build_resonant_sets(report, phase, std::move(model));
}

namespace {

/// ln|sin pi x| for x given through its distance to the integers.
double log_sin_pi_dist(double d) { return std::log(std::sin(std::numbers::pi * d)); }

/// Per-i sums D_i = sum_{j != i} ln|cos 2 pi theta_i - cos 2 pi theta_j|, via
/// cos a - cos b = -2 sin pi(a' + b') sin pi(a' - b') with a = 2 pi a'.
std::vector<double> lagrange_denominators(const PhaseSet& set) {
  const FrequencyModel& model = *set.freq;
  const Int lo = set.indices.front();
  const Int hi = set.indices.back();
  const Int span = hi - lo;
  // difference table: index m + span for m = i - j
  std::vector<double> diff_log(static_cast<std::size_t>(2 * span + 1));
  for (Int m = -span; m <= span; ++m) {
    diff_log[static_cast<std::size_t>(m + span)] = m == 0 ? 0.0 : log_sin_pi_dist(model.dist_multiple(m));
  }
  // sum table: index t - 2 lo for t = i + j
  std::vector<double> sum_log(static_cast<std::size_t>(2 * span + 1));
  for (Int t = 2 * lo; t <= 2 * hi; ++t) {
    double d = 0.0;
    if (set.resonant) {
      d = model.dist_multiple(static_cast<Wide>(set.resonant->p) + t);
    } else {
      d = dist_to_integers(2.0 * set.theta + model.frac_multiple(t));
    }
    sum_log[static_cast<std::size_t>(t - 2 * lo)] = log_sin_pi_dist(d);
  }
  const std::size_t size = set.indices.size();
  std::vector<double> out(size, 0.0);
  for (std::size_t a = 0; a < size; ++a) {
    const Int i = set.indices[a];
    double acc = static_cast<double>(size - 1) * kLn2;
    for (std::size_t b = 0; b < size; ++b) {
      if (a == b) continue;
      const Int j = set.indices[b];
      const double term = diff_log[static_cast<std::size_t>(i - j + span)] +
                          sum_log[static_cast<std::size_t>(i + j - 2 * lo)];
      if (!std::isfinite(term)) {
        std::string why;
        if ((i - j) % model.precision_q() == 0 || (i + j + (set.resonant ? set.resonant->p : 0)) % model.precision_q() == 0) {
          why = " (alpha is stored as a rational with denominator " + std::to_string(model.precision_q()) +
                "; supply deeper digits)";
        }
        throw DegenerateError("uniformity_margin: coincident phases at j = " + std::to_string(i) + " and " +
                              std::to_string(j) + why);
      }
      acc += term;
    }
    out[a] = acc;
  }
  return out;
}

struct GridValue {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t argmax = 0;
};

/// max_i [ sum_{j != i} ln|x - c_j| - D_i ] at a single x.
GridValue evaluate_at(double x, const std::vector<double>& c, const std::vector<double>& denom) {
  const std::size_t size = c.size();
  double total = 0.0;
  std::size_t zeros = 0;
  std::size_t zero_at = 0;
  for (std::size_t j = 0; j < size; ++j) {
    const double diff = std::fabs(x - c[j]);
    if (diff == 0.0) {
      ++zeros;
      zero_at = j;
    } else {
      total += std::log(diff);
    }
  }
  GridValue gv;
  if (zeros > 1) return gv;
  if (zeros == 1) {
    gv.value = total - denom[zero_at];
    gv.argmax = zero_at;
    return gv;
  }
  for (std::size_t i = 0; i < size; ++i) {
    const double v = total - std::log(std::fabs(x - c[i])) - denom[i];
    if (v > gv.value) {
      gv.value = v;
      gv.argmax = i;
    }
  }
  return gv;
}

double single_basis(double x, std::size_t i, const std::vector<double>& c, const std::vector<double>& denom) {
  double total = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j == i) continue;
    total += std::log(std::fabs(x - c[j]));
  }
  return total - denom[i];
}

}  // namespace

UniformityReport uniformity_margin(const PhaseSet& phases, const UniformityOptions& opts) {
  if (phases.indices.size() < 2) throw UsageError("uniformity_margin: need at least two phases");
  if (!phases.freq) throw UsageError("uniformity_margin: phase set without frequency");
  const std::size_t size = phases.indices.size();
  std::vector<double> c(size);
  for (std::size_t a = 0; a < size; ++a) c[a] = cos_two_pi(phases.thetas[a]);
  const std::vector<double> denom = lagrange_denominators(phases);

  UniformityReport rep;
  rep.grid_points = opts.grid_points == 0 ? 4 * size : opts.grid_points;
  if (rep.grid_points < 2) throw UsageError("uniformity_margin: grid needs at least two points");
  const std::size_t g_last = rep.grid_points - 1;
  auto node = [&](std::size_t g) { return std::cos(std::numbers::pi * static_cast<double>(g_last - g) / g_last); };

  GridValue best;
  std::size_t best_g = 0;
  for (std::size_t g = 0; g < rep.grid_points; ++g) {
    const GridValue gv = evaluate_at(node(g), c, denom);
    if (gv.value > best.value) {
      best = gv;
      best_g = g;
    }
  }
  rep.argmax_i = best.argmax;
  rep.argmax_x = node(best_g);
  double best_value = best.value;

  if (opts.refine) {
    double a = best_g == 0 ? -1.0 : node(best_g - 1);
    double b = best_g == g_last ? 1.0 : node(best_g + 1);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = single_basis(x1, best.argmax, c, denom);
    double f2 = single_basis(x2, best.argmax, c, denom);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = single_basis(x2, best.argmax, c, denom);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = single_basis(x1, best.argmax, c, denom);
      }
    }
    const double x_ref = f1 > f2 ? x1 : x2;
    const double f_ref = std::max(f1, f2);
    rep.refined = true;
    if (f_ref > best_value) {
      best_value = f_ref;
      rep.argmax_x = x_ref;
    }
  }
  rep.argmax_index = phases.indices[rep.argmax_i];
  rep.log_max_product = best_value;
  rep.epsilon_hat = best_value / static_cast<double>(size - 1);
  return rep;
}

ReferenceMargins reference_margins(const PhaseSet& phases, double beta_hat) {
  ReferenceMargins m;
  const double s = static_cast<double>(phases.s);
  const double qn = static_cast<double>(phases.q_n);
  const double qp = static_cast<double>(phases.q_prev);
  m.nonresonant = -2.0 * std::log(s / qn) / qp;
  m.resonant = 1.4 * beta_hat;
  m.resonant_finite = std::numeric_limits<double>::quiet_NaN();
  if (phases.freq && phases.n + 1 <= phases.freq->depth()) {
    m.resonant_finite = m.nonresonant + std::log(static_cast<double>(phases.freq->q(phases.n + 1))) / (5.0 * s * qp);
  }
  return m;
}

LogSinSum log_sin_sum(double x, Int q_n, const FrequencyModel& model) {
  if (q_n < 1) throw UsageError("log_sin_sum: q_n must be positive");
  if (!std::isfinite(x)) throw UsageError("log_sin_sum: x must be finite");
  std::vector<double> logs(static_cast<std::size_t>(q_n));
  double min_dist = 1.0;
  LogSinSum out;
  for (Int ell = 0; ell < q_n; ++ell) {
    const double d = dist_to_integers(x + model.frac_multiple(ell));
    logs[static_cast<std::size_t>(ell)] = log_sin_pi_dist(d);
    if (d < min_dist) {
      min_dist = d;
      out.ell0 = ell;
    }
  }
  double sum = static_cast<double>(q_n - 1) * kLn2;
  for (Int ell = 0; ell < q_n; ++ell) {
    if (ell != out.ell0) sum += logs[static_cast<std::size_t>(ell)];
  }
  out.sum_excl_min = sum;
  out.c_hat = std::fabs(sum) / static_cast<double>(q_n);
  return out;
}

namespace {

void check_same_phase(const PhaseSet& phases, const OperatorParams& params) {
  if (std::fabs(phases.theta - params.theta) > 1e-15) {
    throw UsageError("select_nonuniform_theta: params.theta differs from the phase set's theta");
  }
}

}  // namespace

NonUniformSelection select_nonuniform_theta(const PhaseSet& phases, const OperatorParams& params, double rate_r) {
  check_same_phase(phases, params);
  const std::size_t k = phases.window();
  NonUniformSelection sel;
  for (Int j : phases.indices) {
    ++sel.scanned;
    const MembershipResult m = in_A_kr_site(params, k, rate_r, j);
    if (!m.member) {
      sel.found = true;
      sel.j0 = j;
      sel.margin = m.margin;
      return sel;
    }
  }
  return sel;
}

NonUniformSelection select_nonuniform_theta_extended(const PhaseSet& phases, const OperatorParams& params,
                                                     const Extended& energy, double rate_r) {
  check_same_phase(phases, params);
  const std::size_t k = phases.window();
  NonUniformSelection sel;
  for (Int j : phases.indices) {
    ++sel.scanned;
    const MembershipResult m = in_A_kr_site_extended(params, energy, k, rate_r, j);
    if (!m.member) {
      sel.found = true;
      sel.j0 = j;
      sel.margin = m.margin;
      return sel;
    }
  }
  return sel;
}

}  // namespace amo
