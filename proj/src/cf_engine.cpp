#include "amo/cf_engine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace amo {

namespace {

Wide mod_positive(Wide a, Wide m) {
  Wide r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

Int FrequencyModel::q(std::size_t n) const {
  if (n > depth_) throw UsageError("FrequencyModel::q: index " + std::to_string(n) + " beyond depth");
  return conv_[n].q;
}

Int FrequencyModel::p(std::size_t n) const {
  if (n > depth_) throw UsageError("FrequencyModel::p: index " + std::to_string(n) + " beyond depth");
  return conv_[n].p;
}

double FrequencyModel::delta(std::size_t n) const {
  if (n >= deltas_.size()) throw UsageError("FrequencyModel::delta: index out of range");
  return deltas_[n];
}

Wide FrequencyModel::delta_numerator(std::size_t n) const {
  if (n >= delta_num_.size()) throw UsageError("FrequencyModel::delta_numerator: index out of range");
  return delta_num_[n];
}

double FrequencyModel::value_error_bound() const {
  const double q = static_cast<double>(precision_q());
  return 1.0 / (q * q);
}

Wide FrequencyModel::residue(Wide m) const {
  const Wide big_q = precision_q();
  // keep m * P inside 128 bits
  const Wide mm = mod_positive(m, big_q);
  return (mm * static_cast<Wide>(precision_p())) % big_q;
}

double FrequencyModel::frac_multiple(Wide m) const {
  return static_cast<double>(residue(m)) / static_cast<double>(precision_q());
}

Wide FrequencyModel::dist_numerator(Wide m) const {
  const Wide r = residue(m);
  return std::min(r, static_cast<Wide>(precision_q()) - r);
}

double FrequencyModel::dist_multiple(Wide m) const {
  return static_cast<double>(dist_numerator(m)) / static_cast<double>(precision_q());
}

FrequencyModel build_frequency(const std::vector<Int>& digits, std::size_t n_max, const FrequencyOptions& opts) {
  if (digits.empty()) throw UsageError("build_frequency: empty digit list");
  for (Int a : digits) {
    if (a <= 0) throw UsageError("build_frequency: digits must be positive, got " + std::to_string(a));
  }
  if (n_max > digits.size()) throw UsageError("build_frequency: n_max exceeds the number of digits");
  if (opts.q_cap < 2) throw UsageError("build_frequency: q_cap must be at least 2");

  FrequencyModel m;
  m.conv_all_.push_back({0, 1});
  Wide p_prev = 1, q_prev = 0;  // index -1
  Wide p_cur = 0, q_cur = 1;    // index 0
  for (std::size_t i = 0; i < digits.size(); ++i) {
    const Wide a = digits[i];
    const Wide q_next = a * q_cur + q_prev;
    const Wide p_next = a * p_cur + p_prev;
    if (q_next > opts.q_cap) {
      m.truncated_ = true;
      std::ostringstream os;
      os << "digit a_" << (i + 1) << " = " << digits[i] << " would give q_" << (i + 1) << " above the cap "
         << opts.q_cap << "; expansion stopped at n = " << i;
      m.truncation_note_ = os.str();
      break;
    }
    m.digits_.push_back(digits[i]);
    m.conv_all_.push_back({static_cast<Int>(p_next), static_cast<Int>(q_next)});
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
  }
  if (m.digits_.empty()) throw UsageError("build_frequency: the first digit already exceeds the denominator cap");

  const std::size_t available = m.digits_.size();
  m.depth_ = std::min(n_max == 0 ? available : n_max, available);
  m.conv_.assign(m.conv_all_.begin(), m.conv_all_.begin() + static_cast<std::ptrdiff_t>(m.depth_) + 1);
  m.value_ = static_cast<double>(m.precision_p()) / static_cast<double>(m.precision_q());

  for (std::size_t n = 0; n < m.depth_; ++n) {
    const Wide num = m.dist_numerator(m.conv_[n].q);
    m.delta_num_.push_back(num);
    m.deltas_.push_back(static_cast<double>(num) / static_cast<double>(m.precision_q()));
  }
  for (std::size_t n = 1; n < m.depth_; ++n) {
    m.beta_seq_.push_back(std::log(static_cast<double>(m.conv_[n + 1].q)) / static_cast<double>(m.conv_[n].q));
  }
  return m;
}

std::vector<Int> exp_schedule_digits(double beta, const std::vector<Int>& seed, const FrequencyOptions& opts,
                                     std::size_t max_digits) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw UsageError("exp schedule: beta must be positive and finite");
  if (seed.empty()) throw UsageError("exp schedule: empty seed");
  std::vector<Int> digits = seed;
  Wide q_prev = 0, q_cur = 1;
  for (Int a : seed) {
    if (a <= 0) throw UsageError("exp schedule: seed digits must be positive");
    const Wide next = static_cast<Wide>(a) * q_cur + q_prev;
    q_prev = q_cur;
    q_cur = next;
  }
  const double log_cap = std::log(static_cast<double>(opts.q_cap));
  while (digits.size() < max_digits) {
    const double qn = static_cast<double>(q_cur);
    const double log_digit = beta * qn - std::log(qn);
    // stop once the next denominator cannot fit under the cap
    if (log_digit + std::log(qn) > log_cap + 1.0) break;
    const double a = std::max(1.0, std::round(std::exp(log_digit)));
    const Wide next = static_cast<Wide>(a) * q_cur + q_prev;
    if (next > opts.q_cap) break;
    digits.push_back(static_cast<Int>(a));
    q_prev = q_cur;
    q_cur = next;
  }
  return digits;
}

BetaEstimate beta_estimate(const FrequencyModel& model, std::size_t window) {
  if (model.depth() < 2) throw UsageError("beta_estimate: need at least two convergents");
  BetaEstimate est;
  est.sequence = model.beta_sequence();
  const std::size_t len = est.sequence.size();
  const std::size_t w = window == 0 ? (len + 1) / 2 : std::min(window, len);
  est.window_begin = len - w;
  est.tail_sup = *std::max_element(est.sequence.begin() + static_cast<std::ptrdiff_t>(est.window_begin),
                                   est.sequence.end());
  return est;
}

double dist_to_integers(double x) {
  if (!std::isfinite(x)) throw UsageError("dist_to_integers: non-finite input");
  return std::fabs(x - std::nearbyint(x));
}

BestDenominatorReport verify_best_denominators(const FrequencyModel& model, std::size_t n, Int brute_force_cap) {
  if (n + 1 > model.depth()) throw UsageError("verify_best_denominators: q_{n+1} not stored");
  const Int q_next = model.q(n + 1);
  if (q_next > brute_force_cap) {
    throw UsageError("verify_best_denominators: q_{n+1} = " + std::to_string(q_next) + " exceeds the brute-force cap");
  }
  const Wide reference = model.dist_numerator(model.q(n));
  BestDenominatorReport rep;
  Wide best = std::numeric_limits<Int>::max();
  for (Int k = 1; k < q_next; ++k) {
    const Wide d = model.dist_numerator(k);
    if (d < best) {
      best = d;
      rep.worst_k = k;
    }
    if (d < reference) rep.holds = false;
  }
  return rep;
}

double resonance_scale(const FrequencyModel& model, std::size_t n) {
  return std::pow(static_cast<double>(model.q(n)), 8.0 / 9.0);
}

bool within_resonance_scale(Int d, Int q) {
  if (d < 0) d = -d;
  // q^{8/9} is an integer only for perfect ninth powers q = r^9
  const double root = std::round(std::pow(static_cast<double>(q), 1.0 / 9.0));
  Wide r9 = 1;
  for (int i = 0; i < 9; ++i) r9 *= static_cast<Wide>(root);
  if (r9 == q) {
    Wide r8 = r9 / static_cast<Wide>(root);
    return static_cast<Wide>(d) <= r8;
  }
  return 9.0 * std::log(static_cast<double>(d)) <= 8.0 * std::log(static_cast<double>(q)) || d == 0;
}

ResonantPhase make_resonant_phase(const FrequencyModel& model, Int p, Int j) {
  if (p > 0) throw UsageError("make_resonant_phase: p must be non-positive");
  const Wide big_q = model.precision_q();
  // theta = (j + {p alpha}) / 2 = (j Q + (p P mod Q)) / (2 Q)
  const Wide num = mod_positive(static_cast<Wide>(j) * big_q + model.residue(p), 2 * big_q);
  ResonantPhase rp;
  rp.p = p;
  rp.j = j;
  rp.numerator = num;
  rp.theta = static_cast<double>(num) / static_cast<double>(2 * big_q);
  return rp;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<Int> parse_digit_list(std::string_view body) {
  const std::string t = trim(body);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') throw UsageError("digit list must be bracketed: " + t);
  std::vector<Int> out;
  std::stringstream ss(t.substr(1, t.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string v = trim(item);
    if (v.empty()) throw UsageError("empty entry in digit list");
    std::size_t pos = 0;
    long long x = 0;
    try {
      x = std::stoll(v, &pos);
    } catch (const std::exception&) {
      throw UsageError("bad digit '" + v + "'");
    }
    if (pos != v.size()) throw UsageError("bad digit '" + v + "'");
    if (x <= 0) throw UsageError("digits must be positive, got " + v);
    out.push_back(x);
  }
  if (out.empty()) throw UsageError("empty digit list");
  return out;
}

}  // namespace

FrequencySpec parse_frequency_spec(std::string_view text) {
  FrequencySpec spec;
  spec.text = trim(text);
  const std::string& t = spec.text;
  if (t == "golden") {
    spec.kind = FrequencySpec::Kind::Golden;
  } else if (t == "silver") {
    spec.kind = FrequencySpec::Kind::Silver;
  } else if (t.rfind("cf:", 0) == 0) {
    spec.kind = FrequencySpec::Kind::Digits;
    spec.digits = parse_digit_list(std::string_view(t).substr(3));
  } else if (t.rfind("cf-rule:exp(", 0) == 0 && t.back() == ')') {
    spec.kind = FrequencySpec::Kind::ExpRule;
    const std::string body = t.substr(12, t.size() - 13);
    const auto beta_pos = body.find("beta=");
    const auto seed_pos = body.find("seed=");
    if (beta_pos == std::string::npos || seed_pos == std::string::npos) {
      throw UsageError("cf-rule:exp needs beta= and seed=: " + t);
    }
    const auto comma = body.find(',', beta_pos);
    const std::string beta_txt = trim(body.substr(beta_pos + 5, comma == std::string::npos ? std::string::npos
                                                                                           : comma - beta_pos - 5));
    try {
      std::size_t pos = 0;
      spec.beta = std::stod(beta_txt, &pos);
      if (pos != beta_txt.size()) throw UsageError("bad beta");
    } catch (const std::exception&) {
      throw UsageError("bad beta value '" + beta_txt + "'");
    }
    if (!(spec.beta > 0.0)) throw UsageError("beta must be positive");
    const auto close = body.find(']', seed_pos);
    if (close == std::string::npos) throw UsageError("unterminated seed list: " + t);
    spec.digits = parse_digit_list(body.substr(seed_pos + 5, close - seed_pos - 4));
  } else {
    throw UsageError("unrecognized frequency spec '" + t + "'");
  }
  return spec;
}

FrequencyModel make_frequency(const FrequencySpec& spec, std::size_t depth, const FrequencyOptions& opts) {
  std::vector<Int> digits;
  // presets: enough digits to reach any cap below 2^63
  constexpr std::size_t kPresetDigits = 92;
  switch (spec.kind) {
    case FrequencySpec::Kind::Golden:
      digits.assign(kPresetDigits, 1);
      break;
    case FrequencySpec::Kind::Silver:
      digits.assign(kPresetDigits, 2);
      break;
    case FrequencySpec::Kind::Digits:
      digits = spec.digits;
      break;
    case FrequencySpec::Kind::ExpRule:
      digits = exp_schedule_digits(spec.beta, spec.digits, opts);
      break;
  }
  if (depth > digits.size()) {
    throw UsageError("requested depth " + std::to_string(depth) + " exceeds the " + std::to_string(digits.size()) +
                     " available digits");
  }
  return build_frequency(digits, depth, opts);
}

}  // namespace amo
