#include "amo/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace amo {

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void write(std::ostringstream& os, const Json& j, int indent, int level) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (level + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * level), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{" << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << "," << nl;
        first = false;
        os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write(os, it.value(), indent, level + 1);
      }
      os << nl << close_pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[" << nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << "," << nl;
        first = false;
        os << pad;
        write(os, v, indent, level + 1);
      }
      os << nl << close_pad << "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      os << (std::isfinite(x) ? format17(x) : "null");
      return;
    }
    default:
      os << j.dump();
  }
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

/// 1/(2 q_{n+1}) <= Delta_n <= 1/q_{n+1}, in integers over the precision denominator.
bool delta_bracket_holds(const FrequencyModel& model, std::size_t n) {
  const Wide num = model.delta_numerator(n);
  const Wide big_q = model.precision_q();
  const Wide q_next = model.q(n + 1);
  return big_q <= 2 * num * q_next && num * q_next <= big_q;
}

}  // namespace

std::string dump17(const Json& j, int indent) {
  std::ostringstream os;
  write(os, j, indent, 0);
  return os.str();
}

Json artifact_json() { return {{"name", kArtifactName}, {"version", kArtifactVersion}}; }

Json to_json(const LogScalar& v) {
  Json j;
  j["sign"] = v.sign;
  j["log_mag"] = finite_or_null(v.log_mag);
  j["value"] = finite_or_null(v.to_double());
  j["cancellation"] = v.cancellation;
  return j;
}

Json to_json(const IntervalZ& box) { return Json::array({box.x1, box.x2}); }

Json frequency_report(const FrequencyModel& model, std::size_t beta_window, Int brute_force_cap) {
  Json j;
  j["digits"] = model.digits();
  j["depth"] = model.depth();
  j["truncated"] = model.truncated();
  j["truncation_note"] = model.truncation_note();
  j["value"] = model.value();
  j["value_error_bound"] = model.value_error_bound();
  j["precision_denominator"] = model.precision_q();
  Json conv = Json::array();
  for (std::size_t n = 0; n <= model.depth(); ++n) conv.push_back({{"n", n}, {"p", model.p(n)}, {"q", model.q(n)}});
  j["convergents"] = conv;

  bool all_ok = true;
  Json deltas = Json::array();
  for (std::size_t n = 0; n < model.deltas().size(); ++n) {
    const double q_next = static_cast<double>(model.q(n + 1));
    Json row{{"n", n}, {"delta", model.delta(n)}, {"lower", 1.0 / (2.0 * q_next)}, {"upper", 1.0 / q_next}};
    if (model.q(n) == model.q(n + 1)) {
      // a_1 = 1: q_0 = q_1 and ||alpha|| = 1 - alpha, not |q_0 alpha - p_0|
      row["ok"] = nullptr;
      row["note"] = "q_n = q_{n+1}; bracket not applicable";
    } else {
      const bool ok = delta_bracket_holds(model, n);
      all_ok = all_ok && ok;
      row["ok"] = ok;
    }
    deltas.push_back(row);
  }
  j["deltas"] = deltas;

  bool det_ok = true;
  for (std::size_t n = 0; n < model.depth(); ++n) {
    const Wide d = static_cast<Wide>(model.p(n)) * model.q(n + 1) - static_cast<Wide>(model.p(n + 1)) * model.q(n);
    const Wide expected = n % 2 == 0 ? -1 : 1;
    det_ok = det_ok && d == expected;
  }
  j["determinant_identity_ok"] = det_ok;
  all_ok = all_ok && det_ok;

  if (model.depth() >= 2) {
    const BetaEstimate b = beta_estimate(model, beta_window);
    j["beta_sequence"] = b.sequence;
    j["beta_hat"] = b.tail_sup;
    j["beta_window_begin"] = b.window_begin;
  } else {
    j["beta_sequence"] = Json::array();
    j["beta_hat"] = nullptr;
    j["beta_window_begin"] = nullptr;
  }

  Json best = Json::array();
  for (std::size_t n = 0; n < model.depth(); ++n) {
    if (model.q(n + 1) > brute_force_cap) break;
    const BestDenominatorReport r = verify_best_denominators(model, n, brute_force_cap);
    all_ok = all_ok && r.holds;
    best.push_back({{"n", n}, {"q_next", model.q(n + 1)}, {"holds", r.holds}, {"worst_k", r.worst_k}});
  }
  j["best_denominators"] = best;
  j["all_checks_pass"] = all_ok;
  return j;
}

Json to_json(const RegularityVerdict& v) {
  Json j;
  j["y"] = v.y;
  j["t"] = v.t;
  j["k"] = v.k;
  j["regular"] = v.regular;
  j["witness"] = v.witness ? to_json(*v.witness) : Json(nullptr);
  j["margins"] = Json::array({finite_or_null(v.margins.first), finite_or_null(v.margins.second)});
  j["candidates_tested"] = v.candidates_tested;
  j["candidates_rejected"] = v.candidates_rejected;
  j["candidates_singular"] = v.candidates_singular;
  return j;
}

Json to_json(const ResonanceReport& r) {
  Json j;
  j["y"] = r.y;
  j["n"] = r.n;
  j["q_n"] = r.q_n;
  j["b_n"] = r.b_n;
  j["resonant"] = r.resonant;
  j["ell"] = r.ell ? Json(*r.ell) : Json(nullptr);
  if (!r.resonant) {
    j["m"] = r.m;
    j["y0"] = r.y0;
    j["offset_sign"] = r.offset_sign;
  }
  return j;
}

Json to_json(const PhaseSet& set) {
  Json j;
  j["kind"] = set.kind == PhaseSetKind::NonResonant ? "nonresonant" : "resonant";
  j["n"] = set.n;
  j["q_prev"] = set.q_prev;
  j["q_n"] = set.q_n;
  j["s"] = set.s;
  j["i1"] = to_json(set.i1);
  j["i2"] = to_json(set.i2);
  j["size"] = set.size();
  j["window_k"] = set.window();
  j["theta"] = set.theta;
  if (set.resonant) {
    j["p"] = set.resonant->p;
    j["j"] = set.resonant->j;
  }
  return j;
}

Json to_json(const UniformityReport& u) {
  Json j;
  j["epsilon_hat"] = finite_or_null(u.epsilon_hat);
  j["log_max_product"] = finite_or_null(u.log_max_product);
  j["argmax_i"] = u.argmax_i;
  j["argmax_index"] = u.argmax_index;
  j["argmax_x"] = u.argmax_x;
  j["grid"] = {{"kind", "chebyshev-lobatto"}, {"points", u.grid_points}, {"refined", u.refined}};
  return j;
}

Json to_json(const ReferenceMargins& m) {
  return {{"nonresonant", finite_or_null(m.nonresonant)},
          {"resonant_7beta_over_5", finite_or_null(m.resonant)},
          {"resonant_finite", finite_or_null(m.resonant_finite)}};
}

Json to_json(const RateSummary& s) {
  return {{"count", s.count}, {"median", s.median}, {"mean", s.mean}, {"min", s.min}, {"max", s.max}};
}

Json to_json(const TheoremVerdict& v) {
  Json j;
  j["lambda"] = v.lambda;
  j["beta_hat"] = v.beta_hat;
  j["threshold_7beta"] = v.threshold_7beta;
  j["threshold_2beta"] = v.threshold_2beta;
  j["reference_lnlambda"] = v.reference_lnlambda;
  j["tolerance"] = v.tolerance;
  j["half_width"] = v.half_width;
  j["regime_ok"] = v.regime_ok;
  j["pass"] = v.pass ? Json(*v.pass) : Json(nullptr);
  j["measured_rates"] = to_json(v.rates);
  j["modes_total"] = v.modes_total;
  j["modes_interior"] = v.modes_interior;
  j["modes_qualifying"] = v.modes_qualifying;
  j["note"] = v.note;
  return j;
}

Json to_json(const FilterCheck& f) {
  Json j;
  j["n"] = f.n;
  j["ell"] = f.ell;
  j["s"] = f.s;
  j["k"] = f.k;
  j["rate"] = f.rate;
  j["i1"] = to_json(f.i1);
  j["i2"] = to_json(f.i2);
  j["i1_nonmembers"] = f.i1_nonmembers;
  j["i2_nonmembers"] = f.i2_nonmembers;
  j["first_nonmember"] = f.first_nonmember ? Json(*f.first_nonmember) : Json(nullptr);
  j["worst_i1_margin"] = finite_or_null(f.worst_i1_margin);
  j["pass"] = f.pass;
  return j;
}

std::string modes_csv(const TheoremVerdict& v) {
  std::vector<bool> chosen(v.modes.size(), false);
  for (std::size_t i : v.selected) chosen[i] = true;
  std::ostringstream os;
  os << "mode_index,energy,center,c,r2,fit_points,selected\n";
  for (std::size_t i = 0; i < v.modes.size(); ++i) {
    const EigenMode& m = v.modes[i];
    os << m.index << "," << format17(m.energy) << "," << m.center << "," << format17(m.fit.rate) << ","
       << format17(m.fit.r2) << "," << m.fit.points << "," << (chosen[i] ? 1 : 0) << "\n";
  }
  return os.str();
}

}  // namespace amo
