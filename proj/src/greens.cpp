#include "amo/greens.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace amo {

IntervalZ::IntervalZ(Int a, Int b) : x1(a), x2(b) {
  if (a > b) throw UsageError("IntervalZ: x1 > x2 (" + std::to_string(a) + ", " + std::to_string(b) + ")");
}

namespace {

std::string describe(const IntervalZ& box) {
  std::ostringstream os;
  os << "[" << box.x1 << ", " << box.x2 << "]";
  return os.str();
}

LogScalar alternating(LogScalar v, Int power) {
  if (power % 2 != 0) v = -v;
  return v;
}

}  // namespace

GreenPair green_pair_cramer(const OperatorParams& params, const IntervalZ& box, Int y) {
  if (!box.contains(y)) throw UsageError("green_pair_cramer: y outside " + describe(box));
  const auto k = static_cast<std::size_t>(box.length());
  const LogScalar denom = pk_at(params, k, box.x1);
  GreenPair out;
  if (denom.is_zero()) {
    out.singular = true;
    return out;
  }
  const LogScalar num_left = pk_at(params, static_cast<std::size_t>(box.x2 - y), y + 1);
  const LogScalar num_right = pk_at(params, static_cast<std::size_t>(y - box.x1), box.x1);
  out.left = alternating(num_left / denom, y - box.x1);
  out.right = alternating(num_right / denom, box.x2 - y);
  return out;
}

GreenEntry green_entry_cramer(const OperatorParams& params, const IntervalZ& box, Int y, Endpoint endpoint) {
  const GreenPair pair = green_pair_cramer(params, box, y);
  GreenEntry e;
  e.singular = pair.singular;
  if (!pair.singular) e.value = endpoint == Endpoint::Left ? pair.left : pair.right;
  return e;
}

Eigen::MatrixXd box_matrix(const OperatorParams& params, const IntervalZ& box) {
  const Int k = box.length();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
  for (Int i = 0; i < k; ++i) {
    a(i, i) = params.potential(box.x1 + i) - params.energy;
    if (i + 1 < k) {
      a(i, i + 1) = 1.0;
      a(i + 1, i) = 1.0;
    }
  }
  return a;
}

DenseGreen green_dense(const OperatorParams& params, const IntervalZ& box) {
  if (box.length() > kDenseGreenCap) throw UsageError("green_dense: box longer than the dense cap");
  const Eigen::MatrixXd a = box_matrix(params, box);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  DenseGreen g;
  g.box = box;
  g.rcond = lu.rcond();
  if (!(g.rcond > 1e-14)) {
    throw DegenerateError("green_dense: box " + describe(box) + " is numerically singular (rcond " +
                          std::to_string(g.rcond) + ")");
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  g.values = lu.solve(id);
  const Eigen::MatrixXd residual = id - a * g.values;
  g.values += lu.solve(residual);
  return g;
}

std::vector<IntervalZ> default_regularity_candidates(Int y, Int k) {
  if (k < 1) throw UsageError("default_regularity_candidates: k must be positive");
  std::vector<IntervalZ> out;
  // x1 = y - j ascending means j descending
  for (Int j = k - 1; j >= 0; --j) {
    const Int left = j;
    const Int right = k - 1 - j;
    if (7 * left >= k && 7 * right >= k) out.emplace_back(y - j, y - j + k - 1);
  }
  return out;
}

RegularityVerdict classify_regularity(const OperatorParams& params, Int y, double t, Int k,
                                      const std::vector<IntervalZ>& candidates) {
  if (candidates.empty()) throw UsageError("classify_regularity: empty candidate set");
  RegularityVerdict v;
  v.y = y;
  v.t = t;
  v.k = k;
  double best_worst = std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (const IntervalZ& box : candidates) {
    const Int dl = y - box.x1;
    const Int dr = box.x2 - y;
    if (box.length() != k || !box.contains(y) || 7 * dl < k || 7 * dr < k) {
      ++v.candidates_rejected;
      continue;
    }
    ++v.candidates_tested;
    const GreenPair g = green_pair_cramer(params, box, y);
    if (g.singular) {
      ++v.candidates_singular;
      continue;
    }
    const double m1 = g.left.log_mag + t * static_cast<double>(dl);
    const double m2 = g.right.log_mag + t * static_cast<double>(dr);
    if (m1 < 0.0 && m2 < 0.0) {
      v.regular = true;
      v.witness = box;
      v.margins = {m1, m2};
      return v;
    }
    const double worst = std::max(m1, m2);
    if (!have_best || worst < best_worst) {
      best_worst = worst;
      v.margins = {m1, m2};
      have_best = true;
    }
  }
  if (v.candidates_tested == 0) {
    throw UsageError("classify_regularity: every candidate violates the k/7 geometry or misses y");
  }
  return v;
}

RegularityVerdict classify_regularity(const OperatorParams& params, Int y, double t, Int k) {
  return classify_regularity(params, y, t, k, default_regularity_candidates(y, k));
}

double resolvent_step(const OperatorParams& params, const IntervalZ& box, Int y, double phi_left, double phi_right) {
  const GreenPair g = green_pair_cramer(params, box, y);
  if (g.singular) throw DegenerateError("resolvent_step: singular box " + describe(box));
  return -g.left.to_double() * phi_left - g.right.to_double() * phi_right;
}

BlockExpansionOptions scale_expansion_options(Int target, double b_n, Int q_prev) {
  if (q_prev < 1) throw UsageError("scale_expansion_options: q_{n-1} must be positive");
  BlockExpansionOptions o;
  const Int lo = static_cast<Int>(std::floor(b_n)) + 2;
  const Int hi = 2 * target - 2;
  if (lo > hi) throw UsageError("scale_expansion_options: empty expansion range");
  o.expand_range = IntervalZ(lo, hi);
  o.depth_cap = static_cast<std::size_t>(std::max<Int>(1, (2 * target) / q_prev));
  return o;
}

namespace {

struct Expander {
  const OperatorParams& params;
  const std::function<double(Int)>& phi;
  const std::function<IntervalZ(Int)>& factory;
  const BlockExpansionOptions& opts;
  BlockExpansionResult result;

  IntervalZ box_for(Int site) const {
    IntervalZ box;
    try {
      box = factory(site);
    } catch (const std::exception& ex) {
      throw DegenerateError("block_expansion: interval factory failed at site " + std::to_string(site) + ": " +
                            ex.what());
    }
    const Int dist = std::min(site - box.x1, box.x2 - site);
    if (!box.contains(site) || 7 * dist <= box.length()) {
      throw DegenerateError("block_expansion: box " + describe(box) + " for site " + std::to_string(site) +
                            " violates dist(y, boundary) > |I|/7");
    }
    return box;
  }

  // Adds coefficient * phi(site) to the result, expanding phi(site) when allowed.
  // Terms are accumulated in chain order (left branch before right), which fixes
  // the summation order.
  void expand(Int site, const LogScalar& coefficient, std::size_t depth) {
    const IntervalZ box = box_for(site);
    const GreenPair g = green_pair_cramer(params, box, site);
    if (g.singular) throw DegenerateError("block_expansion: singular box " + describe(box));
    const std::pair<Int, LogScalar> branches[2] = {{box.x1 - 1, -g.left}, {box.x2 + 1, -g.right}};
    for (const auto& [next, green] : branches) {
      const LogScalar chain = coefficient * green;
      const std::size_t next_depth = depth + 1;
      result.max_depth_reached = std::max(result.max_depth_reached, next_depth);
      if (opts.expand_range.contains(next) && next_depth < opts.depth_cap) {
        expand(next, chain, next_depth);
      } else {
        result.value += chain.to_double() * phi(next);
        result.max_chain_decay = std::max(result.max_chain_decay, chain.log_mag);
        ++result.terms;
      }
    }
  }
};

}  // namespace

BlockExpansionResult block_expansion(const OperatorParams& params, Int target, const std::function<double(Int)>& phi,
                                     const std::function<IntervalZ(Int)>& interval_factory,
                                     const BlockExpansionOptions& opts) {
  if (opts.depth_cap < 1) throw UsageError("block_expansion: depth_cap must be at least 1");
  Expander ex{params, phi, interval_factory, opts, {}};
  ex.expand(target, LogScalar::one(), 0);
  return ex.result;
}

}  // namespace amo
