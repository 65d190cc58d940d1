#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amo/determinant.hpp"

namespace amo {

/// Integer interval [x1, x2], x1 <= x2.
struct IntervalZ {
  Int x1 = 0;
  Int x2 = 0;

  IntervalZ() = default;
  IntervalZ(Int a, Int b);

  Int length() const { return x2 - x1 + 1; }
  bool contains(Int y) const { return x1 <= y && y <= x2; }
  bool operator==(const IntervalZ&) const = default;
};

enum class Endpoint { Left, Right };

struct GreenEntry {
  /// Signed G_I(x1, y) (Left) or G_I(y, x2) (Right); zero when singular.
  LogScalar value;
  /// P_k(theta + x1 alpha) == 0: E is an eigenvalue of the box restriction.
  bool singular = false;
};

/// G_I(x1, y) = (-1)^{y-x1} P_{x2-y}(theta + (y+1) alpha) / P_k(theta + x1 alpha) and
/// G_I(y, x2) = (-1)^{x2-y} P_{y-x1}(theta + x1 alpha) / P_k(theta + x1 alpha), P_0 = 1.
GreenEntry green_entry_cramer(const OperatorParams& params, const IntervalZ& box, Int y, Endpoint endpoint);

/// Both endpoint entries of a box at y, sharing the denominator.
struct GreenPair {
  LogScalar left;   // G_I(x1, y)
  LogScalar right;  // G_I(y, x2)
  bool singular = false;
};
GreenPair green_pair_cramer(const OperatorParams& params, const IntervalZ& box, Int y);

/// Dense inverse of R_I (H - E) R_I; row/column i corresponds to site x1 + i.
struct DenseGreen {
  IntervalZ box;
  Eigen::MatrixXd values;
  double rcond = 0.0;

  double at(Int x, Int y) const { return values(x - box.x1, y - box.x1); }
  LogScalar log_entry(Int x, Int y) const { return LogScalar::from_double(at(x, y)); }
};

inline constexpr Int kDenseGreenCap = 2000;

/// Partial-pivot LU inverse with one step of iterative refinement. Throws
/// DegenerateError when the box is numerically singular.
DenseGreen green_dense(const OperatorParams& params, const IntervalZ& box);

/// The k-site box restriction of H - E as a dense matrix.
Eigen::MatrixXd box_matrix(const OperatorParams& params, const IntervalZ& box);

struct RegularityVerdict {
  Int y = 0;
  double t = 0.0;
  Int k = 0;
  bool regular = false;
  std::optional<IntervalZ> witness;
  /// ln|G_I(y, x_i)| + t |y - x_i| for i = 1, 2 at the witness, or at the
  /// candidate with the smallest worse-side margin when none succeeds.
  std::pair<double, double> margins{0.0, 0.0};
  std::size_t candidates_tested = 0;
  std::size_t candidates_rejected = 0;  // failed the |y - x_i| >= k/7 geometry
  std::size_t candidates_singular = 0;
};

/// All windows [y - j, y - j + k - 1] with |y - x_i| >= k/7 at both ends, by ascending x1.
std::vector<IntervalZ> default_regularity_candidates(Int y, Int k);

/// (t,k)-regularity: some candidate box of length k around y with
/// |G_I(y, x_i)| < e^{-t |y - x_i|} and |y - x_i| >= k/7 for i = 1, 2.
RegularityVerdict classify_regularity(const OperatorParams& params, Int y, double t, Int k,
                                      const std::vector<IntervalZ>& candidates);
RegularityVerdict classify_regularity(const OperatorParams& params, Int y, double t, Int k);

/// phi(y) = -G_I(x1, y) phi(x1 - 1) - G_I(y, x2) phi(x2 + 1).
double resolvent_step(const OperatorParams& params, const IntervalZ& box, Int y, double phi_left, double phi_right);

struct BlockExpansionResult {
  double value = 0.0;
  std::size_t terms = 0;
  /// Largest ln|G ... G| over all chains.
  double max_chain_decay = -std::numeric_limits<double>::infinity();
  std::size_t max_depth_reached = 0;
};

struct BlockExpansionOptions {
  /// Sites z' whose value is expanded further; others terminate the chain.
  IntervalZ expand_range;
  std::size_t depth_cap = 1;
};

/// Range [b_n + 2, 2k - 2] and depth floor(2k / q_{n-1}) used when expanding
/// phi at site k with resonance scale b_n.
BlockExpansionOptions scale_expansion_options(Int target, double b_n, Int q_prev);

/// Iterates resolvent_step along chains of boxes supplied by interval_factory,
/// replacing phi(z') by its own expansion while z' stays in expand_range and the
/// chain is shorter than depth_cap.
BlockExpansionResult block_expansion(const OperatorParams& params, Int target, const std::function<double(Int)>& phi,
                                     const std::function<IntervalZ(Int)>& interval_factory,
                                     const BlockExpansionOptions& opts);

}  // namespace amo
