#pragma once

// Reference computations that share no code with the library: matrices are
// built from the operator formula directly, with alpha taken as a double.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

inline double potential(double lambda, double alpha, double theta, long long n) {
  return 2.0 * lambda * std::cos(2.0 * std::numbers::pi * (theta + static_cast<double>(n) * alpha));
}

/// Restriction of H - E to the k sites x1 .. x1 + k - 1.
inline Eigen::MatrixXd box(double lambda, double alpha, double theta, double energy, long long x1, int k) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    m(i, i) = potential(lambda, alpha, theta, x1 + i) - energy;
    if (i + 1 < k) m(i, i + 1) = m(i + 1, i) = 1.0;
  }
  return m;
}

struct LogDet {
  int sign = 0;
  double log_abs = 0.0;
};

/// ln|det| and sign from a full-pivot LU, summing logs of the pivots.
inline LogDet log_det(const Eigen::MatrixXd& m) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  const Eigen::MatrixXd& u = lu.matrixLU();
  LogDet r;
  r.sign = static_cast<int>(lu.permutationP().determinant() * lu.permutationQ().determinant());
  for (int i = 0; i < u.rows(); ++i) {
    const double p = u(i, i);
    if (p == 0.0) return {0, -INFINITY};
    if (p < 0) r.sign = -r.sign;
    r.log_abs += std::log(std::fabs(p));
  }
  return r;
}

/// Unnormalized D_{j+1} = d_j D_j - D_{j-1} in exact rationals.
inline Rational exact_det(const std::vector<Rational>& d) {
  Rational cur = 1, prev = 0;
  for (const auto& x : d) {
    Rational next = x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Eigenvalues of [[a,1,0],[1,b,1],[0,1,c]] from the trigonometric cubic formula.
inline std::vector<long double> tridiag3_eigenvalues(long double a, long double b, long double c) {
  const long double s1 = a + b + c;
  const long double s2 = a * b + b * c + c * a - 2;
  const long double s3 = a * b * c - a - c;
  // t^3 - s1 t^2 + s2 t - s3 = 0; t = u + s1/3
  const long double p = s2 - s1 * s1 / 3;
  const long double q = -2 * s1 * s1 * s1 / 27 + s1 * s2 / 3 - s3;
  const long double r = 2 * std::sqrt(-p / 3);
  const long double phi = std::acos(std::clamp(3 * q / (p * r), -1.0L, 1.0L)) / 3;
  std::vector<long double> out;
  for (int k = 0; k < 3; ++k) out.push_back(s1 / 3 + r * std::cos(phi - 2 * std::numbers::pi_v<long double> * k / 3));
  std::sort(out.begin(), out.end());
  return out;
}

/// max over x in [-1,1] and i of |prod_{j != i} (x - c_j) / (c_i - c_j)|, evaluated
/// as plain products: dense uniform grid, then ternary refinement of every local max.
inline double lagrange_max(const std::vector<double>& c, int grid = 20001) {
  const std::size_t n = c.size();
  auto basis = [&](std::size_t i, double x) {
    double v = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) v *= (x - c[j]) / (c[i] - c[j]);
    }
    return std::fabs(v);
  };
  double best = 0.0;
  const double h = 2.0 / (grid - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> f(grid);
    for (int g = 0; g < grid; ++g) f[g] = basis(i, -1.0 + g * h);
    for (int g = 0; g < grid; ++g) {
      const bool left_ok = g == 0 || f[g] >= f[g - 1];
      const bool right_ok = g == grid - 1 || f[g] >= f[g + 1];
      if (!left_ok || !right_ok) continue;
      double lo = std::max(-1.0, -1.0 + (g - 1) * h), hi = std::min(1.0, -1.0 + (g + 1) * h);
      for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (basis(i, m1) < basis(i, m2)) {
          lo = m1;
        } else {
          hi = m2;
        }
      }
      best = std::max({best, f[g], basis(i, 0.5 * (lo + hi))});
    }
  }
  return best;
}

/// sum_{l != l0} ln|sin pi (x + l alpha)| + (q - 1) ln 2 by direct summation in long double.
inline long double log_sin_sum(double x, long long q, long double alpha) {
  std::vector<long double> terms;
  long double smallest = INFINITY;
  std::size_t at = 0;
  for (long long l = 0; l < q; ++l) {
    const long double s = std::fabs(std::sin(std::numbers::pi_v<long double> * (x + l * alpha)));
    if (s < smallest) {
      smallest = s;
      at = static_cast<std::size_t>(l);
    }
    terms.push_back(std::log(s));
  }
  long double sum = (q - 1) * std::log(2.0L);
  for (std::size_t l = 0; l < terms.size(); ++l) {
    if (l != at) sum += terms[l];
  }
  return sum;
}

/// Continued-fraction denominators q_1, q_2, ... from digits.
inline std::vector<long long> denominators(const std::vector<long long>& digits) {
  std::vector<long long> q;
  long long prev = 0, cur = 1;  // q_{-1}, q_0
  for (long long a : digits) {
    const long long next = a * cur + prev;
    prev = cur;
    cur = next;
    q.push_back(cur);
  }
  return q;
}

}  // namespace oracle
