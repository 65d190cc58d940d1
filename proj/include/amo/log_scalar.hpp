#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace amo {

/// Signed scalar stored as (sign, ln|value|).
///
/// Carries determinants and Green's-function entries whose magnitudes run
/// far outside the double range (e^{k ln lambda} for k in the thousands).
/// sign is -1, 0 or +1; sign == 0 iff log_mag == -inf.
struct LogScalar {
  int sign = 0;
  double log_mag = -std::numeric_limits<double>::infinity();
  /// Set by sums whose result is below kCancellationThreshold relative to the
  /// larger operand, and by recurrences that ended in cancellation.
  bool cancellation = false;

  static constexpr double kCancellationThreshold = 1e-12;

  LogScalar() = default;
  LogScalar(int s, double lm, bool flagged = false);

  static LogScalar zero() { return {}; }
  static LogScalar one() { return {1, 0.0}; }
  static LogScalar from_double(double x);

  bool is_zero() const { return sign == 0; }
  double to_double() const;
  /// log_mag, or -inf for zero.
  double log_abs() const { return log_mag; }

  LogScalar operator-() const;
  LogScalar& operator*=(const LogScalar& o);
  LogScalar& operator/=(const LogScalar& o);
  LogScalar& operator+=(const LogScalar& o);
  LogScalar& operator-=(const LogScalar& o) { return *this += -o; }

  std::string str() const;
};

inline LogScalar operator*(LogScalar a, const LogScalar& b) { return a *= b; }
inline LogScalar operator/(LogScalar a, const LogScalar& b) { return a /= b; }
inline LogScalar operator+(LogScalar a, const LogScalar& b) { return a += b; }
inline LogScalar operator-(LogScalar a, const LogScalar& b) { return a -= b; }

/// ln(e^a + e^b) without overflow.
double log_add_exp(double a, double b);

}  // namespace amo
