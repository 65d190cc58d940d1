#include "amo/log_scalar.hpp"

#include <sstream>
#include <stdexcept>

namespace amo {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

LogScalar::LogScalar(int s, double lm, bool flagged) : sign(s), log_mag(lm), cancellation(flagged) {
  if (s == 0 || lm == kNegInf) {
    sign = 0;
    log_mag = kNegInf;
  } else if (s != 1 && s != -1) {
    throw std::invalid_argument("LogScalar: sign must be -1, 0 or +1");
  }
}

LogScalar LogScalar::from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("LogScalar::from_double: non-finite input");
  if (x == 0.0) return {};
  return {x > 0 ? 1 : -1, std::log(std::fabs(x))};
}

double LogScalar::to_double() const {
  if (sign == 0) return 0.0;
  return sign * std::exp(log_mag);
}

LogScalar LogScalar::operator-() const {
  LogScalar r = *this;
  r.sign = -sign;
  return r;
}

LogScalar& LogScalar::operator*=(const LogScalar& o) {
  const bool flag = cancellation || o.cancellation;
  if (sign == 0 || o.sign == 0) {
    *this = LogScalar{};
  } else {
    sign *= o.sign;
    log_mag += o.log_mag;
  }
  cancellation = flag;
  return *this;
}

LogScalar& LogScalar::operator/=(const LogScalar& o) {
  if (o.sign == 0) throw std::domain_error("LogScalar: division by zero");
  const bool flag = cancellation || o.cancellation;
  if (sign != 0) {
    sign *= o.sign;
    log_mag -= o.log_mag;
  }
  cancellation = flag;
  return *this;
}

LogScalar& LogScalar::operator+=(const LogScalar& o) {
  const bool flag = cancellation || o.cancellation;
  if (o.sign == 0) {
    cancellation = flag;
    return *this;
  }
  if (sign == 0) {
    *this = o;
    cancellation = flag;
    return *this;
  }
  // rescale by the larger operand
  const bool this_big = log_mag >= o.log_mag;
  const LogScalar& big = this_big ? *this : o;
  const LogScalar& small = this_big ? o : *this;
  const double ratio = std::exp(small.log_mag - big.log_mag);  // in (0, 1]
  const double mixed = 1.0 + (big.sign == small.sign ? ratio : -ratio);
  LogScalar r;
  if (mixed == 0.0) {
    r = LogScalar{};
    r.cancellation = true;
  } else {
    r = LogScalar{big.sign * (mixed > 0 ? 1 : -1), big.log_mag + std::log(std::fabs(mixed))};
    r.cancellation = flag || std::fabs(mixed) < kCancellationThreshold;
  }
  *this = r;
  return *this;
}

std::string LogScalar::str() const {
  std::ostringstream os;
  os.precision(17);
  if (sign == 0) {
    os << "0";
  } else {
    os << (sign > 0 ? "+" : "-") << "exp(" << log_mag << ")";
  }
  return os.str();
}

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace amo
