#include <doctest.h>

#include <cmath>
#include <random>

#include "amo/determinant.hpp"
#include "amo/errors.hpp"
#include "oracles.hpp"

using namespace amo;

namespace {

std::shared_ptr<const FrequencyModel> golden() {
  static const auto m = std::make_shared<const FrequencyModel>(make_frequency(parse_frequency_spec("golden")));
  return m;
}

std::shared_ptr<const FrequencyModel> silver() {
  static const auto m = std::make_shared<const FrequencyModel>(make_frequency(parse_frequency_spec("silver")));
  return m;
}

}  // namespace

TEST_SUITE("log_scalar") {
  TEST_CASE("construction and conversion") {
    CHECK(LogScalar::zero().is_zero());
    CHECK(LogScalar::zero().log_mag == -INFINITY);
    CHECK(LogScalar::one().to_double() == 1.0);
    const LogScalar a = LogScalar::from_double(-3.0);
    CHECK(a.sign == -1);
    CHECK(a.log_mag == doctest::Approx(std::log(3.0)));
    CHECK(LogScalar::from_double(0.0).sign == 0);
  }

  TEST_CASE("arithmetic") {
    const LogScalar a = LogScalar::from_double(6.0), b = LogScalar::from_double(-1.5);
    CHECK((a * b).to_double() == doctest::Approx(-9.0));
    CHECK((a / b).to_double() == doctest::Approx(-4.0));
    CHECK((a + b).to_double() == doctest::Approx(4.5));
    CHECK((a - b).to_double() == doctest::Approx(7.5));
    CHECK((b + LogScalar::zero()).to_double() == doctest::Approx(-1.5));
    CHECK((a * LogScalar::zero()).is_zero());
    CHECK_FALSE((a + b).cancellation);
  }

  TEST_CASE("values far outside double range") {
    const LogScalar big(1, 5000.0), small(1, -5000.0);
    CHECK((big * small).log_mag == doctest::Approx(0.0));
    CHECK((big + big).log_mag == doctest::Approx(5000.0 + std::log(2.0)));
    CHECK((big + small).log_mag == doctest::Approx(5000.0));
  }

  TEST_CASE("cancellation flag") {
    const LogScalar a = LogScalar::from_double(1.0);
    const LogScalar b = LogScalar::from_double(-(1.0 - 1e-14));
    const LogScalar c = a + b;
    CHECK(c.cancellation);
    const LogScalar exact = a - a;
    CHECK(exact.is_zero());
    CHECK(log_add_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
    CHECK(log_add_exp(-INFINITY, 2.0) == 2.0);
  }
}

TEST_SUITE("determinant") {
  TEST_CASE("pk_eval small examples") {
    const auto p1 = pk_eval(make_params(2.0, golden(), 0.0, 1.0), 1);
    CHECK(p1.sign == 1);
    CHECK(p1.log_mag == doctest::Approx(std::log(3.0)));
    for (double lambda : {0.5, 3.0, 17.0}) {
      const auto z = pk_eval(make_params(lambda, golden(), 0.25, 0.0), 1);
      CHECK(z.sign == 0);
    }
    const auto p0 = pk_eval(make_params(3.0, golden(), 0.4, 0.7), 0);
    CHECK(p0.sign == 1);
    CHECK(p0.log_mag == 0.0);
  }

  TEST_CASE("pk_eval matches the dense determinant, k = 30") {
    const auto params = make_params(3.0, golden(), 0.123, 0.5);
    const auto lu = oracle::log_det(oracle::box(3.0, golden()->value(), 0.123, 0.5, 0, 30));
    const auto pk = pk_eval(params, 30);
    CHECK(pk.sign == lu.sign);
    CHECK(std::fabs(pk.log_mag - lu.log_abs) <= 1e-9 * std::fabs(lu.log_abs));
  }

  TEST_CASE("pk_eval oracle equivalence over 100 random draws, k <= 200") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
      const auto model = t % 2 ? golden() : silver();
      const double lambda = 0.5 + 6.0 * u(rng), theta = u(rng), energy = -4.0 + 8.0 * u(rng);
      const std::size_t k = 1 + rng() % 200;
      const auto params = make_params(lambda, model, theta, energy);
      const auto d = pk_eval_detail(params, k);
      const auto lu = oracle::log_det(oracle::box(lambda, model->value(), theta, energy, 0, static_cast<int>(k)));
      CAPTURE(k);
      CHECK(std::fabs(d.value.log_mag - lu.log_abs) <= 1e-6);
      const bool reliable = !d.value.cancellation && d.value.log_mag - d.log_running_scale > std::log(1e-8);
      if (reliable) CHECK(d.value.sign == lu.sign);
    }
  }

  TEST_CASE("theta_offset shifts the base phase") {
    const auto params = make_params(2.5, golden(), 0.1, 0.2);
    const auto shifted = make_params(2.5, golden(), 0.35, 0.2);
    CHECK(pk_eval(params, 40, 0.25).log_mag == doctest::Approx(pk_eval(shifted, 40).log_mag).epsilon(1e-12));
    // integer site shift: P_k(theta + x1 alpha) == pk_at(first_site = x1)
    const auto at = pk_at(params, 25, 7);
    const auto lu = oracle::log_det(oracle::box(2.5, golden()->value(), 0.1, 0.2, 7, 25));
    CHECK(at.log_mag == doctest::Approx(lu.log_abs).epsilon(1e-10));
  }

  TEST_CASE("renormalized recurrence is exact in rational arithmetic") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 30; ++t) {
      const std::size_t k = 1 + rng() % 20;
      std::vector<oracle::Rational> d;
      for (std::size_t j = 0; j < k; ++j) {
        d.emplace_back(static_cast<long long>(rng() % 41) - 20, 1 + static_cast<long long>(rng() % 7));
      }
      const auto st = run_recurrence<oracle::Rational>(k, [&](std::size_t j) { return d[j]; }, true);
      oracle::Rational product = st.value;
      for (const auto& m : st.divisors) product *= m;
      CHECK(product == oracle::exact_det(d));
    }
  }

  TEST_CASE("Extended path agrees with double path") {
    const auto params = make_params(4.0, golden(), 0.3, 1.1);
    for (std::size_t k : {5, 50, 150}) {
      const auto a = pk_at(params, k, -3);
      const auto b = pk_at_extended(params, Extended(1.1), k, -3);
      CHECK(a.sign == b.sign);
      CHECK(a.log_mag == doctest::Approx(b.log_mag).epsilon(1e-10));
    }
  }

  TEST_CASE("qk_eval") {
    const auto p = make_params(1.0, golden(), 0.0, 2.0);
    const auto q1 = qk_eval(p, 1, 0.0);
    CHECK(q1.sign == -1);
    CHECK(q1.log_mag == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(qk_eval(p, 1, 1.5), UsageError);
    CHECK_THROWS_AS(qk_eval(p, 0, 0.5), UsageError);

    // round trip: Q_12(cos 2 pi 0.3) equals P_12 at the back-solved phase
    const auto params = make_params(2.7, silver(), 0.0, -0.4);
    const double alpha = silver()->value();
    const double x = std::cos(2.0 * std::numbers::pi * 0.3);
    double star = 0.3 - 11.0 * alpha / 2.0;
    star -= std::floor(star);
    const auto direct = oracle::log_det(oracle::box(2.7, alpha, star, -0.4, 0, 12));
    const auto q = qk_eval(params, 12, x);
    CHECK(q.sign == direct.sign);
    CHECK(q.log_mag == doctest::Approx(direct.log_abs).epsilon(1e-9));
  }

  TEST_CASE("evenness in theta + (k-1) alpha / 2") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
      const std::size_t k = 1 + rng() % 100;
      const double theta = u(rng);
      const auto model = t % 2 ? golden() : silver();
      double mirrored = -theta - static_cast<double>(k - 1) * model->value();
      mirrored -= std::floor(mirrored);
      const auto a = pk_eval(make_params(3.0, model, theta, 0.6), k);
      const auto b = pk_eval(make_params(3.0, model, mirrored, 0.6), k);
      CHECK(std::fabs(a.log_mag - b.log_mag) <= 1e-9 * std::max(1.0, std::fabs(a.log_mag)));
    }
  }

  TEST_CASE("in_A_kr") {
    // Q_1(x) = 2 lambda x - E vanishes at x = cos(pi/2)
    const auto zero = in_A_kr(make_params(3.0, golden(), 0.0, 0.0), 1, 0.1, 0.25);
    CHECK(zero.member);
    CHECK(zero.margin == INFINITY);
    CHECK_THROWS_AS(in_A_kr(make_params(3.0, golden(), 0.0, 0.0), 1, 0.0, 0.25), UsageError);

    const auto params = make_params(5.0, golden(), 0.0, 0.3);
    const std::size_t k = 60;
    for (int g = 0; g < 1000; ++g) {
      CHECK(in_A_kr(params, k, std::log(5.0) + 1.0, g / 1000.0).member);
    }
    // grid maximizer of |Q_50| at lambda = 5 is outside A_{50, 0.1}
    double best = -INFINITY, best_theta = 0.0;
    for (int g = 0; g < 1000; ++g) {
      const auto m = in_A_kr(params, 50, 0.1, g / 1000.0);
      if (m.log_abs_q > best) {
        best = m.log_abs_q;
        best_theta = g / 1000.0;
      }
    }
    const auto worst = in_A_kr(params, 50, 0.1, best_theta);
    CHECK_FALSE(worst.member);
    CHECK(worst.margin == doctest::Approx(5.1 - best));
  }

  TEST_CASE("sup_growth_profile") {
    for (double lambda : {2.0, 5.0}) {
      const auto prof = sup_growth_profile(make_params(lambda, golden(), 0.0, 0.0), {50, 100, 200, 400});
      for (const auto& g : prof) {
        CAPTURE(g.k);
        CHECK(g.sup_rate <= std::log(lambda) + 0.1);
        CHECK_FALSE(g.exceeds);
        CHECK(g.grid_points >= 4 * g.k);
      }
      for (std::size_t i = 2; i < prof.size(); ++i) CHECK(prof[i].sup_rate <= prof[i - 1].sup_rate + 0.05);
    }
    // k = 1: sup |2 lambda cos 2 pi theta - E| = 2 lambda + |E|, attained on the grid
    const auto one = sup_growth_profile(make_params(3.0, golden(), 0.0, 0.7), {1}, {8, 0.1});
    CHECK(one.front().sup_rate == doctest::Approx(std::log(6.7)));
    CHECK_THROWS_AS(sup_growth_profile(make_params(3.0, golden(), 0.0, 0.0), {10}, {3, 0.1}), UsageError);
  }

  TEST_CASE("negative coupling reduction") {
    const auto a = reduce_negative_coupling(-2.0, golden(), 0.1, 0.4);
    CHECK(a.lambda == 2.0);
    CHECK(a.theta == doctest::Approx(0.6));
    const auto lu = oracle::log_det(oracle::box(-2.0, golden()->value(), 0.1, 0.4, 0, 40));
    CHECK(pk_eval(a, 40).log_mag == doctest::Approx(lu.log_abs).epsilon(1e-10));
    CHECK_THROWS_AS(make_params(-1.0, golden(), 0.1, 0.0), UsageError);
    CHECK_THROWS_AS(make_params(1.0, golden(), 1.2, 0.0), UsageError);
  }

  TEST_CASE("cos_two_pi") {
    CHECK(cos_two_pi(0.25) == 0.0);
    CHECK(cos_two_pi(0.75) == 0.0);
    CHECK(cos_two_pi(0.5) == -1.0);
    CHECK(cos_two_pi(0.0) == 1.0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 1000; ++t) {
      const double x = u(rng);
      CHECK(cos_two_pi(x) == doctest::Approx(std::cos(2.0 * std::numbers::pi * x)).epsilon(1e-13));
    }
  }
}
