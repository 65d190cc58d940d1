#include <doctest.h>

#include <cmath>

#include "amo/cf_engine.hpp"
#include "amo/errors.hpp"
#include "oracles.hpp"

using namespace amo;

namespace {

std::vector<Int> qs(const FrequencyModel& m) {
  std::vector<Int> out;
  for (std::size_t n = 1; n <= m.depth(); ++n) out.push_back(m.q(n));
  return out;
}

FrequencyModel high_beta(const char* spec) {
  FrequencyOptions opts;
  opts.q_cap = 1'000'000'000'000'000'000LL;
  return make_frequency(parse_frequency_spec(spec), 0, opts);
}

std::vector<FrequencyModel> fixtures() {
  return {make_frequency(parse_frequency_spec("golden")), make_frequency(parse_frequency_spec("silver")),
          high_beta("cf-rule:exp(beta=0.3,seed=[1,2,5])"), high_beta("cf-rule:exp(beta=0.25,seed=[2,1,3])")};
}

}  // namespace

TEST_SUITE("cf_engine") {
  TEST_CASE("build_frequency examples") {
    CHECK(qs(build_frequency(std::vector<Int>(6, 1), 6)) == std::vector<Int>{1, 2, 3, 5, 8, 13});
    CHECK(qs(build_frequency(std::vector<Int>(4, 2), 4)) == std::vector<Int>{2, 5, 12, 29});
    CHECK(qs(build_frequency({1, 1, 1, 1, 1, 20}, 6)) == std::vector<Int>{1, 2, 3, 5, 8, 165});
    const std::vector<long long> digits{3, 7, 15, 1, 292, 1, 1};
    const auto expected = oracle::denominators(digits);
    CHECK(qs(build_frequency(std::vector<Int>(digits.begin(), digits.end()), digits.size())) ==
          std::vector<Int>(expected.begin(), expected.end()));
  }

  TEST_CASE("build_frequency errors") {
    CHECK_THROWS_AS(build_frequency({}, 0), UsageError);
    CHECK_THROWS_AS(build_frequency({1, 0, 2}, 3), UsageError);
    CHECK_THROWS_AS(build_frequency({1, -2}, 2), UsageError);
    CHECK_THROWS_AS(build_frequency({1, 1}, 3), UsageError);
    CHECK_THROWS_AS(parse_frequency_spec("cf:[]"), UsageError);
    CHECK_THROWS_AS(parse_frequency_spec("cf:[1,x]"), UsageError);
    CHECK_THROWS_AS(parse_frequency_spec("cf-rule:exp(beta=-1,seed=[1])"), UsageError);
    CHECK_THROWS_AS(parse_frequency_spec("bronze"), UsageError);
  }

  TEST_CASE("value accuracy better than 1/q_nmax^2") {
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    const double silver = std::sqrt(2.0) - 1.0;
    FrequencyOptions opts;
    opts.q_cap = 1'000'000'000'000LL;
    for (std::size_t n : {6, 10, 20}) {
      const auto g = build_frequency(std::vector<Int>(n, 1), n, opts);
      CHECK(std::fabs(g.value() - golden) < 1.0 / std::pow(static_cast<double>(g.q(n)), 2));
      const auto s = build_frequency(std::vector<Int>(n, 2), n, opts);
      CHECK(std::fabs(s.value() - silver) < 1.0 / std::pow(static_cast<double>(s.q(n)), 2));
    }
  }

  TEST_CASE("cap truncation is reported") {
    FrequencyOptions opts;
    opts.q_cap = 100;
    const auto m = build_frequency(std::vector<Int>(30, 1), 0, opts);
    CHECK(m.truncated());
    CHECK_FALSE(m.truncation_note().empty());
    CHECK(m.q(m.depth()) <= 100);
  }

  TEST_CASE("beta_estimate") {
    const auto g = build_frequency(std::vector<Int>(21, 1), 21);
    const BetaEstimate b = beta_estimate(g);
    CHECK(b.tail_sup < 0.35);
    for (std::size_t i = 1; i < b.sequence.size(); ++i) CHECK(b.sequence[i] < b.sequence[i - 1]);
    for (std::size_t i = 0; i < b.sequence.size(); ++i) {
      const std::size_t n = i + 1;
      CHECK(b.sequence[i] == doctest::Approx(std::log(static_cast<double>(g.q(n + 1))) / g.q(n)).epsilon(1e-15));
    }

    CHECK(beta_estimate(build_frequency({1, 1}, 2)).sequence.size() == 1);
    CHECK_THROWS_AS(beta_estimate(build_frequency({1}, 1)), UsageError);

    // a_{n+1} = round(e^{0.5 q_n} / q_n) for n >= 3, digits built here
    std::vector<long long> digits{1, 1, 1};
    for (;;) {
      const auto q = oracle::denominators(digits);
      const double next = std::round(std::exp(0.5 * static_cast<double>(q.back())) / static_cast<double>(q.back()));
      if (next * static_cast<double>(q.back()) > 1e17) break;
      digits.push_back(static_cast<long long>(std::max(1.0, next)));
    }
    const auto q = oracle::denominators(digits);
    double direct_sup = 0.0;
    for (std::size_t i = q.size() / 2; i + 1 < q.size(); ++i) {
      direct_sup = std::max(direct_sup, std::log(static_cast<double>(q[i + 1])) / static_cast<double>(q[i]));
    }
    FrequencyOptions opts;
    opts.q_cap = 1'000'000'000'000'000'000LL;
    const auto m = build_frequency(std::vector<Int>(digits.begin(), digits.end()), digits.size(), opts);
    const double tail = beta_estimate(m).tail_sup;
    CHECK(std::fabs(tail - 0.5) < 0.05);
    CHECK(std::fabs(direct_sup - 0.5) < 0.05);
    CHECK(exp_schedule_digits(0.5, {1, 1, 1}, opts) == std::vector<Int>(digits.begin(), digits.end()));
  }

  TEST_CASE("bounded digits: beta terms below 0.05 once q_n > 1000") {
    for (const char* spec : {"golden", "silver", "cf:[1,2,3,1,2,3,1,2,3,1,2,3,1,2,3,1,2,3,1,2,3]"}) {
      const auto m = make_frequency(parse_frequency_spec(spec));
      const auto& seq = m.beta_sequence();
      for (std::size_t i = 0; i < seq.size(); ++i) {
        if (m.q(i + 1) > 1000) CHECK(seq[i] < 0.05);
      }
    }
  }

  TEST_CASE("dist_to_integers") {
    CHECK(dist_to_integers(0.5) == 0.5);
    CHECK(dist_to_integers(1.25) == 0.25);
    CHECK(dist_to_integers(-0.3) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(dist_to_integers(7.0) == 0.0);
    CHECK_THROWS_AS(dist_to_integers(NAN), UsageError);
    CHECK_THROWS_AS(dist_to_integers(INFINITY), UsageError);
  }

  TEST_CASE("verify_best_denominators examples") {
    const auto g = build_frequency(std::vector<Int>(10, 1), 10);
    const auto s = build_frequency(std::vector<Int>(10, 2), 10);
    // q_6 = 13 for golden, q_4 = 29 for silver
    REQUIRE(g.q(6) == 13);
    const auto rg = verify_best_denominators(g, 5);
    CHECK(rg.holds);
    CHECK(rg.worst_k == 8);
    REQUIRE(s.q(4) == 29);
    const auto rs = verify_best_denominators(s, 3);
    CHECK(rs.holds);
    CHECK(rs.worst_k == 12);
    const auto r0 = verify_best_denominators(g, 0);
    CHECK(r0.holds);
    CHECK_THROWS_AS(verify_best_denominators(g, 5, 10), UsageError);
  }

  TEST_CASE("Diophantine invariants on the four fixtures") {
    for (const auto& m : fixtures()) {
      CAPTURE(m.digits().size());
      for (std::size_t n = 0; n < m.deltas().size(); ++n) {
        if (m.q(n) == m.q(n + 1)) continue;  // a_1 = 1: ||alpha|| is 1 - alpha, not |q_0 alpha - p_0|
        // 1/(2 q_{n+1}) <= Delta_n <= 1/q_{n+1}, exactly in integers over Q
        const Wide num = m.delta_numerator(n);
        const Wide big_q = m.precision_q();
        const Wide q1 = m.q(n + 1);
        CHECK(big_q <= 2 * num * q1);
        CHECK(num * q1 <= big_q);
      }
      for (std::size_t n = 0; n < m.depth(); ++n) {
        const Wide d = static_cast<Wide>(m.p(n)) * m.q(n + 1) - static_cast<Wide>(m.p(n + 1)) * m.q(n);
        CHECK(d == (n % 2 == 0 ? -1 : 1));
        if (m.q(n + 1) <= 100'000) CHECK(verify_best_denominators(m, n).holds);
      }
    }
  }

  TEST_CASE("resonance_scale") {
    const auto m = build_frequency({1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1}, 15);
    REQUIRE(m.q(15) == 987);
    CHECK(resonance_scale(m, 1) == 1.0);
    CHECK(resonance_scale(m, 15) == doctest::Approx(std::pow(987.0, 8.0 / 9.0)).epsilon(1e-14));
    CHECK(resonance_scale(m, 15) == doctest::Approx(458.79).epsilon(1e-4));
    CHECK_THROWS_AS(resonance_scale(m, 16), UsageError);
    // 512^{8/9} = 256 exactly: b_n < q_n / 2 first holds past 512
    CHECK(within_resonance_scale(256, 512));
    CHECK_FALSE(within_resonance_scale(257, 512));
    CHECK(within_resonance_scale(0, 1));
    CHECK_FALSE(within_resonance_scale(2, 1));
    for (Int q : {2, 100, 987, 12345}) {
      const double b = std::pow(static_cast<double>(q), 8.0 / 9.0);
      const Int d = static_cast<Int>(std::floor(b));
      CHECK(within_resonance_scale(d, q));
      CHECK_FALSE(within_resonance_scale(d + 1, q));
    }
  }

  TEST_CASE("make_resonant_phase") {
    const auto g = make_frequency(parse_frequency_spec("golden"));
    CHECK(make_resonant_phase(g, 0, 0).theta == 0.0);
    CHECK(make_resonant_phase(g, 0, 1).theta == 0.5);
    const double alpha = (std::sqrt(5.0) - 1.0) / 2.0;
    const ResonantPhase r = make_resonant_phase(g, -1, 0);
    CHECK(r.theta == doctest::Approx((1.0 - alpha) / 2.0).epsilon(1e-12));
    CHECK(r.theta == doctest::Approx(0.19098).epsilon(1e-5));
    CHECK(dist_to_integers(2.0 * r.theta + alpha) < 1e-12);
    CHECK_THROWS_AS(make_resonant_phase(g, 1, 0), UsageError);

    std::mt19937_64 rng(7);
    for (const auto& m : fixtures()) {
      for (int t = 0; t < 50; ++t) {
        const Int p = -static_cast<Int>(rng() % 1000);
        const Int j = static_cast<Int>(rng() % 21) - 10;
        const ResonantPhase ph = make_resonant_phase(m, p, j);
        CHECK(ph.theta >= 0.0);
        CHECK(ph.theta < 1.0);
        CHECK(dist_to_integers(2.0 * ph.theta - m.frac_multiple(p)) < 1e-12);
      }
    }
  }

  TEST_CASE("exact fractional parts") {
    const auto g = make_frequency(parse_frequency_spec("golden"));
    for (std::size_t n = 1; n + 1 < g.depth(); ++n) {
      CHECK(g.dist_multiple(g.q(n)) == doctest::Approx(g.delta(n)).epsilon(1e-15));
    }
    CHECK(g.frac_multiple(0) == 0.0);
    CHECK(g.frac_multiple(-1) == doctest::Approx(1.0 - g.value()).epsilon(1e-15));
  }
}
