#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "amo/errors.hpp"
#include "amo/greens.hpp"
#include "amo/localization.hpp"
#include "oracles.hpp"

using namespace amo;

namespace {

std::shared_ptr<const FrequencyModel> golden() {
  static const auto m = std::make_shared<const FrequencyModel>(make_frequency(parse_frequency_spec("golden")));
  return m;
}

/// Dense eigenvector of [-N, N] as a site function, zero outside.
struct Eigenvector {
  Int N;
  std::vector<double> v;
  double operator()(Int n) const { return n < -N || n > N ? 0.0 : v[static_cast<std::size_t>(n + N)]; }
  double sup() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
  }
};

Eigenvector eigenvector(const OperatorParams& p, Int N, std::size_t index) {
  DiagonalizeOptions opts;
  opts.dense_vectors = true;
  const auto modes = diagonalize(p, N, opts);
  return {N, modes.at(index).vector};
}

}  // namespace

TEST_SUITE("greens") {
  TEST_CASE("one-site box") {
    const auto p = make_params(3.0, golden(), 0.1, 0.5);
    const auto e = green_entry_cramer(p, {4, 4}, 4, Endpoint::Left);
    const double d0 = oracle::potential(3.0, golden()->value(), 0.1, 4) - 0.5;
    CHECK(e.value.to_double() == doctest::Approx(1.0 / d0).epsilon(1e-12));
    const auto sing = green_entry_cramer(make_params(1.0, golden(), 0.0, 2.0), {0, 0}, 0, Endpoint::Right);
    CHECK(sing.singular);
  }

  TEST_CASE("endpoint entry G(x1, x2) = 1/P_k") {
    const auto p = make_params(2.0, golden(), 0.3, -0.2);
    const auto e = green_entry_cramer(p, {-5, 9}, 9, Endpoint::Left);
    const auto pk = pk_at(p, 15, -5);
    CHECK(e.value.log_mag == doctest::Approx(-pk.log_mag).epsilon(1e-12));
    CHECK_THROWS_AS(green_entry_cramer(p, {-5, 9}, 10, Endpoint::Left), UsageError);
  }

  TEST_CASE("Cramer vs dense inverse, k = 8") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      const double lambda = 0.5 + 5.0 * u(rng), theta = u(rng), energy = -3.0 + 6.0 * u(rng);
      const Int x1 = static_cast<Int>(rng() % 41) - 20;
      const IntervalZ box(x1, x1 + 7);
      const Int y = x1 + static_cast<Int>(rng() % 8);
      const auto p = make_params(lambda, golden(), theta, energy);
      const Eigen::MatrixXd inv =
          oracle::box(lambda, golden()->value(), theta, energy, x1, 8).inverse();
      const auto pair = green_pair_cramer(p, box, y);
      CHECK(pair.left.to_double() == doctest::Approx(inv(0, y - x1)).epsilon(1e-8));
      CHECK(pair.right.to_double() == doctest::Approx(inv(y - x1, 7)).epsilon(1e-8));
      const auto dense = green_dense(p, box);
      CHECK(dense.at(x1, y) == doctest::Approx(inv(0, y - x1)).epsilon(1e-8));
    }
  }

  TEST_CASE("green_dense") {
    // diagonally dominant 3-box: lambda v - E ~ c
    const double c = 1000.0;
    const auto p = make_params(1e-9, golden(), 0.0, -c);
    const auto g = green_dense(p, {0, 2});
    for (Int i = 0; i < 3; ++i) CHECK(g.at(i, i) == doctest::Approx(1.0 / c).epsilon(0.1));
    CHECK(std::fabs(g.at(0, 1)) == doctest::Approx(1.0 / (c * c)).epsilon(0.1));
    CHECK(std::fabs(g.at(0, 2)) < 2.0 / (c * c * c));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
      const Int k = 1 + static_cast<Int>(rng() % 120);
      const auto q = make_params(0.5 + 4.0 * u(rng), golden(), u(rng), -2.0 + 4.0 * u(rng));
      const auto d = green_dense(q, {0, k - 1});
      CHECK((d.values - d.values.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * d.values.cwiseAbs().maxCoeff());
    }
    CHECK_THROWS_AS(green_dense(p, {0, kDenseGreenCap}), UsageError);
    CHECK_THROWS_AS(green_dense(make_params(1.0, golden(), 0.0, 2.0), {0, 0}), DegenerateError);
  }

  TEST_CASE("classify_regularity") {
    const auto p = make_params(3.0, golden(), 0.2, 0.3);
    // t = 10 ln 3 is far above the growth bound: never regular
    std::mt19937_64 rng(10);
    for (int t = 0; t < 20; ++t) {
      const Int y = static_cast<Int>(rng() % 200) - 100;
      const auto v = classify_regularity(p, y, 10.0 * std::log(3.0), 50);
      CHECK_FALSE(v.regular);
      CHECK(std::min(-v.margins.first, -v.margins.second) < 0.0);
    }
    const auto cand = default_regularity_candidates(0, 70);
    REQUIRE_FALSE(cand.empty());
    for (std::size_t i = 0; i < cand.size(); ++i) {
      CHECK(cand[i].length() == 70);
      CHECK(7 * (0 - cand[i].x1) >= 70);
      CHECK(7 * (cand[i].x2 - 0) >= 70);
      if (i) CHECK(cand[i].x1 > cand[i - 1].x1);
    }
    CHECK_THROWS_AS(classify_regularity(p, 0, 0.5, 70, {}), UsageError);

    // monotone in t, same witness
    const auto v = classify_regularity(make_params(5.0, golden(), 0.0, 0.3), 0, 0.5, 70);
    REQUIRE(v.regular);
    for (double t : {0.4, 0.1, 0.0}) {
      const auto w = classify_regularity(make_params(5.0, golden(), 0.0, 0.3), 0, t, 70);
      CHECK(w.regular);
      CHECK(*w.witness == *v.witness);
    }
    // geometry violations are rejected up front
    CHECK_THROWS_AS(classify_regularity(p, 0, 0.1, 70, {IntervalZ(-2, 67)}), UsageError);
    const auto mixed = classify_regularity(p, 0, 0.0, 70, {IntervalZ(-2, 67), cand.front()});
    CHECK(mixed.candidates_rejected == 1);
    CHECK(mixed.candidates_tested == 1);
  }

  TEST_CASE("resolvent_step") {
    const auto p = make_params(2.0, golden(), 0.0, 0.0);
    // zero boundary data
    CHECK(resolvent_step(make_params(2.0, golden(), 0.0, 0.4), {-3, 3}, 0, 0.0, 0.0) == 0.0);
    // one-site box: the eigenvalue equation rearranged
    const double d0 = oracle::potential(2.0, golden()->value(), 0.0, 5) - 0.4;
    CHECK(resolvent_step(make_params(2.0, golden(), 0.0, 0.4), {5, 5}, 5, 1.5, -0.5) ==
          doctest::Approx(-(1.5 - 0.5) / d0));

    const Int N = 60;
    const auto modes = diagonalize(p, N);
    const std::size_t idx = 47;
    const auto phi = eigenvector(p, N, idx);
    auto q = make_params(2.0, golden(), 0.0, modes[idx].energy);
    // valid sub-box: dist(E, spec H_I) >= 1e-5, i.e. ||G_I|| <= 1e5; closer boxes
    // lose ~1e-16 / dist to cancellation and are skipped
    double worst = 0.0;
    std::size_t valid = 0;
    for (Int x1 = -N + 1; x1 <= N - 1; x1 += 3) {
      for (Int x2 = x1; x2 <= std::min(N - 1, x1 + 20); x2 += 4) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(box_matrix(q, {x1, x2}), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().cwiseAbs().minCoeff() < 1e-5) continue;
        ++valid;
        for (Int y = x1; y <= x2; ++y) {
          const double r = resolvent_step(q, {x1, x2}, y, phi(x1 - 1), phi(x2 + 1));
          worst = std::max(worst, std::fabs(r - phi(y)));
        }
      }
    }
    CHECK(valid > 100);
    CHECK(worst <= 1e-8 * phi.sup());
  }

  TEST_CASE("block_expansion") {
    const Int N = 150;
    const auto p = make_params(2.0, golden(), 0.0, 0.0);
    const auto modes = diagonalize(p, N);
    const std::size_t idx = 140;
    const auto phi = eigenvector(p, N, idx);
    const auto q = make_params(2.0, golden(), 0.0, modes[idx].energy);
    auto factory = [](Int half) {
      return [half](Int y) { return IntervalZ(y - half, y + half); };
    };
    BlockExpansionOptions one;
    one.expand_range = IntervalZ(-100, 100);
    one.depth_cap = 1;
    const auto r1 = block_expansion(q, 10, phi, factory(6), one);
    CHECK(r1.value == doctest::Approx(resolvent_step(q, {4, 16}, 10, phi(3), phi(17))).epsilon(1e-14));
    CHECK(r1.terms == 2);

    for (std::size_t depth : {3, 6, 10}) {
      BlockExpansionOptions o;
      o.expand_range = IntervalZ(-100, 100);
      o.depth_cap = depth;
      double prev = NAN;
      for (Int half : {4, 7}) {
        const auto r = block_expansion(q, 5, phi, factory(half), o);
        CAPTURE(depth);
        CAPTURE(half);
        CHECK(std::fabs(r.value - phi(5)) <= 1e-6 * phi.sup());
        CHECK(r.terms <= (std::size_t{1} << depth));
        if (!std::isnan(prev)) CHECK(std::fabs(r.value - prev) <= 1e-6 * phi.sup());
        prev = r.value;
      }
    }
    // factory violating the 1/7 distance rule
    BlockExpansionOptions o;
    o.expand_range = IntervalZ(-100, 100);
    o.depth_cap = 2;
    CHECK_THROWS_AS(block_expansion(q, 5, phi, [](Int y) { return IntervalZ(y, y + 10); }, o), DegenerateError);

    const auto opts = scale_expansion_options(40, 10.5, 8);
    CHECK(opts.expand_range == IntervalZ(12, 78));
    CHECK(opts.depth_cap == 10);
  }
}
