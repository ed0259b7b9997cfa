#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "depdag/gauss.hpp"
#include "depdag/rng.hpp"

using namespace depdag;

namespace {

// Reference values computed with 30-digit arithmetic (mpmath), frozen.
struct CdfRef {
  double x, phi;
};
constexpr CdfRef kCdfRefs[] = {
    {-8.0, 6.2209605742717841235e-16}, {-5.0, 2.8665157187919391167e-7},
    {-3.0, 0.0013498980316300945267},  {-1.96, 0.024997895148220436213},
    {-1.0, 0.15865525393145705141},    {-0.5, 0.30853753872598689636},
    {0.0, 0.5},                        {0.3, 0.61791142218895263307},
    {1.0, 0.84134474606854294859},     {1.96, 0.97500210485177956379},
    {2.5, 0.99379033467422386483},     {5.0, 0.99999971334842812081},
    {8.0, 0.9999999999999993779}};

struct BvnRef {
  double a, b, rho, p;
};
// P(U <= a, V <= b); mpmath tanh-sinh quadrature of the conditional form.
constexpr BvnRef kBvnRefs[] = {
    {0.3, -1.2, 0.6, 0.10842550424680714},
    {1.5, 0.5, -0.8, 0.62470430322025494},
    {-0.5, -0.5, 0.999, 0.30225586368507144},
    {2.0, 2.0, 0.925, 0.96906560669022179},
    {-1.0, 2.0, 0.3, 0.15781093748898375},
    {0.0, 0.0, 0.5, 1.0 / 3.0},
    {1.0, 1.0, 0.95, 0.81081951296919618},
    {-2.0, -2.0, -0.95, 5.6433657642270543e-39},
    {0.5, -0.5, 0.0, 0.21334212592289703},
    {3.0, -3.0, 0.7, 0.0013498980316298962},
    {-0.3, 0.7, -0.999, 0.14012492558797434}};

}  // namespace

TEST_CASE("std_normal_cdf matches high-precision references") {
  for (const auto& r : kCdfRefs) {
    REQUIRE(std::fabs(std_normal_cdf(r.x) - r.phi) <= 1e-12);
  }
  REQUIRE(std_normal_cdf(0.0) == 0.5);
  // upper tail stays accurate where 1 - cdf would round to zero
  REQUIRE(std_normal_upper(8.0) == Catch::Approx(6.2209605742717841235e-16).epsilon(1e-10));
}

TEST_CASE("std_normal_quantile inverts the CDF") {
  REQUIRE(std_normal_quantile(0.5) == 0.0);
  REQUIRE(std::fabs(std_normal_quantile(0.025) - (-1.9599639845400542118)) < 1e-12);
  REQUIRE(std::fabs(std_normal_quantile(1e-12) - (-7.0344838253011319326)) < 1e-9);
  // Identity on [-8, 8]. For x > 0 invert through the upper tail, which is
  // where the probability is representable at full relative precision; the
  // nearest double to cdf(x) near 1 is itself ~1e-8 away in x.
  for (double x = -8.0; x <= 8.0; x += 0.25) {
    const double recovered = (x <= 0.0)
                                 ? std_normal_quantile(std_normal_cdf(x))
                                 : -std_normal_quantile(std_normal_upper(x));
    REQUIRE(std::fabs(recovered - x) <= 1e-9);
    if (x > 0.0 && x <= 5.0) {
      REQUIRE(std::fabs(std_normal_quantile(std_normal_cdf(x)) - x) <= 1e-9);
    }
  }
  REQUIRE_THROWS_AS(std_normal_quantile(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(std_normal_quantile(1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(std_normal_quantile(-0.1), std::invalid_argument);
}

TEST_CASE("bvn_cdf median-orthant closed form") {
  for (double rho = -0.9; rho < 0.95; rho += 0.1) {
    const double expected = 0.25 + std::asin(rho) / kTwoPi;
    REQUIRE(std::fabs(bvn_cdf(0.0, 0.0, rho) - expected) <= 1e-7);
  }
}

TEST_CASE("bvn_cdf independence, saturation and frozen references") {
  REQUIRE(std::fabs(bvn_cdf(0.7, -1.1, 0.0) -
                    std_normal_cdf(0.7) * std_normal_cdf(-1.1)) < 1e-14);
  REQUIRE(std::fabs(bvn_cdf(8.0, 8.0, 0.3) - 1.0) <= 1e-10);
  for (const auto& r : kBvnRefs) {
    REQUIRE(std::fabs(bvn_cdf(r.a, r.b, r.rho) - r.p) <= 1e-9);
  }
  REQUIRE_THROWS_AS(bvn_cdf(0.0, 0.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(bvn_cdf(0.0, 0.0, -1.5), std::invalid_argument);
}

TEST_CASE("bvn_cdf symmetry and reflection identities") {
  const double as[] = {-1.5, -0.3, 0.0, 0.8, 2.2};
  const double rhos[] = {-0.95, -0.5, 0.0, 0.4, 0.9};
  for (double a : as) {
    for (double b : as) {
      for (double rho : rhos) {
        REQUIRE(bvn_cdf(a, b, rho) == Catch::Approx(bvn_cdf(b, a, rho)).margin(1e-12));
        const double lhs = bvn_cdf(-a, -b, rho);
        const double rhs =
            1.0 - std_normal_cdf(a) - std_normal_cdf(b) + bvn_cdf(a, b, rho);
        REQUIRE(std::fabs(lhs - rhs) <= 1e-9);
      }
    }
  }
}

TEST_CASE("quadrant_prob values and total probability") {
  REQUIRE(std::fabs(quadrant_prob(0, 0, 0.0, 0.0, 0.0) - 0.25) < 1e-14);
  REQUIRE(std::fabs(quadrant_prob(1, 1, 0.0, 0.0, 0.5) - 1.0 / 3.0) <= 1e-7);

  const double sum_example =
      quadrant_prob(0, 0, 0.3, -1.2, 0.6) + quadrant_prob(0, 1, 0.3, -1.2, 0.6) +
      quadrant_prob(1, 0, 0.3, -1.2, 0.6) + quadrant_prob(1, 1, 0.3, -1.2, 0.6);
  REQUIRE(std::fabs(sum_example - 1.0) <= 1e-9);

  const double ts[] = {-2.0, -0.5, 0.0, 1.0, 3.0};
  for (double ta : ts) {
    for (double tb : ts) {
      for (double rho = -0.9; rho < 0.95; rho += 0.225) {
        double total = 0.0;
        for (int xa = 0; xa < 2; ++xa) {
          for (int xb = 0; xb < 2; ++xb) {
            total += quadrant_prob(xa, xb, ta, tb, rho);
          }
        }
        REQUIRE(std::fabs(total - 1.0) <= 1e-9);
      }
    }
  }
}

TEST_CASE("sample_truncated_normal near-untruncated case is plain normal") {
  Rng rng(2024);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += sample_truncated_normal(0.4, 2.0, TruncSide::greater, -1e10, rng);
  }
  REQUIRE(std::fabs(sum / n - 0.4) <= 0.02 * 2.0);
}

TEST_CASE("sample_truncated_normal half-normal moment") {
  Rng rng(7);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += sample_truncated_normal(0.0, 1.0, TruncSide::greater, 0.0, rng);
  }
  REQUIRE(std::fabs(sum / n - 0.7978845608028654) <= 0.01);

  // mirrored side
  double sum_lo = 0.0;
  for (int i = 0; i < n; ++i) {
    sum_lo += sample_truncated_normal(0.0, 1.0, TruncSide::less_eq, 0.0, rng);
  }
  REQUIRE(std::fabs(sum_lo / n + 0.7978845608028654) <= 0.01);
}

TEST_CASE("sample_truncated_normal deep tail is stable") {
  Rng rng(99);
  for (int i = 0; i < 2000; ++i) {
    const double x = sample_truncated_normal(0.0, 1.0, TruncSide::greater, 8.0, rng);
    REQUIRE(std::isfinite(x));
    REQUIRE(x >= 8.0);
  }
  for (int i = 0; i < 500; ++i) {
    const double x = sample_truncated_normal(0.0, 1.0, TruncSide::greater, 30.0, rng);
    REQUIRE(std::isfinite(x));
    REQUIRE(x >= 30.0);
  }
  REQUIRE_THROWS_AS(
      sample_truncated_normal(0.0, 0.0, TruncSide::greater, 0.0, rng),
      std::invalid_argument);
}

TEST_CASE("symmetric_eigen small closed forms") {
  const auto id = symmetric_eigen(Eigen::MatrixXd::Identity(4, 4));
  for (int i = 0; i < 4; ++i) {
    REQUIRE(id.values(i) == Catch::Approx(1.0).margin(1e-13));
  }

  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.5, 0.5, 1.0;
  const auto two = symmetric_eigen(m);
  REQUIRE(two.values(0) == Catch::Approx(1.5).margin(1e-12));
  REQUIRE(two.values(1) == Catch::Approx(0.5).margin(1e-12));

  Eigen::MatrixXd d = Eigen::Vector3d(3.0, 2.0, 1.0).asDiagonal();
  const auto diag = symmetric_eigen(d);
  REQUIRE(diag.values(0) == Catch::Approx(3.0).margin(1e-12));
  REQUIRE(diag.values(1) == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(diag.values(2) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("symmetric_eigen reconstructs random matrices") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 13));
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        a(i, j) = a(j, i) = rng.uniform(-1.0, 1.0);
      }
    }
    const auto ed = symmetric_eigen(a);
    const Eigen::MatrixXd rebuilt =
        ed.vectors * ed.values.asDiagonal() * ed.vectors.transpose();
    REQUIRE((rebuilt - a).norm() <= 1e-8 * std::max(1.0, a.norm()));
    const Eigen::MatrixXd vtv = ed.vectors.transpose() * ed.vectors;
    REQUIRE((vtv - Eigen::MatrixXd::Identity(n, n)).norm() <= 1e-10);
  }

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 0.2, -0.2, 1.0;
  REQUIRE_THROWS_AS(symmetric_eigen(bad), std::invalid_argument);
}
