#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ecuas/costs.hpp"
#include "ecuas/quadrature.hpp"
#include "test_support.hpp"

namespace ecuas {
namespace {

using testing::uniform;

Tabulated triangle(double center, double half_width) {
  return Tabulated({center - half_width, center, center + half_width}, {0.0, 1.0 / half_width, 0.0});
}

TEST(Quadrature, BinaryWrongExample) {
  EXPECT_NEAR(c_w_numeric(1, 0, 0.25, PowerLaw(1.0), CostMatrix::zero_one(2)), 2.25, 1e-8);
}

TEST(Quadrature, ZeroWeightIntegratesToZero) {
  const Tabulated zero({0.0, 0.5}, {0.0, 0.0});
  EXPECT_EQ(c_w_numeric(1, 0, 0.25, zero, CostMatrix::zero_one(2)), 0.0);
  EXPECT_EQ(c_w_numeric(0, 0, 0.25, zero, CostMatrix::zero_one(2)), 0.0);
}

TEST(Quadrature, DiracReproducesFixedThreshold) {
  const auto c = CostMatrix::zero_one(3);
  for (double u : {0.0, 0.1, 0.3, 0.5, 0.6}) {
    for (double g : {0.05, 0.3, 0.55}) {
      for (std::size_t y : {0u, 1u}) {
        EXPECT_EQ(c_w_numeric(y, 0, u, DiracAt(g), c), c_gamma_star(y, 0, u, g, c));
      }
    }
  }
}

TEST(Quadrature, NarrowBumpConvergesToFixedThreshold) {
  const auto c = CostMatrix::zero_one(2);
  const double u = 0.25;
  const double g0 = 0.26;
  for (std::size_t y : {0u, 1u}) {
    const double target = c_gamma_star(y, 0, u, g0, c);
    double prev_err = std::numeric_limits<double>::infinity();
    for (double h : {1e-2, 1e-3, 1e-4}) {
      const double err = std::abs(c_w_numeric(y, 0, u, triangle(g0, h), c) - target);
      EXPECT_LE(err, prev_err + 1e-12) << "width " << h;
      prev_err = err;
    }
    EXPECT_LT(prev_err, 1e-9);
  }
  // A bump straddling u mixes both sides.
  const double straddle = c_w_numeric(1, 0, u, triangle(u, 1e-2), c);
  EXPECT_GT(straddle, u);
  EXPECT_LT(straddle, 1.0);
}

TEST(Quadrature, TabulatedMassIsPreserved) {
  // C*_gamma is the candidate cost for every gamma >= u, so with u = 0
  // the integral is C~ times the total mass.
  const Tabulated w({0.0, 0.2, 0.5}, {1.0, 3.0, 0.0});
  const double mass = 0.5 * 0.2 * (1.0 + 3.0) + 0.5 * 0.3 * 3.0;
  EXPECT_NEAR(c_w_numeric(1, 0, 0.0, w, CostMatrix::zero_one(2)), mass, 1e-12);
}

TEST(Quadrature, MatchesClosedFormOnRandomInstances) {
  std::mt19937_64 rng(77);
  const std::vector<CostMatrix> costs{CostMatrix::zero_one(2), CostMatrix::zero_one(5),
                                      CostMatrix::generalized_zero_one(3), testing::custom_asymmetric(),
                                      testing::custom_hedge()};
  const std::vector<double> ns{0.0, 0.25, 0.5, 1.0, 2.0, 3.7, 16.0, 128.0};
  for (int trial = 0; trial < 2000; ++trial) {
    const auto& c = costs[trial % costs.size()];
    const double n = ns[(trial / costs.size()) % ns.size()];
    const auto q = testing::random_simplex(rng, c.classes());
    const auto b = bayes_candidate(q, c);
    if (n == 0.0 && b.uncertainty < 1e-6) continue;  // log branch floors u
    const std::size_t y = static_cast<std::size_t>(uniform(rng, 0.0, static_cast<double>(c.classes())));
    const double closed = c_n_star(y, b.candidate, b.uncertainty, n, c);
    const double numeric = c_w_numeric(y, b.candidate, b.uncertainty, PowerLaw(n), c);
    EXPECT_NEAR(closed, numeric, 1e-8) << "trial " << trial << " n=" << n << " u=" << b.uncertainty;
  }
}

TEST(Quadrature, HalvingSubdivisionsStaysWithinTolerance) {
  std::mt19937_64 rng(4);
  const auto c = CostMatrix::zero_one(4);
  QuadratureConfig fine;
  QuadratureConfig coarse;
  coarse.subdivisions = fine.subdivisions / 2;
  for (int trial = 0; trial < 300; ++trial) {
    const double u = uniform(rng, 1e-3, c.u_max());
    const double n = uniform(rng, 0.0, 64.0);
    for (std::size_t y : {0u, 1u}) {
      const double a = c_w_numeric(y, 0, u, PowerLaw(n), c, fine);
      const double b = c_w_numeric(y, 0, u, PowerLaw(n), c, coarse);
      EXPECT_LT(std::abs(a - b), fine.tolerance) << "u=" << u << " n=" << n;
    }
    const Tabulated w({0.0, 0.3, 0.75}, {0.5, 2.0, 1.0});
    EXPECT_LT(std::abs(c_w_numeric(1, 0, u, w, c, fine) - c_w_numeric(1, 0, u, w, c, coarse)), fine.tolerance);
  }
}

TEST(Quadrature, RejectsOutOfRangeUncertainty) {
  const auto c = CostMatrix::zero_one(2);
  EXPECT_THROW(c_w_numeric(1, 0, 0.6, PowerLaw(1.0), c), ValidationError);
  EXPECT_THROW(c_w_numeric(1, 0, -0.1, PowerLaw(1.0), c), ValidationError);
  QuadratureConfig bad;
  bad.subdivisions = 1;
  EXPECT_THROW(c_w_numeric(1, 0, 0.2, PowerLaw(1.0), c, bad), ValidationError);
}

TEST(UMaxGrid, Examples) {
  EXPECT_NEAR(u_max_grid(CostMatrix::zero_one(2), 1e-6), 0.5, 1e-6);
  EXPECT_NEAR(u_max_grid(CostMatrix::zero_one(3), 1e-4), 2.0 / 3.0, 1e-4);
  const auto c = CostMatrix::custom({{0.0, 3.0}, {2.0, 0.0}});
  EXPECT_NEAR(u_max_grid(c, 1e-6), u_max(c), 1e-6 * 3.0);
  EXPECT_THROW(u_max_grid(CostMatrix::zero_one(5), 0.1), ValidationError);
}

}  // namespace
}  // namespace ecuas
