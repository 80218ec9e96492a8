#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qcfb/coherent.hpp"

namespace qcfb {
namespace {

using testing::mat;

PlantModel two_port_cavity() {
  PlantModel p;
  p.f = mat({{-1}});
  p.g_w = mat({{-1}});
  p.g_u = mat({{-1}});
  p.h = mat({{1}});
  p.k = mat({{1}});
  p.cost = CostOutput{mat({{1}}), mat({{0}}), Matrix()};
  p.selector = mat({{1, 0}});
  return p;
}

TEST(Kalman, ScalarWithNonzeroGain) {
  // 2aQ + g² - (g + Qh)² = 0 with a = -1, g = h = 1 gives Q = 0.
  const KalmanResult k = kalman_design(mat({{-1}}), mat({{1}}), mat({{1}}), mat({{1}}));
  EXPECT_NEAR(k.q(0, 0).real(), 0.0, 1e-12);
  EXPECT_NEAR(k.gain(0, 0).real(), 1.0, 1e-12);
}

TEST(Kalman, CavityHasZeroGain) {
  const double r2 = std::sqrt(2.0);
  const KalmanResult k = kalman_design(mat({{-1}}), mat({{-r2}}), mat({{r2}}), mat({{1}}));
  EXPECT_NEAR(k.q(0, 0).real(), 1.0, 1e-12);
  EXPECT_LE(k.gain_norm, 1e-12);
}

TEST(Kalman, RiccatiSatisfiedOnRandomSystems) {
  testing::Gen gen(50);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = gen.integer(1, 4);
    const Index m = gen.integer(1, 3);
    const Matrix f = gen.stable(n);
    const Matrix g = gen.complex(n, m);
    const Matrix h = gen.complex(m, n);
    const Matrix l = Matrix::Identity(m, m);
    const KalmanResult k = kalman_design(f, g, h, l);
    const Matrix cross = g + k.q * h.adjoint();
    const Matrix res = f * k.q + k.q * f.adjoint() + g * g.adjoint() - cross * cross.adjoint();
    EXPECT_LT(max_abs(res), 1e-8 * (1.0 + max_abs(k.q)));
    EXPECT_LT((k.gain - cross).norm(), 1e-10 * (1.0 + cross.norm()));
    EXPECT_TRUE(is_hurwitz(f - cross * h, 0.0));
  }
}

TEST(Kalman, Failures) {
  EXPECT_THROW(kalman_design(mat({{1}}), mat({{1}}), mat({{0}}), mat({{1}})), DesignError);
  EXPECT_THROW(kalman_design(mat({{-1}}), mat({{1}}), mat({{1}}), mat({{0}})), DomainError);
  EXPECT_THROW(kalman_design(mat({{-1}}), mat({{1}}), mat({{1, 1}}), mat({{1}})), DimensionError);
}

TEST(ZeroGain, FamilyShapes) {
  const auto family = zero_gain_family(2, 1, 3);
  ASSERT_EQ(family.size(), 3u);
  for (const auto& g : family) {
    EXPECT_EQ(g.k_cy, Matrix::Zero(2, 1));
    EXPECT_LT((g.k_cw * g.k_cw.adjoint() - Matrix::Identity(2, 2)).norm(), 1e-12);
  }
  EXPECT_EQ(family[2].k_cw.cols(), 3);
}

TEST(ZeroGain, CavityExact) {
  const TheoremReport r = verify_zero_gain(two_port_cavity(), mat({{0}}), mat({{1}}));
  EXPECT_TRUE(r.holds);
  EXPECT_LE(r.evidence[0].second, 1e-12);
  EXPECT_LE(r.evidence[1].second, 1e-12);
}

TEST(ZeroGain, RandomPlants) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const PlantModel p = random_pr_plant(1 + seed % 3, 1 + seed % 2, 1 + seed % 2, seed);
    for (const auto& g : zero_gain_family(p.control_fields(), p.output_fields(), seed)) {
      const TheoremReport r = verify_zero_gain(p, g.k_cy, g.k_cw);
      EXPECT_TRUE(r.holds) << "seed " << seed << " " << g.label << ": " << r.narrative;
    }
  }
}

TEST(ZeroGain, MeasurementFeedbackBreaksIt) {
  const TheoremReport r = verify_zero_gain(two_port_cavity(), mat({{0.5}}), mat({{std::sqrt(0.75)}}));
  EXPECT_FALSE(r.holds);
  EXPECT_FALSE(r.hypothesis_ok);
}

TEST(StaticLqg, GridIsRealizable) {
  for (const auto& g : static_grid(1, 2, 0)) {
    const Matrix k = hcat_fields(SystemKind::annihilation, {g.k_cw, g.k_cy});
    EXPECT_LT((k * k.adjoint() - Matrix::Identity(1, 1)).norm(), 1e-12) << g.label;
  }
  EXPECT_EQ(static_grid(1, 1, 0).size(), 5u);
  EXPECT_EQ(static_grid(3, 3, 0).size(), 65u);
}

TEST(StaticLqg, UnstableCostThrows) {
  const ClosedLoop cl = close_loop(two_port_cavity(), ControllerModel::static_gain(
                                                          SystemKind::annihilation, mat({{1}}), mat({{-2}})));
  EXPECT_THROW(lqg_cost(cl), InstabilityError);
}

TEST(StaticLqg, CavityHolds) {
  StaticLqgOptions opts;
  opts.challengers = 5;
  const TheoremReport r = verify_static_lqg(two_port_cavity(), opts);
  EXPECT_TRUE(r.holds) << r.narrative;
}

TEST(StaticLqg, RandomPlants) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    StaticLqgOptions opts;
    opts.challengers = 5;
    opts.seed = seed;
    const TheoremReport r = verify_static_lqg(random_pr_plant(2, 1, 1, seed, 2), opts);
    EXPECT_TRUE(r.holds) << "seed " << seed << ": " << r.narrative;
  }
}

TEST(TrivialHinf, CavityNormIsOne) {
  const PlantModel p = two_port_cavity();
  const TheoremReport r = verify_trivial_hinf(p, random_challengers(p, 3, 1));
  EXPECT_TRUE(r.holds) << r.narrative;
  const StateSpaceTF z = selected_outputs(p, ControllerModel::trivial(SystemKind::annihilation, 1, 1));
  EXPECT_NEAR(hinf_norm(z, 1e-9).value, 1.0, 1e-6);
}

TEST(TrivialHinf, RandomPlantsPointwise) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PlantModel p = random_pr_plant(2, 2, 1, seed, 0, 2);
    const TheoremReport r = verify_trivial_hinf(p, random_challengers(p, 2, seed));
    EXPECT_TRUE(r.holds) << "seed " << seed << ": " << r.narrative;
    const StateSpaceTF z = selected_outputs(p, ControllerModel::trivial(SystemKind::annihilation, 1, 2));
    EXPECT_NEAR(testing::hinf_by_sampling(z), 1.0, 1e-7);
  }
}

}  // namespace
}  // namespace qcfb
