#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qcfb/feedback.hpp"

namespace qcfb {
namespace {

using testing::Gen;
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

Matrix resolvent(const Matrix& a, const Matrix& b, Complex s) {
  return (s * Matrix::Identity(a.rows(), a.rows()) - a).partialPivLu().solve(b);
}

// Γ_cl(s) from the frequency-domain interconnection of plant and controller.
Matrix lft_oracle(const PlantModel& p, const ControllerModel& c, Complex s) {
  const Index m_u = p.control_fields();
  const Matrix xw = resolvent(p.f, p.g_w, s);
  const Matrix xu = resolvent(p.f, p.g_u, s);
  const Matrix p_yw = p.h * xw + p.k;
  const Matrix p_yu = p.h * xu;
  Matrix c_w = c.k_cw;
  Matrix c_y = c.k_cy;
  if (c.modes() > 0) {
    c_w += c.h_c * resolvent(c.f_c, c.g_cw, s);
    c_y += c.h_c * resolvent(c.f_c, c.g_cy, s);
  }
  const Matrix loop = (Matrix::Identity(m_u, m_u) - c_y * p_yu).inverse();
  const Matrix u_w = loop * c_y * p_yw;
  const Matrix u_wt = loop * c_w;
  const CostOutput& co = *p.cost;
  Matrix z_w = co.c * (xw + xu * u_w) + co.d * u_w;
  if (co.d_w.size() != 0) z_w += co.d_w;
  const Matrix z_wt = co.c * xu * u_wt + co.d * u_wt;
  Matrix out(z_w.rows(), z_w.cols() + z_wt.cols());
  out << z_w, z_wt;
  return out;
}

TEST(Models, TrivialAndStaticControllers) {
  const ControllerModel t = ControllerModel::trivial(SystemKind::annihilation, 2, 1);
  EXPECT_EQ(t.modes(), 0);
  EXPECT_EQ(t.k_cw, Matrix::Identity(2, 2));
  EXPECT_EQ(t.k_cy, Matrix::Zero(2, 1));
  const ControllerModel g = ControllerModel::static_gain(SystemKind::annihilation,
                                                         mat({{1}}), mat({{0.5, 0}}));
  EXPECT_EQ(g.input_fields(), 2);
  EXPECT_THROW(ControllerModel::static_gain(SystemKind::annihilation, mat({{1}}), mat({{1}, {1}})),
               DimensionError);
}

TEST(Models, PlantValidation) {
  PlantModel p = two_port_cavity();
  EXPECT_NO_THROW(p.validate());
  p.k = mat({{1, 0}});
  EXPECT_THROW(p.validate(), DimensionError);
}

TEST(Augment, TwoPortCavity) {
  const AugmentedSystem a = augment_plant(two_port_cavity());
  EXPECT_NEAR(a.theta(0, 0).real(), 1.0, 1e-14);
  EXPECT_NEAR(a.h_tilde(0, 0).real(), 1.0, 1e-14);
  EXPECT_TRUE(a.verdict.realizable());
  EXPECT_EQ(a.system.k(), Matrix::Identity(2, 2));
}

TEST(Augment, NonRealizablePlantThrows) {
  PlantModel p = two_port_cavity();
  p.g_w = mat({{-0.9}});
  try {
    augment_plant(p);
    FAIL() << "expected NotAugmentableError";
  } catch (const NotAugmentableError& e) {
    EXPECT_FALSE(e.residuals().empty());
  }
}

TEST(Augment, RandomPlantsSatisfyEquations) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PlantModel p = random_pr_plant(2, 1 + seed % 2, 1, seed);
    const AugmentedSystem a = augment_plant(p);
    const auto r = testing::pr_equations(SystemKind::annihilation, a.system.f(), a.system.g(),
                                         a.system.h(), a.system.k(), a.theta);
    EXPECT_LT(r.lyapunov, 1e-10);
    EXPECT_LT(r.coupling, 1e-10);
    EXPECT_LT((a.system.h().topRows(p.h.rows()) - p.h).norm(), 1e-14);
  }
}

TEST(ClosedLoop, CavityWithTrivialController) {
  const PlantModel p = two_port_cavity();
  const ControllerModel c = ControllerModel::trivial(SystemKind::annihilation, 1, 1);
  const ClosedLoop cl = close_loop(p, c);
  EXPECT_TRUE(cl.internally_stable);
  EXPECT_EQ(cl.state_matrix, mat({{-1}}));
  EXPECT_EQ(cl.noise_matrix, mat({{-1, -1}}));
  EXPECT_NEAR(h2_norm(cl.system).value, 1.0, 1e-14);
}

TEST(ClosedLoop, UnstableStaticGain) {
  const PlantModel p = two_port_cavity();
  const ControllerModel c = ControllerModel::static_gain(SystemKind::annihilation,
                                                         mat({{1}}), mat({{-2}}));
  const ClosedLoop cl = close_loop(p, c);
  EXPECT_FALSE(cl.internally_stable);
  EXPECT_NEAR(cl.state_matrix(0, 0).real(), 1.0, 1e-15);
}

TEST(ClosedLoop, MatchesInterconnectionOracle) {
  Gen gen(40);
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const PlantModel p = random_pr_plant(2, 2, 1, seed, 2);
    const ControllerModel c = random_pr_controller(1, 2, seed + 100);
    const StateSpaceTF g = gamma_cl(p, c);
    for (int k = 0; k < 5; ++k) {
      const Complex s(0.0, gen.real(-5.0, 5.0));
      const Matrix oracle = lft_oracle(p, c, s);
      EXPECT_LT((testing::dense_eval(g, s) - oracle).norm(), 1e-9 * (1.0 + oracle.norm()));
    }
  }
}

TEST(ClosedLoop, MismatchedControllerThrows) {
  const ControllerModel c = ControllerModel::trivial(SystemKind::annihilation, 2, 1);
  EXPECT_THROW(close_loop(two_port_cavity(), c), DimensionError);
}

TEST(Modified, SameTransferAsOriginal) {
  Gen gen(41);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PlantModel p = random_pr_plant(2, 1, 1, seed, 1);
    const ControllerModel c = ControllerModel::static_gain(
        SystemKind::annihilation, mat({{std::sqrt(0.75)}}), mat({{gen.real(-0.5, 0.5)}}));
    const ClosedLoop direct = close_loop(p, c);
    const ClosedLoop modified = close_modified_loop(modified_forms(p, c));
    for (int k = 0; k < 20; ++k) {
      const Complex s(0.0, gen.real(-10.0, 10.0));
      EXPECT_LT((testing::dense_eval(direct.system, s) - testing::dense_eval(modified.system, s)).norm(),
                1e-9);
    }
  }
}

TEST(Physical, TrivialLoopIsLossless) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PlantModel p = random_pr_plant(2, 2, 1, seed);
    const ControllerModel c = ControllerModel::trivial(SystemKind::annihilation, 1, 2);
    const StateSpaceTF g = physical_outputs(p, c);
    EXPECT_EQ(g.outputs(), g.inputs());
    EXPECT_EQ(g.d, Matrix::Identity(3, 3));
    EXPECT_TRUE(lossless_br_check(g).holds) << "seed " << seed;
  }
}

TEST(Synthesis, ScalarBoundary) {
  const Matrix f = mat({{-1}});
  const Matrix g = mat({{0}});
  for (double alpha : {0.9, 0.99}) {
    const NoiseSynthesis s = synth_noise_annihilation(f, g, mat({{alpha}}));
    EXPECT_TRUE(s.verdict.realizable());
    EXPECT_NEAR(s.admissibility_norm, alpha, 1e-6 * alpha);
  }
  for (double alpha : {1.01, 1.1}) {
    try {
      synth_noise_annihilation(f, g, mat({{alpha}}));
      FAIL() << "alpha " << alpha << " should be rejected";
    } catch (const NotRealizableError& e) {
      EXPECT_EQ(e.prong(), "hinf");
      EXPECT_NEAR(e.value(), alpha, 1e-6 * alpha);
    }
  }
}

TEST(Synthesis, MinimalNoiseCavity) {
  // -2Θ + 1 = 0 without extra noise.
  const NoiseSynthesis s = synth_noise_annihilation(mat({{-1}}), mat({{1}}), mat({{0}}));
  EXPECT_EQ(s.extra_noise_channels, 0);
  EXPECT_TRUE(s.zero_extra_noise);
  EXPECT_NEAR(s.theta(0, 0).real(), 0.5, 1e-12);
  EXPECT_TRUE(s.verdict.realizable());
}

TEST(Synthesis, BoundaryPrefersZeroExtraNoise) {
  // -2Θ + Θ² = 0 has the positive root Θ = 2, so G_cwa = -2 and no extra channel.
  const NoiseSynthesis s = synth_noise_annihilation(mat({{-1}}), mat({{0}}), mat({{1}}));
  EXPECT_EQ(s.extra_noise_channels, 0);
  EXPECT_NEAR(s.theta(0, 0).real(), 2.0, 1e-10);
  EXPECT_NEAR(s.controller.g_cw(0, 0).real(), -2.0, 1e-10);
  EXPECT_TRUE(s.verdict.realizable());
}

TEST(Synthesis, NonHurwitzRejected) {
  try {
    synth_noise_annihilation(mat({{1}}), mat({{1}}), mat({{0.1}}));
    FAIL() << "expected NotRealizableError";
  } catch (const NotRealizableError& e) {
    EXPECT_EQ(e.prong(), "hurwitz");
  }
}

TEST(Synthesis, AugmentedControllerSatisfiesEquations) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ControllerModel c = random_pr_controller(1 + seed % 2, 1 + seed % 3, seed);
    const AugmentedSystem a = augment_controller(c);
    const auto r = testing::pr_equations(SystemKind::annihilation, a.system.f(), a.system.g(),
                                         a.system.h(), a.system.k(), a.theta);
    EXPECT_LT(r.lyapunov, 1e-8) << "seed " << seed;
    EXPECT_LT(r.coupling, 1e-8) << "seed " << seed;
  }
}

TEST(Synthesis, GeneralKind) {
  Gen gen(42);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix f = gen.doubled(1, 1) - 2.0 * Matrix::Identity(2, 2);
    const Matrix g = gen.doubled(1, 1);
    const Matrix h = 0.3 * gen.doubled(1, 1);
    const Matrix theta = random_commutation_matrix(1, seed);
    const NoiseSynthesis s = synth_noise_general(f, g, h, theta);
    EXPECT_TRUE(s.verdict.realizable()) << "seed " << seed;
    const AugmentedSystem a = augment_controller(s.controller);
    const auto r = testing::pr_equations(SystemKind::general, a.system.f(), a.system.g(),
                                         a.system.h(), a.system.k(), a.theta);
    EXPECT_LT(r.lyapunov, 1e-8);
    EXPECT_LT(r.coupling, 1e-8);
  }
}

}  // namespace
}  // namespace qcfb
