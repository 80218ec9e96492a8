#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qcfb/xfer.hpp"

namespace qcfb {
namespace {

using testing::Gen;
using testing::mat;

StateSpaceTF random_stable(Gen& gen, Index n, Index p, Index m, bool feedthrough) {
  return StateSpaceTF(gen.stable(n), gen.complex(n, m), gen.complex(p, n),
                      feedthrough ? gen.complex(p, m) : Matrix::Zero(p, m));
}

TEST(StateSpace, ShapeCheck) {
  EXPECT_THROW(StateSpaceTF(Matrix::Zero(2, 2), Matrix::Zero(1, 1), Matrix::Zero(1, 2),
                            Matrix::Zero(1, 1)),
               DimensionError);
}

TEST(Evaluate, MatchesDenseSolve) {
  Gen gen(30);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_stable(gen, gen.integer(1, 6), 2, 3, true);
    const FrequencyResponse fr(g);
    for (double w : {0.0, 0.3, -2.0, 17.0}) {
      const Complex s(gen.real(-0.5, 0.5), w);
      EXPECT_LT((fr.at(s) - testing::dense_eval(g, s)).norm(), 1e-10);
      EXPECT_LT((tf_eval(g, s) - testing::dense_eval(g, s)).norm(), 1e-10);
    }
  }
}

TEST(Evaluate, PoleThrows) {
  const StateSpaceTF g(mat({{-1}}), mat({{1}}), mat({{1}}), mat({{0}}));
  EXPECT_THROW(tf_eval(g, Complex(-1.0, 0.0)), SingularityError);
  EXPECT_TRUE(FrequencyResponse(g).near_pole(Complex(-1.0, 1e-14)));
}

TEST(H2, FirstOrderClosedForm) {
  // 1/(s+1): ‖Γ‖₂² = 1/2.
  const StateSpaceTF g(mat({{-1}}), mat({{1}}), mat({{1}}), mat({{0}}));
  const NormResult r = h2_norm(g);
  EXPECT_NEAR(r.value, std::sqrt(0.5), 1e-14);
  EXPECT_EQ(r.method, NormMethod::lyapunov_gramian);
}

TEST(H2, MatchesOracles) {
  Gen gen(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_stable(gen, gen.integer(1, 5), 2, 2, false);
    const double value = h2_norm(g).value;
    EXPECT_NEAR(value, testing::h2_by_quadrature(g), 1e-5 * value);
    EXPECT_NEAR(value, testing::h2_by_impulse_energy(g), 1e-5 * value);
  }
}

TEST(H2, Failures) {
  EXPECT_THROW(h2_norm(StateSpaceTF(mat({{-1}}), mat({{1}}), mat({{1}}), mat({{1}}))),
               InfiniteNormError);
  EXPECT_THROW(h2_norm(StateSpaceTF(mat({{1}}), mat({{1}}), mat({{1}}), mat({{0}}))),
               InstabilityError);
}

TEST(Hinf, FirstOrderClosedForm) {
  const StateSpaceTF g(mat({{-2}}), mat({{1}}), mat({{3}}), mat({{0}}));
  const NormResult r = hinf_norm(g, 1e-10);
  EXPECT_NEAR(r.value, 1.5, 1.5e-9);
  EXPECT_EQ(r.method, NormMethod::bisection);
}

TEST(Hinf, ResonantPeak) {
  // Lightly damped oscillator with peak away from zero frequency.
  const Matrix a = mat({{0, 1}, {-4, -0.1}});
  const StateSpaceTF g(a, mat({{0}, {1}}), mat({{1, 0}}), mat({{0}}));
  const double value = hinf_norm(g, 1e-10).value;
  EXPECT_NEAR(value, testing::hinf_by_sampling(g), 1e-8 * value);
}

TEST(Hinf, MatchesSampling) {
  Gen gen(32);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_stable(gen, gen.integer(1, 5), 2, 3, trial % 2 == 0);
    const double value = hinf_norm(g, 1e-9).value;
    const double oracle = testing::hinf_by_sampling(g);
    EXPECT_NEAR(value, oracle, 1e-6 * value);
  }
}

TEST(Hinf, Failures) {
  const StateSpaceTF g(mat({{1}}), mat({{1}}), mat({{1}}), mat({{0}}));
  EXPECT_THROW(hinf_norm(g), InstabilityError);
  EXPECT_THROW(hinf_norm(StateSpaceTF(mat({{-1}}), mat({{1}}), mat({{1}}), mat({{0}})), 0.0),
               DomainError);
}

TEST(Minimal, RemovesUncontrollableMode) {
  const Matrix a = mat({{-1, 0}, {0, -3}});
  const StateSpaceTF g(a, mat({{1}, {0}}), mat({{1, 1}}), mat({{0}}));
  EXPECT_FALSE(is_minimal(g));
  const StateSpaceTF r = minimal_realization(g);
  EXPECT_EQ(r.states(), 1);
  EXPECT_TRUE(is_minimal(r));
  for (double w : {0.0, 1.0, 5.0}) {
    EXPECT_LT((tf_eval(r, Complex(0, w)) - tf_eval(g, Complex(0, w))).norm(), 1e-12);
  }
}

TEST(Lossless, ConverseAnnihilationSystems) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sys = testing::converse_pr(SystemKind::annihilation, 1 + seed % 3, 1 + seed % 2, seed);
    const TransferVerdict v = lossless_br_check(sys.tf);
    EXPECT_TRUE(v.holds) << "seed " << seed;
    EXPECT_TRUE(v.algebraic.passed());
    EXPECT_TRUE(v.sampled.passed());
  }
}

TEST(Lossless, PerturbedFails) {
  Gen gen(33);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto sys = testing::converse_pr(SystemKind::annihilation, 2, 2, 50 + seed);
    sys.tf.b(0, 0) += 1e-2;
    EXPECT_FALSE(lossless_br_check(sys.tf).holds) << "seed " << seed;
  }
}

TEST(Lossless, UnstableFailsStabilityProng) {
  const StateSpaceTF g(mat({{1}}), mat({{std::sqrt(2.0)}}), mat({{std::sqrt(2.0)}}), mat({{1}}));
  const TransferVerdict v = lossless_br_check(g);
  EXPECT_FALSE(v.holds);
  EXPECT_FALSE(v.stability.passed());
}

TEST(JJUnitary, ConverseGeneralSystems) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index m = 1 + seed % 2;
    const auto sys = testing::converse_pr(SystemKind::general, 1 + seed % 2, m, seed);
    const TransferVerdict v = jj_unitary_check(sys.tf, m);
    EXPECT_TRUE(v.holds) << "seed " << seed;
  }
  EXPECT_THROW(jj_unitary_check(StateSpaceTF(mat({{-1}}), mat({{1}}), mat({{1}}), mat({{1}})), 1),
               DimensionError);
}

TEST(Grid, ScaledAndSeeded) {
  const Matrix a = mat({{-0.1, 30}, {-30, -0.1}});
  const auto grid = frequency_grid(a, 1);
  EXPECT_EQ(grid.size(), 457u);
  EXPECT_EQ(grid, frequency_grid(a, 1));
  EXPECT_NE(grid, frequency_grid(a, 2));
  double top = 0.0;
  for (double w : grid) top = std::max(top, std::abs(w));
  EXPECT_NEAR(top, 30.0 * 1e3, 1.0);
}

}  // namespace
}  // namespace qcfb
