#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "qcfb/coherent.hpp"

namespace qcfb::testing {

/// Real-valued literal, e.g. mat({{-1, 0}, {0, -2}}).
Matrix mat(std::initializer_list<std::initializer_list<double>> rows);

/// Seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  double real(double lo, double hi);
  int integer(int lo, int hi);
  Matrix complex(Index rows, Index cols);
  Matrix hermitian(Index n);
  Matrix positive_definite(Index n, double floor = 0.2);
  /// Δ(A1, A2) with Gaussian blocks.
  Matrix doubled(Index half_rows, Index half_cols);
  /// Σ X# Σ = X and X = X^†.
  Matrix doubled_hermitian(Index half);
  /// T J T^† with T doubled and well conditioned.
  Matrix commutation(Index half);
  /// Random A with spectral abscissa in [-1.1, -0.1].
  Matrix stable(Index n);

 private:
  std::mt19937_64 eng_;
};

/// X from A X + X B + C = 0 through the Kronecker form.
Matrix kron_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

/// C (sI - A)^{-1} B + D by dense LU.
Matrix dense_eval(const StateSpaceTF& g, Complex s);

/// (1/2π) ∫ ‖Γ(iω)‖_F² dω by adaptive Gauss-Kronrod in ω = tan θ, square-rooted.
double h2_by_quadrature(const StateSpaceTF& g);

/// Sum over input channels of ∫ ‖C e^{At} b_j‖² dt by RK4, square-rooted.
double h2_by_impulse_energy(const StateSpaceTF& g);

/// Max σ over a dense frequency grid with golden-section refinement.
double hinf_by_sampling(const StateSpaceTF& g);

/// Built directly from X, S and C so that A X + X A^† + B J B^† = 0 and
/// B = -X C^† J. Annihilation kind uses J = I and X > 0.
struct ConverseSystem {
  StateSpaceTF tf;
  Matrix x;
};
ConverseSystem converse_pr(SystemKind kind, Index modes, Index fields, std::uint64_t seed);

/// Relative residuals of the realizability equations for a certificate Θ.
struct RealizabilityResiduals {
  double lyapunov = 0.0;
  double coupling = 0.0;
  double feedthrough = 0.0;
};
RealizabilityResiduals pr_equations(SystemKind kind, const Matrix& f, const Matrix& g, const Matrix& h,
                          const Matrix& k, const Matrix& theta);

}  // namespace qcfb::testing
