#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qcfb/dmat.hpp"

namespace qcfb {

/// Realization of Γ(s) = C (sI - A)^{-1} B + D.
struct StateSpaceTF {
  Matrix a, b, c, d;

  StateSpaceTF() = default;
  StateSpaceTF(Matrix a, Matrix b, Matrix c, Matrix d);

  Index states() const { return a.rows(); }
  Index inputs() const { return d.cols(); }
  Index outputs() const { return d.rows(); }
};

enum class NormMethod { lyapunov_gramian, bisection };
std::string_view to_string(NormMethod m);

struct NormResult {
  double value = 0.0;
  NormMethod method = NormMethod::lyapunov_gramian;
  /// Gramian residual, or final bracket width for bisection.
  double certificate = 0.0;
};

/// Evaluates Γ(s) through a Schur form of A computed once.
class FrequencyResponse {
 public:
  explicit FrequencyResponse(const StateSpaceTF& g, const Tolerances& tol = {});

  /// Throws SingularityError when s is within the guard of the spectrum.
  Matrix at(Complex s) const;
  bool near_pole(Complex s) const;

 private:
  Matrix t_;   // triangular factor of A
  Matrix ub_;  // U^† B
  Matrix cu_;  // C U
  Matrix d_;
  double guard_ = 0.0;
};

Matrix tf_eval(const StateSpaceTF& g, Complex s, const Tolerances& tol = {});

bool is_minimal(const StateSpaceTF& g, const Tolerances& tol = {});

/// Controllable and observable part via SVD bases of the Kalman matrices.
StateSpaceTF minimal_realization(const StateSpaceTF& g, const Tolerances& tol = {});

/// Frequencies used by the sampled prongs and oracles.
std::vector<double> frequency_grid(const Matrix& a, std::uint64_t seed = 0);

enum class ProngStatus { pass, fail, indeterminate };
std::string_view to_string(ProngStatus s);

struct Prong {
  ProngStatus status = ProngStatus::indeterminate;
  NamedValues residuals;
  std::string detail;

  bool passed() const { return status == ProngStatus::pass; }
};

struct TransferVerdict {
  bool holds = false;
  Prong stability;  ///< lossless check only
  Prong algebraic;
  Prong sampled;
  std::optional<Matrix> certificate;
  Index reduced_states = 0;
};

/// Γ~(s) J Γ(s) = J, checked algebraically and on the frequency grid.
TransferVerdict jj_unitary_check(const StateSpaceTF& g, Index half_io,
                                 const Tolerances& tol = {});

/// Stable and Γ~(s) Γ(s) = I.
TransferVerdict lossless_br_check(const StateSpaceTF& g, const Tolerances& tol = {});

NormResult h2_norm(const StateSpaceTF& g, const Tolerances& tol = {});

NormResult hinf_norm(const StateSpaceTF& g, double rel_tol = 1e-6,
                     const Tolerances& tol = {});

}  // namespace qcfb
