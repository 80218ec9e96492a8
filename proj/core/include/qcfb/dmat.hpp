#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcfb/errors.hpp"

namespace qcfb {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Named scalar diagnostics, in insertion order.
using NamedValues = std::vector<std::pair<std::string, double>>;

struct Tolerances {
  double structure = 1e-9;  ///< doubled-up and Hermitian structure checks
  double residual = 1e-8;   ///< relative equation residuals
  double rank = 1e-10;      ///< relative rank cutoff
  double singular = 1e-10;  ///< spectral-gap guard
};

/// Tolerance of the sampled frequency-domain prongs.
inline constexpr double kFrequencyTolerance = 1e-7;

/// Pre-symmetrization asymmetry above which a Hermitian result is suspect.
inline constexpr double kSuspectAsymmetry = 1e-6;

/// Largest |entry|, zero for empty matrices.
double max_abs(const Matrix& a);
bool all_finite(const Matrix& a);
/// Throws DomainError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& a, std::string_view what);
Matrix hermitian_part(const Matrix& a);
double hermitian_deviation(const Matrix& a);
double max_singular_value(const Matrix& a);
double min_singular_value(const Matrix& a);

/// J = diag(I, -I) of size 2 * half_dim.
Matrix signature_j(Index half_dim);
/// Σ = [[0, I], [I, 0]] of size 2 * half_dim.
Matrix exchange_sigma(Index half_dim);

/// Complex matrix with the block form [[A1, A2], [conj(A2), conj(A1)]].
class DoubledMatrix {
 public:
  DoubledMatrix() = default;

  static DoubledMatrix from_blocks(const Matrix& a1, const Matrix& a2);
  /// Adopts `body` after checking its block structure to within `tol`.
  static DoubledMatrix from_matrix(const Matrix& body, double tol);

  const Matrix& matrix() const { return body_; }
  Index half_rows() const { return body_.rows() / 2; }
  Index half_cols() const { return body_.cols() / 2; }
  Matrix first_block() const;
  Matrix second_block() const;

 private:
  explicit DoubledMatrix(Matrix body) : body_(std::move(body)) {}
  Matrix body_;
};

DoubledMatrix delta_build(const Matrix& a1, const Matrix& a2);

struct StructureCheck {
  bool ok = false;
  double deviation = 0.0;
};

StructureCheck is_doubled(const Matrix& a, double tol);

/// Solves AX + XB + C = 0 by complex Schur back-substitution.
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c,
                       const Tolerances& tol = {});

struct HermitianSolution {
  Matrix x;
  double residual = 0.0;    ///< relative to 1 + |Q|
  double asymmetry = 0.0;   ///< before symmetrization
  bool suspect = false;
};

/// Solves AX + XA^† + Q = 0 for Hermitian X.
HermitianSolution solve_lyapunov_hermitian(const Matrix& a, const Matrix& q,
                                           const Tolerances& tol = {});

enum class CareSelection { stabilizing, alternative, lyapunov };
std::string_view to_string(CareSelection s);

struct CareSolution {
  Matrix x;
  CareSelection selection = CareSelection::stabilizing;
  double residual = 0.0;
  double asymmetry = 0.0;
};

struct CareOutcome {
  std::optional<CareSolution> solution;
  std::string report;
};

/// Hermitian solution of AX + XA^† + XRX + Q = 0. The stable invariant
/// subspace is preferred; for n <= 4 other subspaces are scanned when it
/// gives no Hermitian solution. R = 0 falls back to the Lyapunov solver.
CareOutcome solve_care_hermitian(const Matrix& a, const Matrix& r,
                                 const Matrix& q, const Tolerances& tol = {});

/// Every Hermitian solution reachable from the invariant-subspace scan,
/// stabilizing one first. At most `limit` entries.
std::vector<CareSolution> care_hermitian_solutions(const Matrix& a,
                                                   const Matrix& r,
                                                   const Matrix& q,
                                                   const Tolerances& tol = {},
                                                   std::size_t limit = 64);

struct PsdSplit {
  Matrix positive;         ///< P >= 0
  Matrix negative;         ///< N >= 0, M = P - N
  Matrix positive_factor;  ///< P = Fp Fp^†, rank(P) columns
  Matrix negative_factor;  ///< N = Fn Fn^†, rank(N) columns
};

PsdSplit psd_split(const Matrix& m, const Tolerances& tol = {});

Index rank_svd(const Matrix& a, double rel_tol = 1e-10);

bool no_imaginary_axis_eigs(const Matrix& a, double tol);

Vector eigenvalues(const Matrix& a);
double spectral_abscissa(const Matrix& a);
/// All eigenvalues satisfy Re < -margin.
bool is_hurwitz(const Matrix& a, double margin = 1e-10);

struct Inertia {
  Index positive = 0;
  Index negative = 0;
  Index zero = 0;
};

Inertia inertia(const Matrix& hermitian, double rel_tol = 1e-10);

/// Hermitian solutions X of the coupled system
///   AX + XA^† + Q = 0,   B + X C^† W = 0,
/// found by least squares over the real parameters of X.
struct CoupledCertificate {
  enum class Status { unique, family, inconsistent };
  Status status = Status::inconsistent;
  Matrix x;                       ///< minimum-norm member
  std::vector<Matrix> null_basis; ///< Hermitian directions of the family
  double lyapunov_residual = 0.0;
  double coupling_residual = 0.0;
};

CoupledCertificate solve_coupled_lyapunov(const Matrix& a, const Matrix& q,
                                          const Matrix& b, const Matrix& c,
                                          const Matrix& w,
                                          const Tolerances& tol = {});

// Field-blocked layout. Annihilation-kind blocks are plain; general-kind
// blocks are doubled, so their columns (or rows) split into a first half
// for the fields and a second half for the adjoint fields. The helpers
// below concatenate and slice per field so the result stays doubled.

enum class SystemKind { general, annihilation };
std::string_view to_string(SystemKind k);

inline Index multiplicity(SystemKind k) {
  return k == SystemKind::general ? 2 : 1;
}

Matrix hcat_fields(SystemKind k, const std::vector<Matrix>& blocks);
Matrix vcat_fields(SystemKind k, const std::vector<Matrix>& blocks);
Matrix block_diag_fields(SystemKind k, const Matrix& a, const Matrix& b);
Matrix field_cols(SystemKind k, const Matrix& m, Index first, Index count);
Matrix field_rows(SystemKind k, const Matrix& m, Index first, Index count);
/// Identity on `count` fields.
Matrix field_identity(SystemKind k, Index count);
/// Zero block with the given field counts.
Matrix field_zero(SystemKind k, Index rows, Index cols);
/// I for annihilation kind, J for general kind.
Matrix field_sign(SystemKind k, Index count);

}  // namespace qcfb
