#include "qcfb/dmat.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "schur.hpp"

namespace qcfb {

double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& a) {
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) {
        return false;
      }
    }
  }
  return true;
}

void require_finite(const Matrix& a, std::string_view what) {
  if (!all_finite(a)) {
    throw DomainError(std::string(what) + " has non-finite entries");
  }
}

Matrix hermitian_part(const Matrix& a) {
  return (a + a.adjoint()) * 0.5;
}

double hermitian_deviation(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("Hermitian check needs a square matrix");
  }
  return max_abs(a - a.adjoint());
}

double max_singular_value(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double min_singular_value(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

Matrix signature_j(Index half_dim) {
  Matrix j = Matrix::Identity(2 * half_dim, 2 * half_dim);
  j.bottomRightCorner(half_dim, half_dim) *= -1.0;
  return j;
}

Matrix exchange_sigma(Index half_dim) {
  Matrix s = Matrix::Zero(2 * half_dim, 2 * half_dim);
  s.topRightCorner(half_dim, half_dim).setIdentity();
  s.bottomLeftCorner(half_dim, half_dim).setIdentity();
  return s;
}

DoubledMatrix DoubledMatrix::from_blocks(const Matrix& a1, const Matrix& a2) {
  if (a1.rows() != a2.rows() || a1.cols() != a2.cols()) {
    throw DimensionError("doubled-up blocks must have the same shape");
  }
  Matrix body(2 * a1.rows(), 2 * a1.cols());
  body << a1, a2, a2.conjugate(), a1.conjugate();
  return DoubledMatrix(std::move(body));
}

DoubledMatrix DoubledMatrix::from_matrix(const Matrix& body, double tol) {
  const StructureCheck check = is_doubled(body, tol);
  if (!check.ok) {
    throw DomainError("matrix is not doubled-up (deviation " +
                      std::to_string(check.deviation) + ")");
  }
  return DoubledMatrix(body);
}

Matrix DoubledMatrix::first_block() const {
  return body_.topLeftCorner(half_rows(), half_cols());
}

Matrix DoubledMatrix::second_block() const {
  return body_.topRightCorner(half_rows(), half_cols());
}

DoubledMatrix delta_build(const Matrix& a1, const Matrix& a2) {
  return DoubledMatrix::from_blocks(a1, a2);
}

StructureCheck is_doubled(const Matrix& a, double tol) {
  if (a.rows() % 2 != 0 || a.cols() % 2 != 0) {
    throw DimensionError("doubled-up check needs even dimensions");
  }
  const Index r = a.rows() / 2;
  const Index c = a.cols() / 2;
  const double d1 = max_abs(a.bottomLeftCorner(r, c) -
                            a.topRightCorner(r, c).conjugate());
  const double d2 = max_abs(a.bottomRightCorner(r, c) -
                            a.topLeftCorner(r, c).conjugate());
  const double dev = std::max(d1, d2);
  return {dev <= tol, dev};
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c,
                       const Tolerances& tol) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) {
    throw DimensionError("Sylvester coefficients must be square");
  }
  if (c.rows() != a.rows() || c.cols() != b.rows()) {
    throw DimensionError("Sylvester constant has the wrong shape");
  }
  const Index p = a.rows();
  const Index q = b.rows();
  if (p == 0 || q == 0) return Matrix::Zero(p, q);

  const detail::SchurForm sa = detail::complex_schur(a);
  const detail::SchurForm sb = detail::complex_schur(b);

  double scale = 1.0;
  for (Index i = 0; i < p; ++i) scale = std::max(scale, std::abs(sa.t(i, i)));
  for (Index j = 0; j < q; ++j) scale = std::max(scale, std::abs(sb.t(j, j)));
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < q; ++j) {
      if (std::abs(sa.t(i, i) + sb.t(j, j)) <= tol.singular * scale) {
        throw SingularityError(
            "Sylvester operator is singular: eigenvalues sum to zero",
            sa.t(i, i), sb.t(j, j));
      }
    }
  }

  const Matrix f = -(sa.u.adjoint() * c * sb.u);
  Matrix y(p, q);
  Matrix shifted = sa.t;
  for (Index j = 0; j < q; ++j) {
    Vector rhs = f.col(j);
    for (Index k = 0; k < j; ++k) rhs -= sb.t(k, j) * y.col(k);
    shifted.diagonal() = sa.t.diagonal().array() + sb.t(j, j);
    y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return sa.u * y * sb.u.adjoint();
}

HermitianSolution solve_lyapunov_hermitian(const Matrix& a, const Matrix& q,
                                           const Tolerances& tol) {
  if (q.rows() != a.rows() || q.cols() != a.cols()) {
    throw DimensionError("Lyapunov constant has the wrong shape");
  }
  if (hermitian_deviation(q) > tol.structure * std::max(1.0, max_abs(q))) {
    throw DomainError("Lyapunov constant is not Hermitian");
  }
  const Matrix raw = solve_sylvester(a, a.adjoint(), q, tol);
  HermitianSolution out;
  out.asymmetry = max_abs(raw - raw.adjoint());
  out.x = hermitian_part(raw);
  out.suspect = out.asymmetry > kSuspectAsymmetry * std::max(1.0, max_abs(out.x));
  out.residual = max_abs(a * out.x + out.x * a.adjoint() + q) /
                 (1.0 + max_abs(q));
  return out;
}

std::string_view to_string(CareSelection s) {
  switch (s) {
    case CareSelection::stabilizing:
      return "stabilizing";
    case CareSelection::alternative:
      return "alternative";
    case CareSelection::lyapunov:
      return "lyapunov";
  }
  return "unknown";
}

namespace {

double care_scale(const Matrix& r, const Matrix& q, const Matrix& x) {
  const double nx = max_abs(x);
  return 1.0 + max_abs(q) + nx * nx * max_abs(r);
}

double care_residual(const Matrix& a, const Matrix& r, const Matrix& q,
                     const Matrix& x) {
  return max_abs(a * x + x * a.adjoint() + x * r * x + q);
}

// All n-subsets of 0..2n-1 ordered by the sum of real parts, lowest first.
std::vector<std::vector<bool>> ordered_subsets(const Vector& eig, Index n,
                                               bool exhaustive) {
  const Index m = eig.size();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    return eig(i).real() < eig(j).real();
  });

  std::vector<std::pair<double, std::vector<bool>>> found;
  auto add = [&](const std::vector<bool>& sel) {
    double s = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (sel[static_cast<std::size_t>(i)]) s += eig(i).real();
    }
    found.emplace_back(s, sel);
  };

  std::vector<bool> stable(static_cast<std::size_t>(m), false);
  for (Index i = 0; i < n; ++i) stable[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
  std::vector<std::vector<bool>> out{stable};

  if (exhaustive) {
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
      if (std::popcount(mask) != n) continue;
      std::vector<bool> sel(static_cast<std::size_t>(m));
      for (Index i = 0; i < m; ++i) sel[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
      if (sel == stable) continue;
      add(sel);
    }
  } else {
    std::vector<bool> anti(static_cast<std::size_t>(m), false);
    for (Index i = m - n; i < m; ++i) anti[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
    if (anti != stable) add(anti);
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& l, const auto& r) { return l.first < r.first; });
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

}  // namespace

std::vector<CareSolution> care_hermitian_solutions(const Matrix& a,
                                                   const Matrix& r,
                                                   const Matrix& q,
                                                   const Tolerances& tol,
                                                   std::size_t limit) {
  const Index n = a.rows();
  if (a.cols() != n || r.rows() != n || r.cols() != n || q.rows() != n ||
      q.cols() != n) {
    throw DimensionError("Riccati coefficients must be square and conformal");
  }
  require_finite(a, "A");
  require_finite(r, "R");
  require_finite(q, "Q");
  if (hermitian_deviation(r) > tol.structure * std::max(1.0, max_abs(r)) ||
      hermitian_deviation(q) > tol.structure * std::max(1.0, max_abs(q))) {
    throw DomainError("Riccati coefficients R and Q must be Hermitian");
  }

  std::vector<CareSolution> out;
  if (n == 0) {
    out.push_back({Matrix(0, 0), CareSelection::stabilizing, 0.0, 0.0});
    return out;
  }

  if (max_abs(r) == 0.0) {
    try {
      const HermitianSolution lyap = solve_lyapunov_hermitian(a, q, tol);
      if (lyap.residual <= tol.residual) {
        out.push_back({lyap.x, CareSelection::lyapunov,
                       care_residual(a, r, q, lyap.x) / care_scale(r, q, lyap.x),
                       lyap.asymmetry});
      }
    } catch (const SingularityError&) {
      // fall through to the subspace scan
    }
    if (!out.empty()) return out;
  }

  Matrix h(2 * n, 2 * n);
  h << a.adjoint(), r, -q, -a;
  const detail::SchurForm base = detail::complex_schur(h);
  const Vector diag = base.t.diagonal();

  const auto subsets = ordered_subsets(diag, n, n <= 4);
  bool first = true;
  for (const auto& sel : subsets) {
    detail::SchurForm f = base;
    detail::reorder_schur(f, sel);
    const Matrix u1 = f.u.topLeftCorner(n, n);
    const Matrix u2 = f.u.bottomLeftCorner(n, n);
    Eigen::JacobiSVD<Matrix> svd(u1);
    const auto& sv = svd.singularValues();
    const bool usable = sv(0) > 0.0 && sv(n - 1) / sv(0) > tol.singular;
    if (usable) {
      // X U1 = U2
      const Matrix x_raw =
          u1.adjoint().fullPivLu().solve(u2.adjoint()).adjoint();
      const double asym = max_abs(x_raw - x_raw.adjoint());
      if (asym <= kSuspectAsymmetry * std::max(1.0, max_abs(x_raw))) {
        const Matrix x = hermitian_part(x_raw);
        const double res = care_residual(a, r, q, x) / care_scale(r, q, x);
        if (res <= tol.residual) {
          out.push_back({x,
                         first ? CareSelection::stabilizing
                               : CareSelection::alternative,
                         res, asym});
          if (out.size() >= limit) break;
        }
      }
    }
    first = false;
  }
  return out;
}

CareOutcome solve_care_hermitian(const Matrix& a, const Matrix& r,
                                 const Matrix& q, const Tolerances& tol) {
  auto all = care_hermitian_solutions(a, r, q, tol, 1);
  CareOutcome out;
  if (all.empty()) {
    out.report = a.rows() <= 4
                     ? "no invariant subspace yields a Hermitian solution"
                     : "stable and anti-stable subspaces yield no Hermitian "
                       "solution; exhaustive scan is limited to n <= 4";
    return out;
  }
  out.solution = std::move(all.front());
  out.report = std::string("selected ") +
               std::string(to_string(out.solution->selection)) + " solution";
  return out;
}

PsdSplit psd_split(const Matrix& m, const Tolerances& tol) {
  if (m.rows() != m.cols()) throw DimensionError("psd_split needs a square matrix");
  if (hermitian_deviation(m) > tol.structure * std::max(1.0, max_abs(m))) {
    throw DomainError("psd_split input is not Hermitian");
  }
  const Index n = m.rows();
  PsdSplit out;
  out.positive = Matrix::Zero(n, n);
  out.negative = Matrix::Zero(n, n);
  out.positive_factor = Matrix(n, 0);
  out.negative_factor = Matrix(n, 0);
  if (n == 0) return out;

  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double lmax = lam.cwiseAbs().maxCoeff();
  const double cutoff = tol.rank * lmax;
  std::vector<Index> pos, neg;
  for (Index i = 0; i < n; ++i) {
    if (lam(i) > cutoff) pos.push_back(i);
    if (lam(i) < -cutoff) neg.push_back(i);
  }
  // Larger magnitudes first.
  std::reverse(pos.begin(), pos.end());
  out.positive_factor.resize(n, static_cast<Index>(pos.size()));
  out.negative_factor.resize(n, static_cast<Index>(neg.size()));
  for (std::size_t k = 0; k < pos.size(); ++k) {
    out.positive_factor.col(static_cast<Index>(k)) =
        std::sqrt(lam(pos[k])) * es.eigenvectors().col(pos[k]);
  }
  for (std::size_t k = 0; k < neg.size(); ++k) {
    out.negative_factor.col(static_cast<Index>(k)) =
        std::sqrt(-lam(neg[k])) * es.eigenvectors().col(neg[k]);
  }
  out.positive = out.positive_factor * out.positive_factor.adjoint();
  out.negative = out.negative_factor * out.negative_factor.adjoint();
  return out;
}

Index rank_svd(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& sv = svd.singularValues();
  if (sv(0) == 0.0) return 0;
  const double cutoff =
      rel_tol * sv(0) * static_cast<double>(std::max(a.rows(), a.cols()));
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++r;
  }
  return r;
}

Vector eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("eigenvalues need a square matrix");
  if (a.rows() == 0) return Vector(0);
  Eigen::ComplexEigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) {
    throw Error("eigenvalue computation did not converge");
  }
  return es.eigenvalues();
}

bool no_imaginary_axis_eigs(const Matrix& a, double tol) {
  const Vector ev = eigenvalues(a);
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i).real()) <= tol) return false;
  }
  return true;
}

double spectral_abscissa(const Matrix& a) {
  const Vector ev = eigenvalues(a);
  double s = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < ev.size(); ++i) s = std::max(s, ev(i).real());
  return s;
}

bool is_hurwitz(const Matrix& a, double margin) {
  return a.rows() == 0 || spectral_abscissa(a) < -margin;
}

Inertia inertia(const Matrix& hermitian, double rel_tol) {
  Inertia out;
  const Index n = hermitian.rows();
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(hermitian),
                                           Eigen::EigenvaluesOnly);
  const auto& lam = es.eigenvalues();
  const double cutoff = rel_tol * lam.cwiseAbs().maxCoeff();
  for (Index i = 0; i < n; ++i) {
    if (lam(i) > cutoff) {
      ++out.positive;
    } else if (lam(i) < -cutoff) {
      ++out.negative;
    } else {
      ++out.zero;
    }
  }
  return out;
}

namespace {

// Real basis of the Hermitian n x n matrices.
std::vector<Matrix> hermitian_basis(Index n) {
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(n * n));
  for (Index i = 0; i < n; ++i) {
    Matrix e = Matrix::Zero(n, n);
    e(i, i) = 1.0;
    basis.push_back(std::move(e));
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      Matrix re = Matrix::Zero(n, n);
      re(i, j) = 1.0;
      re(j, i) = 1.0;
      basis.push_back(std::move(re));
      Matrix im = Matrix::Zero(n, n);
      im(i, j) = Complex(0.0, 1.0);
      im(j, i) = Complex(0.0, -1.0);
      basis.push_back(std::move(im));
    }
  }
  return basis;
}

void realify_into(const Matrix& m, Eigen::VectorXd& out, Index offset) {
  const Index s = m.size();
  for (Index k = 0; k < s; ++k) {
    out(offset + k) = m.data()[k].real();
    out(offset + s + k) = m.data()[k].imag();
  }
}

}  // namespace

CoupledCertificate solve_coupled_lyapunov(const Matrix& a, const Matrix& q,
                                          const Matrix& b, const Matrix& c,
                                          const Matrix& w,
                                          const Tolerances& tol) {
  const Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n || b.rows() != n ||
      c.cols() != n || c.rows() != w.rows() || w.cols() != b.cols()) {
    throw DimensionError("coupled Lyapunov operands are not conformal");
  }
  CoupledCertificate out;
  const Matrix cw = c.adjoint() * w;  // n x k
  const std::vector<Matrix> basis = hermitian_basis(n);
  const Index unknowns = static_cast<Index>(basis.size());
  const Index rows = 2 * (n * n + b.size());

  Eigen::MatrixXd sys(rows, unknowns);
  Eigen::VectorXd col(rows);
  for (Index k = 0; k < unknowns; ++k) {
    const Matrix& e = basis[static_cast<std::size_t>(k)];
    realify_into(a * e + e * a.adjoint(), col, 0);
    realify_into(e * cw, col, 2 * n * n);
    sys.col(k) = col;
  }
  Eigen::VectorXd rhs(rows);
  realify_into(-q, rhs, 0);
  realify_into(-b, rhs, 2 * n * n);

  Matrix x = Matrix::Zero(n, n);
  Index rank = 0;
  if (unknowns > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 && sv(0) > 0.0
                              ? tol.rank * sv(0) * static_cast<double>(rows)
                              : 0.0;
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
    }
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(unknowns);
    const Eigen::VectorXd proj = svd.matrixU().leftCols(rank).transpose() * rhs;
    for (Index i = 0; i < rank; ++i) {
      coef += svd.matrixV().col(i) * (proj(i) / sv(i));
    }
    for (Index k = 0; k < unknowns; ++k) x += coef(k) * basis[static_cast<std::size_t>(k)];
    for (Index k = rank; k < unknowns; ++k) {
      Matrix z = Matrix::Zero(n, n);
      for (Index i = 0; i < unknowns; ++i) {
        z += svd.matrixV()(i, k) * basis[static_cast<std::size_t>(i)];
      }
      out.null_basis.push_back(std::move(z));
    }
  }
  out.x = hermitian_part(x);
  out.lyapunov_residual = max_abs(a * out.x + out.x * a.adjoint() + q) /
                          (1.0 + max_abs(q));
  out.coupling_residual = max_abs(b + out.x * cw) / (1.0 + max_abs(b));
  if (out.lyapunov_residual > tol.residual || out.coupling_residual > tol.residual) {
    out.status = CoupledCertificate::Status::inconsistent;
  } else if (out.null_basis.empty()) {
    out.status = CoupledCertificate::Status::unique;
  } else {
    out.status = CoupledCertificate::Status::family;
  }
  return out;
}

std::string_view to_string(SystemKind k) {
  return k == SystemKind::general ? "general" : "annihilation";
}

namespace {

void require_even(Index v, const char* what) {
  if (v % 2 != 0) {
    throw DimensionError(std::string(what) + " of a doubled-up block must be even");
  }
}

}  // namespace

Matrix hcat_fields(SystemKind k, const std::vector<Matrix>& blocks) {
  if (blocks.empty()) throw DimensionError("hcat_fields needs at least one block");
  const Index rows = blocks.front().rows();
  Index cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) throw DimensionError("hcat_fields row mismatch");
    if (k == SystemKind::general) require_even(b.cols(), "column count");
    cols += b.cols();
  }
  Matrix out(rows, cols);
  if (k == SystemKind::annihilation) {
    Index at = 0;
    for (const auto& b : blocks) {
      out.middleCols(at, b.cols()) = b;
      at += b.cols();
    }
    return out;
  }
  const Index half = cols / 2;
  Index at = 0;
  for (const auto& b : blocks) {
    const Index h = b.cols() / 2;
    out.middleCols(at, h) = b.leftCols(h);
    out.middleCols(half + at, h) = b.rightCols(h);
    at += h;
  }
  return out;
}

Matrix vcat_fields(SystemKind k, const std::vector<Matrix>& blocks) {
  std::vector<Matrix> t;
  t.reserve(blocks.size());
  for (const auto& b : blocks) t.push_back(b.transpose());
  return hcat_fields(k, t).transpose();
}

Matrix block_diag_fields(SystemKind k, const Matrix& a, const Matrix& b) {
  const Matrix za = Matrix::Zero(a.rows(), b.cols());
  const Matrix zb = Matrix::Zero(b.rows(), a.cols());
  return vcat_fields(k, {hcat_fields(k, {a, za}), hcat_fields(k, {zb, b})});
}

Matrix field_cols(SystemKind k, const Matrix& m, Index first, Index count) {
  if (k == SystemKind::annihilation) {
    if (first < 0 || count < 0 || first + count > m.cols()) {
      throw DimensionError("field column range out of bounds");
    }
    return m.middleCols(first, count);
  }
  require_even(m.cols(), "column count");
  const Index half = m.cols() / 2;
  if (first < 0 || count < 0 || first + count > half) {
    throw DimensionError("field column range out of bounds");
  }
  Matrix out(m.rows(), 2 * count);
  out << m.middleCols(first, count), m.middleCols(half + first, count);
  return out;
}

Matrix field_rows(SystemKind k, const Matrix& m, Index first, Index count) {
  return field_cols(k, m.transpose(), first, count).transpose();
}

Matrix field_identity(SystemKind k, Index count) {
  const Index d = multiplicity(k) * count;
  return Matrix::Identity(d, d);
}

Matrix field_zero(SystemKind k, Index rows, Index cols) {
  return Matrix::Zero(multiplicity(k) * rows, multiplicity(k) * cols);
}

Matrix field_sign(SystemKind k, Index count) {
  return k == SystemKind::general ? signature_j(count)
                                  : Matrix::Identity(count, count);
}

}  // namespace qcfb
