#include "schur.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qcfb::detail {

SchurForm complex_schur(const Matrix& a) {
  if (a.rows() == 0) return {Matrix(0, 0), Matrix(0, 0)};
  Eigen::ComplexSchur<Matrix> schur(a, true);
  if (schur.info() != Eigen::Success) {
    throw Error("complex Schur decomposition did not converge");
  }
  return {schur.matrixT(), schur.matrixU()};
}

namespace {

// Exchanges the diagonal entries k and k + 1 of the triangular factor.
void swap_adjacent(SchurForm& f, Index k) {
  const Complex t11 = f.t(k, k);
  const Complex t22 = f.t(k + 1, k + 1);
  const Complex t12 = f.t(k, k + 1);
  // Eigenvector of the 2x2 block for t22 becomes the new leading direction.
  const Complex x1 = t12;
  const Complex x2 = t22 - t11;
  const double r = std::hypot(std::abs(x1), std::abs(x2));
  if (r == 0.0) return;
  Eigen::Matrix2cd g;
  g << x1 / r, -std::conj(x2) / r, x2 / r, std::conj(x1) / r;

  f.t.middleCols(k, 2) = (f.t.middleCols(k, 2) * g).eval();
  f.t.middleRows(k, 2) = (g.adjoint() * f.t.middleRows(k, 2)).eval();
  f.u.middleCols(k, 2) = (f.u.middleCols(k, 2) * g).eval();
  f.t(k + 1, k) = Complex(0.0, 0.0);
  f.t(k, k) = t22;
  f.t(k + 1, k + 1) = t11;
}

}  // namespace

void reorder_schur(SchurForm& form, std::vector<bool> select) {
  const Index n = form.t.rows();
  Index target = 0;
  for (Index j = 0; j < n; ++j) {
    if (!select[static_cast<std::size_t>(j)]) continue;
    for (Index k = j - 1; k >= target; --k) {
      swap_adjacent(form, k);
      std::swap(select[static_cast<std::size_t>(k)],
                select[static_cast<std::size_t>(k + 1)]);
    }
    ++target;
  }
}

}  // namespace qcfb::detail
