#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qcfb::testing {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = r > 0 ? static_cast<Index>(rows.begin()->size()) : 0;
  Matrix m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

double Gen::real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }

int Gen::integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }

Matrix Gen::complex(Index rows, Index cols) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(nd(eng_), nd(eng_));
  }
  return m;
}

Matrix Gen::hermitian(Index n) {
  const Matrix x = complex(n, n);
  return 0.5 * (x + x.adjoint());
}

Matrix Gen::positive_definite(Index n, double floor) {
  const Matrix r = complex(n, n);
  return r * r.adjoint() / static_cast<double>(std::max<Index>(1, n)) +
         floor * Matrix::Identity(n, n);
}

Matrix Gen::doubled(Index half_rows, Index half_cols) {
  const Matrix a1 = complex(half_rows, half_cols);
  const Matrix a2 = complex(half_rows, half_cols);
  Matrix m(2 * half_rows, 2 * half_cols);
  m << a1, a2, a2.conjugate(), a1.conjugate();
  return m;
}

Matrix Gen::doubled_hermitian(Index half) {
  const Matrix a1 = hermitian(half);
  const Matrix s = complex(half, half);
  const Matrix a2 = 0.5 * (s + s.transpose());
  Matrix m(2 * half, 2 * half);
  m << a1, a2, a2.conjugate(), a1.conjugate();
  return m;
}

Matrix Gen::commutation(Index half) {
  for (;;) {
    const Matrix t1 = Matrix::Identity(half, half) + 0.3 * complex(half, half);
    const Matrix t2 = 0.3 * complex(half, half);
    Matrix t(2 * half, 2 * half);
    t << t1, t2, t2.conjugate(), t1.conjugate();
    Eigen::JacobiSVD<Matrix> svd(t);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) < 0.05 * s(0)) continue;
    Matrix j = Matrix::Identity(2 * half, 2 * half);
    j.bottomRightCorner(half, half) *= -1.0;
    const Matrix theta = t * j * t.adjoint();
    return 0.5 * (theta + theta.adjoint());
  }
}

Matrix Gen::stable(Index n) {
  const Matrix a = complex(n, n);
  Eigen::ComplexEigenSolver<Matrix> es(a, false);
  const double abscissa = es.eigenvalues().real().maxCoeff();
  return a - Complex(abscissa + real(0.1, 1.1), 0.0) * Matrix::Identity(n, n);
}

Matrix kron_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  const Index n = a.rows();
  const Index m = b.rows();
  Matrix big = Matrix::Zero(n * m, n * m);
  for (Index j = 0; j < m; ++j) {
    big.block(j * n, j * n, n, n) += a;
    for (Index k = 0; k < m; ++k) {
      big.block(j * n, k * n, n, n) += b(k, j) * Matrix::Identity(n, n);
    }
  }
  Vector rhs(n * m);
  for (Index j = 0; j < m; ++j) rhs.segment(j * n, n) = -c.col(j);
  const Vector x = big.fullPivLu().solve(rhs);
  Matrix out(n, m);
  for (Index j = 0; j < m; ++j) out.col(j) = x.segment(j * n, n);
  return out;
}

Matrix dense_eval(const StateSpaceTF& g, Complex s) {
  const Index n = g.states();
  if (n == 0) return g.d;
  const Matrix resolvent = (s * Matrix::Identity(n, n) - g.a).partialPivLu().solve(g.b);
  return g.c * resolvent + g.d;
}

namespace {

double sigma_max(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

}  // namespace

double h2_by_quadrature(const StateSpaceTF& g) {
  using boost::math::quadrature::gauss_kronrod;
  constexpr double w_max = 1e6;
  const double edge = std::atan(w_max);
  auto f = [&](double theta) {
    const double w = std::tan(theta);
    const double sec = 1.0 / std::cos(theta);
    return dense_eval(g, Complex(0.0, w)).squaredNorm() * sec * sec;
  };
  Eigen::ComplexEigenSolver<Matrix> es(g.a, false);
  std::vector<double> cuts{-edge, edge, 0.0};
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double w = es.eigenvalues()(i).imag();
    if (std::abs(w) < w_max) cuts.push_back(std::atan(w));
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] < 1e-14) continue;
    total += gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 15, 1e-10);
  }
  total += 2.0 * (g.c * g.b).squaredNorm() / w_max;
  return std::sqrt(total / (2.0 * std::numbers::pi));
}

double h2_by_impulse_energy(const StateSpaceTF& g) {
  const Index n = g.states();
  if (n == 0) return 0.0;
  Eigen::ComplexEigenSolver<Matrix> es(g.a, false);
  const double rho = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  const double decay = -es.eigenvalues().real().maxCoeff();
  const double h = 0.05 / rho;
  auto steps = static_cast<long>(std::ceil(60.0 / decay / h));
  if (steps % 2 == 1) ++steps;
  double total = 0.0;
  for (Index j = 0; j < g.inputs(); ++j) {
    Vector x = g.b.col(j);
    std::vector<double> e;
    e.reserve(static_cast<std::size_t>(steps + 1));
    e.push_back((g.c * x).squaredNorm());
    for (long k = 0; k < steps; ++k) {
      const Vector k1 = g.a * x;
      const Vector k2 = g.a * (x + 0.5 * h * k1);
      const Vector k3 = g.a * (x + 0.5 * h * k2);
      const Vector k4 = g.a * (x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      e.push_back((g.c * x).squaredNorm());
    }
    double s = e.front() + e.back();
    for (std::size_t k = 1; k + 1 < e.size(); ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * e[k];
    total += s * h / 3.0;
  }
  return std::sqrt(total);
}

double hinf_by_sampling(const StateSpaceTF& g) {
  auto sigma = [&](double w) { return sigma_max(dense_eval(g, Complex(0.0, w))); };
  Eigen::ComplexEigenSolver<Matrix> es(g.a, false);
  const double rho = g.states() > 0 ? std::max(1e-3, es.eigenvalues().cwiseAbs().maxCoeff()) : 1.0;
  std::vector<double> grid{0.0};
  constexpr int points = 3000;
  for (int i = 0; i < points; ++i) {
    const double w = rho * std::pow(10.0, -4.0 + 8.0 * i / (points - 1));
    grid.push_back(w);
    grid.push_back(-w);
  }
  for (Index i = 0; i < es.eigenvalues().size(); ++i) grid.push_back(es.eigenvalues()(i).imag());
  std::sort(grid.begin(), grid.end());
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = sigma(grid[i]);
  double best = std::max(sigma_max(g.d), *std::max_element(vals.begin(), vals.end()));
  // Refine the largest local maxima on their brackets.
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    if (vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1]) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
  if (peaks.size() > 8) peaks.resize(8);
  for (std::size_t i : peaks) {
    double lo = grid[i - 1];
    double hi = grid[i + 1];
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = sigma(x1);
    double f2 = sigma(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
      if (f1 > f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = sigma(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = sigma(x2);
      }
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

ConverseSystem converse_pr(SystemKind kind, Index modes, Index fields, std::uint64_t seed) {
  Gen gen(seed);
  for (;;) {
    Matrix x, c, j, s;
    if (kind == SystemKind::annihilation) {
      x = gen.positive_definite(modes);
      c = gen.complex(fields, modes);
      j = Matrix::Identity(fields, fields);
      s = Complex(0.0, 1.0) * gen.hermitian(modes);
    } else {
      x = gen.commutation(modes);
      c = gen.doubled(fields, modes);
      j = Matrix::Identity(2 * fields, 2 * fields);
      j.bottomRightCorner(fields, fields) *= -1.0;
      s = Complex(0.0, 1.0) * gen.doubled_hermitian(modes);
    }
    const Matrix b = -x * c.adjoint() * j;
    const Matrix a = (s - 0.5 * b * j * b.adjoint()) * x.inverse();
    if (kind == SystemKind::annihilation) {
      Eigen::ComplexEigenSolver<Matrix> es(a, false);
      if (es.eigenvalues().real().maxCoeff() > -1e-3) continue;
    }
    return {StateSpaceTF(a, b, c, Matrix::Identity(j.rows(), j.cols())), x};
  }
}

RealizabilityResiduals pr_equations(SystemKind kind, const Matrix& f, const Matrix& g, const Matrix& h,
                          const Matrix& k, const Matrix& theta) {
  const Index m = k.rows();
  Matrix j = Matrix::Identity(m, m);
  if (kind == SystemKind::general) j.bottomRightCorner(m / 2, m / 2) *= -1.0;
  const Matrix gjg = g * j * g.adjoint();
  RealizabilityResiduals r;
  r.lyapunov = (f * theta + theta * f.adjoint() + gjg).cwiseAbs().maxCoeff() /
               (1.0 + gjg.cwiseAbs().maxCoeff());
  r.coupling = (g + theta * h.adjoint() * j).cwiseAbs().maxCoeff() /
               (1.0 + g.cwiseAbs().maxCoeff());
  r.feedthrough = (k - Matrix::Identity(m, m)).cwiseAbs().maxCoeff();
  return r;
}

}  // namespace qcfb::testing
