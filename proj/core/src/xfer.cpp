#include "qcfb/xfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/SVD>

#include "qcfb/qsys.hpp"
#include "schur.hpp"

namespace qcfb {

StateSpaceTF::StateSpaceTF(Matrix a_, Matrix b_, Matrix c_, Matrix d_)
    : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)) {
  const Index s = a.rows();
  if (a.cols() != s || b.rows() != s || c.cols() != s || c.rows() != d.rows() ||
      b.cols() != d.cols()) {
    throw DimensionError("state-space matrices have inconsistent shapes");
  }
  require_finite(a, "A");
  require_finite(b, "B");
  require_finite(c, "C");
  require_finite(d, "D");
}

std::string_view to_string(NormMethod m) {
  return m == NormMethod::bisection ? "bisection" : "lyapunov-gramian";
}

std::string_view to_string(ProngStatus s) {
  switch (s) {
    case ProngStatus::pass:
      return "pass";
    case ProngStatus::fail:
      return "fail";
    case ProngStatus::indeterminate:
      return "indeterminate";
  }
  return "unknown";
}

FrequencyResponse::FrequencyResponse(const StateSpaceTF& g, const Tolerances& tol)
    : d_(g.d) {
  const detail::SchurForm sf = detail::complex_schur(g.a);
  t_ = sf.t;
  if (g.states() > 0) {
    ub_ = sf.u.adjoint() * g.b;
    cu_ = g.c * sf.u;
  }
  double rho = 1.0;
  for (Index i = 0; i < t_.rows(); ++i) rho = std::max(rho, std::abs(t_(i, i)));
  guard_ = tol.singular * rho;
}

bool FrequencyResponse::near_pole(Complex s) const {
  for (Index i = 0; i < t_.rows(); ++i) {
    if (std::abs(s - t_(i, i)) <= guard_) return true;
  }
  return false;
}

Matrix FrequencyResponse::at(Complex s) const {
  if (t_.rows() == 0) return d_;
  for (Index i = 0; i < t_.rows(); ++i) {
    if (std::abs(s - t_(i, i)) <= guard_) {
      throw SingularityError("evaluation point is a pole of the transfer function",
                             s, t_(i, i));
    }
  }
  Matrix shifted = -t_;
  shifted.diagonal().array() += s;
  const Matrix y = shifted.triangularView<Eigen::Upper>().solve(ub_);
  return cu_ * y + d_;
}

Matrix tf_eval(const StateSpaceTF& g, Complex s, const Tolerances& tol) {
  return FrequencyResponse(g, tol).at(s);
}

namespace {

Matrix controllability_matrix(const Matrix& a, const Matrix& b) {
  const Index n = a.rows();
  const double alpha = std::max(1.0, max_abs(a));
  const Matrix as = a / alpha;
  Matrix k(n, n * b.cols());
  Matrix block = b;
  for (Index i = 0; i < n; ++i) {
    k.middleCols(i * b.cols(), b.cols()) = block;
    block = as * block;
  }
  return k;
}

// Orthonormal basis of the column space, rank by the relative cutoff.
Matrix range_basis(const Matrix& m, const Tolerances& tol) {
  if (m.size() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const Index r = rank_svd(m, tol.rank);
  return svd.matrixU().leftCols(r);
}

}  // namespace

bool is_minimal(const StateSpaceTF& g, const Tolerances& tol) {
  const Index n = g.states();
  if (n == 0) return true;
  const Matrix ctrb = controllability_matrix(g.a, g.b);
  const Matrix obsv = controllability_matrix(g.a.adjoint(), g.c.adjoint());
  return rank_svd(ctrb, tol.rank) == n && rank_svd(obsv, tol.rank) == n;
}

StateSpaceTF minimal_realization(const StateSpaceTF& g, const Tolerances& tol) {
  if (g.states() == 0) return g;
  const Matrix uc = range_basis(controllability_matrix(g.a, g.b), tol);
  const Matrix a1 = uc.adjoint() * g.a * uc;
  const Matrix b1 = uc.adjoint() * g.b;
  const Matrix c1 = g.c * uc;
  if (a1.rows() == 0) return StateSpaceTF(Matrix(0, 0), Matrix(0, g.inputs()),
                                          Matrix(g.outputs(), 0), g.d);
  const Matrix vo = range_basis(controllability_matrix(a1.adjoint(), c1.adjoint()), tol);
  return StateSpaceTF(vo.adjoint() * a1 * vo, vo.adjoint() * b1, c1 * vo, g.d);
}

std::vector<double> frequency_grid(const Matrix& a, std::uint64_t seed) {
  double scale = 1.0;
  if (a.rows() > 0) {
    const Vector ev = eigenvalues(a);
    scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  }
  std::vector<double> grid;
  grid.reserve(457);
  const int points = 200;
  for (int i = 0; i < points; ++i) {
    const double e = -3.0 + 6.0 * i / (points - 1);
    grid.push_back(scale * std::pow(10.0, e));
  }
  for (int i = 0; i < points; ++i) grid.push_back(-grid[static_cast<std::size_t>(i)]);
  grid.push_back(0.0);
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> expo(-3.0, 3.0);
  std::bernoulli_distribution sign(0.5);
  for (int i = 0; i < 56; ++i) {
    const double w = scale * std::pow(10.0, expo(eng));
    grid.push_back(sign(eng) ? w : -w);
  }
  return grid;
}

namespace {

// Largest ‖Γ(iω)^† W Γ(iω) - W‖, relative to 1 + ‖Γ‖², over the grid.
Prong sampled_prong(const StateSpaceTF& g, const Matrix& w_in, const Matrix& w_out,
                    const Tolerances& tol) {
  Prong p;
  const FrequencyResponse fr(g, tol);
  double worst = 0.0;
  double skipped = 0.0;
  const auto grid = frequency_grid(g.a);
  for (double om : grid) {
    const Complex s(0.0, om);
    if (fr.near_pole(s)) {
      skipped += 1.0;
      continue;
    }
    const Matrix gam = fr.at(s);
    const double mag = max_abs(gam);
    const double dev = max_abs(gam.adjoint() * w_out * gam - w_in) / (1.0 + mag * mag);
    worst = std::max(worst, dev);
  }
  p.residuals = {{"max_deviation", worst},
                 {"points", static_cast<double>(grid.size()) - skipped},
                 {"skipped_points", skipped}};
  p.status = worst <= kFrequencyTolerance ? ProngStatus::pass : ProngStatus::fail;
  if (!p.passed()) p.detail = "frequency response violates the identity on the grid";
  return p;
}

}  // namespace

TransferVerdict jj_unitary_check(const StateSpaceTF& g, Index half_io,
                                 const Tolerances& tol) {
  if (g.inputs() != 2 * half_io || g.outputs() != 2 * half_io) {
    throw DimensionError("(J,J)-unitary check needs 2*half_io inputs and outputs");
  }
  TransferVerdict v;
  v.reduced_states = g.states();
  v.stability.detail = "not part of this check";
  const Matrix j = signature_j(half_io);

  Prong& alg = v.algebraic;
  const double feed = max_abs(g.d.adjoint() * j * g.d - j);
  if (g.states() == 0) {
    alg.residuals = {{"feedthrough", feed}};
    alg.status = feed <= tol.residual ? ProngStatus::pass : ProngStatus::fail;
  } else if (!eig_sum_condition(g.a, tol)) {
    alg.residuals = {{"feedthrough", feed}};
    alg.status = ProngStatus::indeterminate;
    alg.detail = "eigenvalue-sum condition fails; certificate is not unique";
  } else {
    const HermitianSolution x =
        solve_lyapunov_hermitian(g.a, g.b * j * g.b.adjoint(), tol);
    const double coupling =
        max_abs(g.b + x.x * g.c.adjoint() * j) / (1.0 + max_abs(g.b));
    alg.residuals = {{"lyapunov", x.residual}, {"coupling", coupling}, {"feedthrough", feed}};
    const bool ok = x.residual <= tol.residual && coupling <= tol.residual &&
                    feed <= tol.residual;
    alg.status = ok ? ProngStatus::pass : ProngStatus::fail;
    v.certificate = x.x;
  }
  if (alg.status == ProngStatus::fail && alg.detail.empty()) {
    alg.detail = feed > tol.residual ? "feedthrough violates D^† J D = J"
                                     : "no certificate satisfies the coupling identity";
  }

  v.sampled = sampled_prong(g, j, j, tol);
  v.holds = v.algebraic.passed() && v.sampled.passed();
  return v;
}

TransferVerdict lossless_br_check(const StateSpaceTF& g_in, const Tolerances& tol) {
  TransferVerdict v;
  const StateSpaceTF g = minimal_realization(g_in, tol);
  v.reduced_states = g.states();

  const double abscissa = g.states() == 0 ? -std::numeric_limits<double>::infinity()
                                          : spectral_abscissa(g.a);
  v.stability.residuals = {{"spectral_abscissa", abscissa}};
  v.stability.status = abscissa < -tol.singular ? ProngStatus::pass : ProngStatus::fail;
  if (!v.stability.passed()) v.stability.detail = "transfer function has a pole off the open left half-plane";

  const Matrix eye = Matrix::Identity(g.inputs(), g.inputs());
  const double feed = max_abs(g.d.adjoint() * g.d - eye);
  Prong& alg = v.algebraic;
  if (g.states() == 0) {
    alg.residuals = {{"feedthrough", feed}};
    alg.status = feed <= tol.residual ? ProngStatus::pass : ProngStatus::fail;
  } else if (!v.stability.passed()) {
    alg.residuals = {{"feedthrough", feed}};
    alg.status = ProngStatus::indeterminate;
    alg.detail = "skipped: unstable realization";
  } else {
    const HermitianSolution x = solve_lyapunov_hermitian(g.a, g.b * g.b.adjoint(), tol);
    const double coupling = max_abs(g.b + x.x * g.c.adjoint()) / (1.0 + max_abs(g.b));
    const Inertia in = inertia(x.x, tol.rank);
    const bool positive = in.positive == g.states();
    alg.residuals = {{"lyapunov", x.residual},
                     {"coupling", coupling},
                     {"feedthrough", feed},
                     {"positive", positive ? 1.0 : 0.0}};
    const bool ok = x.residual <= tol.residual && coupling <= tol.residual &&
                    feed <= tol.residual && positive;
    alg.status = ok ? ProngStatus::pass : ProngStatus::fail;
    v.certificate = x.x;
    if (!ok) {
      alg.detail = feed > tol.residual ? "feedthrough violates D^† D = I"
                   : !positive         ? "certificate is not positive definite"
                                       : "no certificate satisfies the coupling identity";
    }
  }
  if (alg.status == ProngStatus::fail && alg.detail.empty()) {
    alg.detail = "feedthrough violates D^† D = I";
  }

  const Matrix eye_out = Matrix::Identity(g.outputs(), g.outputs());
  v.sampled = sampled_prong(g, eye, eye_out, tol);
  v.holds = v.stability.passed() && v.algebraic.passed() && v.sampled.passed();
  return v;
}

NormResult h2_norm(const StateSpaceTF& g, const Tolerances& tol) {
  if (max_abs(g.d) > tol.residual) {
    throw InfiniteNormError("H2 norm is infinite: feedthrough is nonzero");
  }
  NormResult r;
  r.method = NormMethod::lyapunov_gramian;
  if (g.states() == 0) return r;
  if (!is_hurwitz(g.a, tol.singular)) {
    throw InstabilityError("H2 norm needs a Hurwitz state matrix");
  }
  const HermitianSolution p = solve_lyapunov_hermitian(g.a, g.b * g.b.adjoint(), tol);
  const double tr = (g.c * p.x * g.c.adjoint()).trace().real();
  r.value = std::sqrt(std::max(0.0, tr));
  r.certificate = p.residual;
  return r;
}

namespace {

struct HinfProbe {
  const StateSpaceTF& g;
  const FrequencyResponse& fr;

  double sigma(double w) const { return max_singular_value(fr.at(Complex(0.0, w))); }

  // True when γ lies below the norm; `witness` then holds an attained gain.
  bool below_norm(double gamma, double sd, double& witness) const {
    const Index m = g.inputs();
    const Index p = g.outputs();
    const Index n = g.states();
    if (gamma <= sd) {
      witness = sd;
      return true;
    }
    const Matrix r = gamma * gamma * Matrix::Identity(m, m) - g.d.adjoint() * g.d;
    const Matrix r_inv = r.inverse();
    const Matrix ar = g.a + g.b * r_inv * g.d.adjoint() * g.c;
    Matrix h(2 * n, 2 * n);
    h << ar, g.b * r_inv * g.b.adjoint(),
        -g.c.adjoint() * (Matrix::Identity(p, p) + g.d * r_inv * g.d.adjoint()) * g.c,
        -ar.adjoint();
    const Vector ev = eigenvalues(h);
    const double loose = 1e-6 * std::max(1.0, max_abs(h));
    std::vector<double> freqs;
    for (Index i = 0; i < ev.size(); ++i) {
      if (std::abs(ev(i).real()) <= loose) freqs.push_back(ev(i).imag());
    }
    if (freqs.empty()) return false;
    std::sort(freqs.begin(), freqs.end());
    double best = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      best = std::max(best, sigma(freqs[i]));
      if (i + 1 < freqs.size()) best = std::max(best, sigma(0.5 * (freqs[i] + freqs[i + 1])));
    }
    witness = best;
    return best >= gamma;
  }
};

}  // namespace

NormResult hinf_norm(const StateSpaceTF& g, double rel_tol, const Tolerances& tol) {
  if (!(rel_tol > 0.0)) throw DomainError("relative tolerance must be positive");
  NormResult r;
  r.method = NormMethod::bisection;
  const double sd = max_singular_value(g.d);
  if (g.states() == 0 || max_abs(g.b) == 0.0 || max_abs(g.c) == 0.0) {
    r.value = sd;
    return r;
  }
  if (!is_hurwitz(g.a, tol.singular)) {
    throw InstabilityError("H-infinity norm needs a Hurwitz state matrix");
  }
  const FrequencyResponse fr(g, tol);
  const HinfProbe probe{g, fr};

  double lo = sd > 0.0 ? sd * (1.0 + 1e-9) : 0.0;
  lo = std::max(lo, probe.sigma(0.0));
  const Vector ev = eigenvalues(g.a);
  for (Index i = 0; i < ev.size(); ++i) {
    lo = std::max(lo, probe.sigma(ev(i).imag()));
    lo = std::max(lo, probe.sigma(std::abs(ev(i))));
    lo = std::max(lo, probe.sigma(-std::abs(ev(i))));
  }
  if (lo == 0.0) lo = std::numeric_limits<double>::min();

  double hi = 2.0 * lo;
  double witness = 0.0;
  int guard = 0;
  while (probe.below_norm(hi, sd, witness)) {
    lo = std::max(lo, witness);
    hi = 2.0 * std::max(hi, witness);
    if (++guard > 200) throw Error("H-infinity upper bound search did not terminate");
  }
  while (hi - lo > rel_tol * lo) {
    const double mid = 0.5 * (lo + hi);
    if (probe.below_norm(mid, sd, witness)) {
      lo = std::max(mid, std::min(witness, hi));
    } else {
      hi = mid;
    }
  }
  r.value = 0.5 * (lo + hi);
  r.certificate = hi - lo;
  return r;
}

}  // namespace qcfb
