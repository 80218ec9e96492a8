#include "qcfb/qsys.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "qcfb/random.hpp"

namespace qcfb {

Matrix MatrixSampler::gaussian(Index rows, Index cols) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = nd(engine_);
      const double im = nd(engine_);
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

Matrix MatrixSampler::hermitian(Index n) { return hermitian_part(gaussian(n, n)); }

Matrix MatrixSampler::symmetric(Index n) {
  const Matrix a = gaussian(n, n);
  return (a + a.transpose()) * 0.5;
}

Matrix MatrixSampler::unitary(Index n) {
  const Matrix a = gaussian(n, n);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    const double mag = std::abs(r(i, i));
    if (mag > 0.0) q.col(i) *= r(i, i) / mag;
  }
  return q;
}

double MatrixSampler::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> ud(lo, hi);
  return ud(engine_);
}

int MatrixSampler::uniform_int(int lo, int hi) {
  std::uniform_int_distribution<int> ud(lo, hi);
  return ud(engine_);
}

Index HamiltonianCoupling::modes() const {
  return theta.rows() / multiplicity(kind);
}

Index HamiltonianCoupling::fields() const {
  return coupling.rows() / multiplicity(kind);
}

namespace {

double rel_scale(const Matrix& a) { return std::max(1.0, max_abs(a)); }

void require_hermitian(const Matrix& a, const char* what, const Tolerances& tol) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(what) + " must be square");
  }
  if (hermitian_deviation(a) > tol.structure * rel_scale(a)) {
    throw DomainError(std::string(what) + " is not Hermitian");
  }
}

void require_doubled(const Matrix& a, const char* what, const Tolerances& tol) {
  if (a.rows() % 2 != 0 || a.cols() % 2 != 0) {
    throw DimensionError(std::string(what) + " must have even dimensions");
  }
  const StructureCheck c = is_doubled(a, tol.structure * rel_scale(a));
  if (!c.ok) {
    throw DomainError(std::string(what) + " is not doubled-up (deviation " +
                      std::to_string(c.deviation) + ")");
  }
}

// Θ = T J T^† with T doubled-up satisfies Σ conj(Θ) Σ = -Θ.
double commutation_structure_deviation(const Matrix& theta) {
  const Index n = theta.rows() / 2;
  const Matrix s = exchange_sigma(n);
  return max_abs(s * theta.conjugate() * s + theta);
}

bool commutation_ok(SystemKind kind, const Matrix& theta, const Tolerances& tol,
                    std::string* why) {
  const Index d = theta.rows();
  if (d == 0) return true;
  const Inertia in = inertia(theta, tol.rank);
  if (kind == SystemKind::annihilation) {
    if (in.positive != d) {
      if (why) *why = "commutation matrix is not positive definite";
      return false;
    }
    return true;
  }
  if (in.positive != d / 2 || in.negative != d / 2) {
    if (why) {
      *why = "commutation matrix inertia (" + std::to_string(in.positive) + "," +
             std::to_string(in.negative) + ") differs from (" +
             std::to_string(d / 2) + "," + std::to_string(d / 2) + ")";
    }
    return false;
  }
  return true;
}

}  // namespace

void HamiltonianCoupling::validate(const Tolerances& tol) const {
  require_finite(theta, "theta");
  require_finite(hamiltonian, "M");
  require_finite(coupling, "N");
  require_hermitian(theta, "theta", tol);
  require_hermitian(hamiltonian, "M", tol);
  if (hamiltonian.rows() != theta.rows()) {
    throw DimensionError("M and theta must have the same size");
  }
  if (coupling.cols() != theta.rows()) {
    throw DimensionError("N must have one column per state");
  }
  std::string why;
  if (kind == SystemKind::general) {
    if (theta.rows() % 2 != 0) throw DimensionError("theta must have even size");
    require_doubled(hamiltonian, "M", tol);
    if (coupling.rows() % 2 != 0) throw DimensionError("N must have even rows");
    require_doubled(coupling, "N", tol);
    if (commutation_structure_deviation(theta) > tol.structure * rel_scale(theta)) {
      throw DomainError("theta is not of the form T J T^dagger");
    }
  }
  if (!commutation_ok(kind, theta, tol, &why)) throw DomainError(why);
}

QuantumSystem::QuantumSystem(SystemKind kind, Matrix f, Matrix g, Matrix h,
                             Matrix k, const Tolerances& tol)
    : kind_(kind), f_(std::move(f)), g_(std::move(g)), h_(std::move(h)),
      k_(std::move(k)) {
  const Index n = f_.rows();
  const Index m = k_.rows();
  if (f_.cols() != n || k_.cols() != m || g_.rows() != n || g_.cols() != m ||
      h_.rows() != m || h_.cols() != n) {
    throw DimensionError("system matrices have inconsistent shapes");
  }
  require_finite(f_, "F");
  require_finite(g_, "G");
  require_finite(h_, "H");
  require_finite(k_, "K");
  if (kind_ == SystemKind::general) {
    require_doubled(f_, "F", tol);
    require_doubled(g_, "G", tol);
    require_doubled(h_, "H", tol);
    require_doubled(k_, "K", tol);
  }
}

std::string_view to_string(PrStatus s) {
  switch (s) {
    case PrStatus::realizable:
      return "realizable";
    case PrStatus::not_realizable:
      return "not_realizable";
    case PrStatus::indeterminate:
      return "indeterminate";
  }
  return "unknown";
}

std::string_view to_string(PrFailure f) {
  switch (f) {
    case PrFailure::none:
      return "none";
    case PrFailure::structure:
      return "structure";
    case PrFailure::feedthrough:
      return "feedthrough";
    case PrFailure::lyapunov:
      return "lyapunov";
    case PrFailure::coupling:
      return "coupling";
    case PrFailure::commutation:
      return "commutation";
  }
  return "unknown";
}

QuantumSystem realize_general(const HamiltonianCoupling& p, const Tolerances& tol) {
  if (p.kind != SystemKind::general) {
    throw DomainError("realize_general needs general-kind parameters");
  }
  p.validate(tol);
  const Complex i(0.0, 1.0);
  const Matrix j = signature_j(p.coupling.rows() / 2);
  const Matrix& th = p.theta;
  const Matrix& n = p.coupling;
  Matrix f = -i * th * p.hamiltonian - 0.5 * th * n.adjoint() * j * n;
  Matrix g = -th * n.adjoint() * j;
  return QuantumSystem(SystemKind::general, std::move(f), std::move(g), n,
                       Matrix::Identity(n.rows(), n.rows()), tol);
}

QuantumSystem realize_annihilation(const HamiltonianCoupling& p, const Tolerances& tol) {
  if (p.kind != SystemKind::annihilation) {
    throw DomainError("realize_annihilation needs annihilation-kind parameters");
  }
  p.validate(tol);
  const Complex i(0.0, 1.0);
  const Matrix& th = p.theta;
  const Matrix& n = p.coupling;
  Matrix f = th * (-i * p.hamiltonian - 0.5 * n.adjoint() * n);
  Matrix g = -th * n.adjoint();
  return QuantumSystem(SystemKind::annihilation, std::move(f), std::move(g), n,
                       Matrix::Identity(n.rows(), n.rows()), tol);
}

QuantumSystem realize(const HamiltonianCoupling& p, const Tolerances& tol) {
  return p.kind == SystemKind::general ? realize_general(p, tol)
                                       : realize_annihilation(p, tol);
}

bool eig_sum_condition(const Matrix& f, const Tolerances& tol) {
  if (f.rows() != f.cols()) throw DimensionError("F must be square");
  const Vector ev = eigenvalues(f);
  const double guard = tol.singular * std::max(1.0, max_abs(f));
  for (Index a = 0; a < ev.size(); ++a) {
    for (Index b = 0; b < ev.size(); ++b) {
      if (std::abs(ev(a) + std::conj(ev(b))) <= guard) return false;
    }
  }
  return true;
}

namespace {

struct Equations {
  SystemKind kind;
  Matrix f, g, h, k;
  Matrix jf;  // field signature
  Matrix q;   // G Jf G^†
};

void fill_residuals(const Equations& e, const Matrix& theta, PrResiduals& r) {
  r.lyapunov = max_abs(e.f * theta + theta * e.f.adjoint() + e.q) /
               (1.0 + max_abs(e.q));
  r.coupling = max_abs(e.g + theta * e.h.adjoint() * e.jf) / (1.0 + max_abs(e.g));
}

// Tags the first failing condition, or realizable.
void settle(const Equations& e, const Matrix& theta, PrVerdict& v,
            const Tolerances& tol) {
  if (v.residuals.feedthrough > tol.residual) {
    v.status = PrStatus::not_realizable;
    v.failure = PrFailure::feedthrough;
    v.detail = "feedthrough K differs from the identity";
    return;
  }
  if (v.residuals.lyapunov > tol.residual) {
    v.status = PrStatus::not_realizable;
    v.failure = PrFailure::lyapunov;
    v.detail = "no Hermitian solution of the Lyapunov equation";
    return;
  }
  if (v.residuals.coupling > tol.residual) {
    v.status = PrStatus::not_realizable;
    v.failure = PrFailure::coupling;
    v.detail = "coupling identity between G and H fails";
    return;
  }
  std::string why;
  if (!commutation_ok(e.kind, theta, tol, &why)) {
    v.status = PrStatus::not_realizable;
    v.failure = PrFailure::commutation;
    v.detail = why;
    return;
  }
  v.status = PrStatus::realizable;
  v.failure = PrFailure::none;
  v.theta = theta;
}

double min_eigenvalue(const Matrix& h) {
  if (h.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Searches the affine family x + span(basis) for a positive definite member.
std::optional<Matrix> sweep_positive(const Matrix& x, const std::vector<Matrix>& basis,
                                     const Tolerances& tol) {
  const std::size_t d = basis.size();
  const double box = 4.0 * (1.0 + max_abs(x));
  Matrix best = x;
  double best_val = min_eigenvalue(x);
  auto consider = [&](const Eigen::VectorXd& c) {
    Matrix t = x;
    for (std::size_t k = 0; k < d; ++k) t += c(static_cast<Index>(k)) * basis[k];
    const double v = min_eigenvalue(t);
    if (v > best_val) {
      best_val = v;
      best = t;
    }
  };
  if (d <= 2) {
    const int steps = 41;
    Eigen::VectorXd c(static_cast<Index>(d));
    const int total = d == 1 ? steps : steps * steps;
    for (int s = 0; s < total; ++s) {
      c(0) = -box + 2.0 * box * (s % steps) / (steps - 1);
      if (d == 2) c(1) = -box + 2.0 * box * (s / steps) / (steps - 1);
      consider(c);
    }
  } else {
    std::mt19937_64 eng(0x5eedu);
    std::uniform_real_distribution<double> ud(-box, box);
    Eigen::VectorXd c(static_cast<Index>(d));
    for (int s = 0; s < 4000; ++s) {
      for (Index k = 0; k < c.size(); ++k) c(k) = ud(eng);
      consider(c);
    }
  }
  const double cutoff = tol.rank * std::max(1.0, max_abs(best));
  if (best_val > cutoff) return best;
  return std::nullopt;
}

// Member of x + span(basis) closest to `target` in the Frobenius norm.
Matrix nearest_member(const Matrix& x, const std::vector<Matrix>& basis,
                      const Matrix& target) {
  const Index d = static_cast<Index>(basis.size());
  const Index s = x.size();
  Eigen::MatrixXd a(2 * s, d);
  for (Index k = 0; k < d; ++k) {
    const Matrix& z = basis[static_cast<std::size_t>(k)];
    for (Index i = 0; i < s; ++i) {
      a(i, k) = z.data()[i].real();
      a(s + i, k) = z.data()[i].imag();
    }
  }
  Eigen::VectorXd rhs(2 * s);
  const Matrix diff = target - x;
  for (Index i = 0; i < s; ++i) {
    rhs(i) = diff.data()[i].real();
    rhs(s + i) = diff.data()[i].imag();
  }
  const Eigen::VectorXd c = a.completeOrthogonalDecomposition().solve(rhs);
  Matrix out = x;
  for (Index k = 0; k < d; ++k) out += c(k) * basis[static_cast<std::size_t>(k)];
  return hermitian_part(out);
}

PrVerdict check_equations(const Equations& e, const Tolerances& tol) {
  PrVerdict v;
  const Index m = e.k.rows();
  v.residuals.feedthrough = max_abs(e.k - Matrix::Identity(m, m));

  if (eig_sum_condition(e.f, tol)) {
    const HermitianSolution sol = solve_lyapunov_hermitian(e.f, e.q, tol);
    fill_residuals(e, sol.x, v.residuals);
    settle(e, sol.x, v, tol);
    if (v.realizable() && sol.suspect) v.detail = "certificate flagged suspect (asymmetry)";
    return v;
  }

  const CoupledCertificate cert =
      solve_coupled_lyapunov(e.f, e.q, e.g, e.h, e.jf, tol);
  fill_residuals(e, cert.x, v.residuals);
  if (cert.status != CoupledCertificate::Status::family) {
    settle(e, cert.x, v, tol);
    if (cert.status == CoupledCertificate::Status::unique && v.detail.empty()) {
      v.detail = "certificate unique although the eigenvalue-sum condition fails";
    }
    return v;
  }
  const Matrix canonical = nearest_member(
      cert.x, cert.null_basis,
      e.kind == SystemKind::general ? signature_j(e.f.rows() / 2)
                                    : Matrix::Identity(e.f.rows(), e.f.rows()));
  fill_residuals(e, canonical, v.residuals);
  settle(e, canonical, v, tol);
  if (v.realizable()) {
    v.detail = "certificate not unique; member nearest the canonical "
               "commutation matrix accepted";
    return v;
  }
  if (v.failure != PrFailure::commutation) return v;

  if (e.kind == SystemKind::annihilation && e.f.rows() <= 2) {
    if (auto found = sweep_positive(cert.x, cert.null_basis, tol)) {
      fill_residuals(e, *found, v.residuals);
      v.detail.clear();
      settle(e, *found, v, tol);
      if (v.realizable()) {
        v.detail = "certificate not unique; found by null-space sweep";
        return v;
      }
    }
  }
  v.status = PrStatus::indeterminate;
  v.failure = PrFailure::commutation;
  v.theta.reset();
  v.detail = "eigenvalue-sum condition fails and no member of the certificate "
             "family was found with the required inertia";
  return v;
}

Equations make_equations(SystemKind kind, const Matrix& f, const Matrix& g,
                         const Matrix& h, const Matrix& k) {
  Equations e{kind, f, g, h, k, Matrix(), Matrix()};
  e.jf = field_sign(kind, k.rows() / multiplicity(kind));
  e.q = g * e.jf * g.adjoint();
  return e;
}

}  // namespace

PrVerdict check_pr_matrices(SystemKind kind, const Matrix& f, const Matrix& g,
                            const Matrix& h, const Matrix& k,
                            const Tolerances& tol) {
  const Index n = f.rows();
  const Index m = k.rows();
  if (f.cols() != n || k.cols() != m || g.rows() != n || g.cols() != m ||
      h.rows() != m || h.cols() != n) {
    throw DimensionError("system matrices have inconsistent shapes");
  }
  if (kind == SystemKind::general) {
    if (n % 2 != 0 || m % 2 != 0) {
      throw DimensionError("general-kind matrices must have even dimensions");
    }
    double dev = 0.0;
    bool ok = true;
    for (const Matrix* a : {&f, &g, &h, &k}) {
      const StructureCheck c = is_doubled(*a, tol.structure * rel_scale(*a));
      ok = ok && c.ok;
      dev = std::max(dev, c.deviation);
    }
    if (!ok) {
      PrVerdict v;
      v.failure = PrFailure::structure;
      v.residuals.feedthrough = max_abs(k - Matrix::Identity(m, m));
      v.residuals.lyapunov = std::numeric_limits<double>::infinity();
      v.residuals.coupling = std::numeric_limits<double>::infinity();
      v.detail = "matrices are not doubled-up (deviation " + std::to_string(dev) + ")";
      return v;
    }
  }
  return check_equations(make_equations(kind, f, g, h, k), tol);
}

PrVerdict check_pr(const QuantumSystem& s, const Tolerances& tol) {
  return check_equations(make_equations(s.kind(), s.f(), s.g(), s.h(), s.k()), tol);
}

PrVerdict check_pr_general(const QuantumSystem& s, const Tolerances& tol) {
  if (s.kind() != SystemKind::general) {
    throw DomainError("check_pr_general needs a general-kind system");
  }
  return check_pr(s, tol);
}

PrVerdict check_pr_annihilation(const QuantumSystem& s, const Tolerances& tol) {
  if (s.kind() != SystemKind::annihilation) {
    throw DomainError("check_pr_annihilation needs an annihilation-kind system");
  }
  return check_pr(s, tol);
}

PrVerdict verify_pr_certificate(const QuantumSystem& s, const Matrix& theta,
                                const Tolerances& tol) {
  if (theta.rows() != s.f().rows() || theta.cols() != s.f().cols()) {
    throw DimensionError("certificate has the wrong size");
  }
  const Equations e = make_equations(s.kind(), s.f(), s.g(), s.h(), s.k());
  PrVerdict v;
  v.residuals.feedthrough = max_abs(s.k() - Matrix::Identity(s.k().rows(), s.k().rows()));
  const Matrix th = hermitian_part(theta);
  fill_residuals(e, th, v.residuals);
  settle(e, th, v, tol);
  return v;
}

HamiltonianCoupling extract_params(const QuantumSystem& s, const Tolerances& tol) {
  PrVerdict v = check_pr(s, tol);
  if (!v.realizable()) {
    throw ExtractionError("system is not physically realizable: " + v.detail, v);
  }
  const Complex i(0.0, 1.0);
  HamiltonianCoupling p;
  p.kind = s.kind();
  p.theta = *v.theta;
  p.coupling = s.h();
  const Matrix jf = field_sign(s.kind(), s.fields());
  const Matrix theta_inv = p.theta.fullPivLu().inverse();
  Matrix m = i * theta_inv * s.f() + 0.5 * i * p.coupling.adjoint() * jf * p.coupling;
  const double asym = hermitian_deviation(m);
  if (asym > kSuspectAsymmetry * rel_scale(m)) {
    throw ExtractionError("recovered Hamiltonian is not Hermitian (deviation " +
                              std::to_string(asym) + ")",
                          v);
  }
  m = hermitian_part(m);
  if (s.kind() == SystemKind::general && m.rows() > 0) {
    const Index h = m.rows() / 2;
    const Matrix sig = exchange_sigma(h);
    m = 0.5 * (m + sig * m.conjugate() * sig);
    p.theta = 0.5 * (p.theta - sig * p.theta.conjugate() * sig);
  }
  p.hamiltonian = m;

  const QuantumSystem back = realize(p, tol);
  const double scale = 1.0 + max_abs(s.f()) + max_abs(s.g());
  const double dev = std::max({max_abs(back.f() - s.f()), max_abs(back.g() - s.g()),
                               max_abs(back.h() - s.h()), max_abs(back.k() - s.k())});
  if (dev > tol.residual * scale) {
    throw ExtractionError("re-substitution of the recovered parameters deviates by " +
                              std::to_string(dev),
                          v);
  }
  return p;
}

RandomPrSystem random_pr_system(Index n, Index m, std::uint64_t seed,
                                SystemKind kind, RandomSystemOptions opts) {
  if (n < 1 || m < 1) throw DomainError("random systems need n >= 1 and m >= 1");
  MatrixSampler rng(seed);
  const Tolerances tol;
  for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
    HamiltonianCoupling p;
    p.kind = kind;
    if (kind == SystemKind::general) {
      const Matrix t = delta_build(rng.gaussian(n, n), rng.gaussian(n, n)).matrix();
      p.hamiltonian = delta_build(rng.hermitian(n), rng.symmetric(n)).matrix();
      p.coupling = delta_build(rng.gaussian(m, n), rng.gaussian(m, n)).matrix();
      if (min_singular_value(t) < 1e-3 * max_singular_value(t)) continue;
      p.theta = hermitian_part(t * signature_j(n) * t.adjoint());
    } else {
      const Matrix t = rng.gaussian(n, n);
      p.hamiltonian = rng.hermitian(n);
      p.coupling = rng.gaussian(m, n);
      if (min_singular_value(t) < 1e-3 * max_singular_value(t)) continue;
      p.theta = hermitian_part(t * t.adjoint());
    }
    QuantumSystem s = realize(p, tol);
    if (!eig_sum_condition(s.f(), tol)) continue;
    if (opts.hurwitz_required && !is_hurwitz(s.f(), 1e-6)) continue;
    return {std::move(s), std::move(p), attempt};
  }
  throw GenerationError("random PR system generation exhausted " +
                        std::to_string(opts.max_attempts) + " attempts");
}

}  // namespace qcfb
