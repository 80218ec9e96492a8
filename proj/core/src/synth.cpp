#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qcfb/feedback.hpp"
#include "qcfb/random.hpp"

namespace qcfb {

namespace {

std::string short_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Orthonormal basis for the column span of a.
Matrix range_basis(const Matrix& a, double rel) {
  if (a.cols() == 0 || a.rows() == 0) return Matrix(a.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Index r = 0;
  const double cut = rel * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

Matrix krylov(const Matrix& a, const Matrix& b) {
  const Index n = a.rows();
  Matrix out(n, n * b.cols());
  Matrix block = b;
  const double scale = 1.0 / std::max(1.0, max_abs(a));
  for (Index i = 0; i < n; ++i) {
    out.middleCols(i * b.cols(), b.cols()) = block;
    block = scale * a * block;
  }
  return out;
}

double min_eig(const Matrix& h) {
  if (h.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// PD solution of F X + X F^† + X R X + Q = 0 with the largest smallest eigenvalue.
std::optional<Matrix> best_pd_solution(const Matrix& f, const Matrix& r, const Matrix& q,
                                       const Tolerances& tol) {
  std::optional<Matrix> best;
  double best_min = 0.0;
  for (const CareSolution& s : care_hermitian_solutions(f, r, q, tol)) {
    const double m = min_eig(s.x);
    if (m > tol.rank * std::max(1.0, max_abs(s.x)) && m > best_min) {
      best = s.x;
      best_min = m;
    }
  }
  return best;
}

PrVerdict verify_augmented(SystemKind kind, const ControllerModel& c, const Matrix& theta,
                           const Tolerances& tol) {
  const Matrix g_aug = hcat_fields(kind, {c.g_cw, c.g_cy});
  const Index fields = g_aug.cols() / multiplicity(kind);
  const Matrix h_aug =
      -field_sign(kind, fields) * g_aug.adjoint() * theta.fullPivLu().inverse();
  const QuantumSystem sys(kind, c.f_c, g_aug, h_aug, field_identity(kind, fields), tol);
  PrVerdict v = verify_pr_certificate(sys, theta, tol);
  const double rows = max_abs(field_rows(kind, h_aug, 0, c.output_fields()) - c.h_c) /
                      (1.0 + max_abs(c.h_c));
  if (v.realizable() && rows > tol.residual) {
    v.status = PrStatus::not_realizable;
    v.failure = PrFailure::coupling;
    v.detail = "augmented output rows differ from H_c";
  }
  return v;
}

void check_triple(const Matrix& f_c, const Matrix& g_cy, const Matrix& h_c) {
  if (f_c.rows() != f_c.cols()) throw DimensionError("F_c must be square");
  if (g_cy.rows() != f_c.rows()) throw DimensionError("G_cy rows must match F_c");
  if (h_c.cols() != f_c.rows()) throw DimensionError("H_c columns must match F_c");
  require_finite(f_c, "F_c");
  require_finite(g_cy, "G_cy");
  require_finite(h_c, "H_c");
}

}  // namespace

NoiseSynthesis synth_noise_annihilation(const Matrix& f_c, const Matrix& g_cy,
                                        const Matrix& h_c, const SynthOptions& opts,
                                        const Tolerances& tol) {
  check_triple(f_c, g_cy, h_c);
  const Index n = f_c.rows();
  const Index m_u = h_c.rows();
  const Index m_y = g_cy.cols();
  constexpr SystemKind kind = SystemKind::annihilation;

  NoiseSynthesis out;
  if (n == 0) {
    out.controller = ControllerModel::trivial(kind, m_u, m_y);
    out.theta = Matrix(0, 0);
    out.zero_extra_noise = true;
    out.verdict.status = PrStatus::realizable;
    out.verdict.theta = out.theta;
    out.note = "static controller";
    return out;
  }

  if (!is_hurwitz(f_c, tol.singular)) {
    const double a = spectral_abscissa(f_c);
    throw NotRealizableError("F_c is not Hurwitz (spectral abscissa " + short_number(a) + ")",
                             "hurwitz", a);
  }
  const double gamma =
      hinf_norm(StateSpaceTF(f_c, Matrix::Identity(n, n), h_c, Matrix::Zero(m_u, n)),
                opts.rel_tol, tol)
          .value;
  out.admissibility_norm = gamma;
  if (opts.hinf_gate && gamma > 1.0 + opts.rel_tol) {
    throw NotRealizableError("H∞ admissibility failed: " + short_number(gamma) + " > 1",
                             "hinf", gamma);
  }

  const Matrix r = h_c.adjoint() * h_c;
  const Matrix q = g_cy * g_cy.adjoint();
  Matrix theta;
  Matrix extra(n, 0);
  if (auto x = best_pd_solution(f_c, r, q, tol)) {
    theta = *x;
    out.zero_extra_noise = true;
  } else {
    // Add noise outside the subspace already excited by G_cy or seen by H_c,
    // then on every mode.
    const Matrix kc = krylov(f_c, g_cy);
    const Matrix ko = krylov(f_c.adjoint(), h_c.adjoint());
    Matrix both(n, kc.cols() + ko.cols());
    both << kc, ko;
    const Matrix span = range_basis(both, 1e-8);
    std::vector<Matrix> shapes;
    const Matrix proj = Matrix::Identity(n, n) - span * span.adjoint();
    if (max_abs(proj) > 1e-8) shapes.push_back(proj);
    shapes.push_back(Matrix::Identity(n, n));
    const double scale = 1.0 + max_abs(q) + max_abs(f_c);
    for (const Matrix& shape : shapes) {
      for (double eps : {1e-2, 1e-1, 1.0, 10.0}) {
        auto x = best_pd_solution(f_c, r, q + eps * scale * shape, tol);
        if (!x) continue;
        theta = *x;
        const Matrix m = f_c * theta + theta * f_c.adjoint() + theta * r * theta + q;
        extra = psd_split(m, tol).negative_factor;
        break;
      }
      if (theta.size() != 0) break;
    }
    if (theta.size() == 0) {
      // Θ^{-1} would satisfy the bounded-real equation of (F_c, G_cy, H_c).
      std::string why;
      if (m_y > 0 && m_u > 0) {
        const double through =
            hinf_norm(StateSpaceTF(f_c, g_cy, h_c, Matrix::Zero(m_u, m_y)), opts.rel_tol, tol).value;
        why = " (‖H_c(sI − F_c)⁻¹G_cy‖∞ = " + short_number(through) + ")";
      }
      throw DesignError("no positive definite commutation matrix found" + why);
    }
    out.note = "zero-noise Riccati has no positive definite solution";
  }

  const Index r_extra = extra.cols();
  ControllerModel& c = out.controller;
  c.kind = kind;
  c.f_c = f_c;
  c.g_cw = Matrix(n, m_u + r_extra);
  c.g_cw << -theta * h_c.adjoint(), extra;
  c.g_cy = g_cy;
  c.h_c = h_c;
  c.k_cw = Matrix::Zero(m_u, m_u + r_extra);
  c.k_cw.leftCols(m_u).setIdentity();
  c.k_cy = Matrix::Zero(m_u, m_y);
  out.theta = theta;
  out.extra_noise_channels = r_extra;
  out.verdict = verify_augmented(kind, c, theta, tol);
  return out;
}

NoiseSynthesis synth_noise_general(const Matrix& f_c, const Matrix& g_cy, const Matrix& h_c,
                                   const Matrix& theta, const Tolerances& tol) {
  check_triple(f_c, g_cy, h_c);
  constexpr SystemKind kind = SystemKind::general;
  if (f_c.rows() % 2 != 0 || g_cy.cols() % 2 != 0 || h_c.rows() % 2 != 0) {
    throw DimensionError("general-kind triple must have even dimensions");
  }
  const Index n = f_c.rows() / 2;
  const Index m_u = h_c.rows() / 2;
  const Index m_y = g_cy.cols() / 2;
  for (const auto& [mat, name] : {std::pair{&f_c, "F_c"}, {&g_cy, "G_cy"}, {&h_c, "H_c"}}) {
    if (mat->size() > 0 && !is_doubled(*mat, tol.structure * std::max(1.0, max_abs(*mat))).ok) {
      throw DomainError(std::string(name) + " is not doubled-up");
    }
  }
  if (theta.rows() != 2 * n || theta.cols() != 2 * n) {
    throw DimensionError("Θ must match F_c");
  }
  require_finite(theta, "Θ");
  if (hermitian_deviation(theta) > tol.structure * std::max(1.0, max_abs(theta))) {
    throw DomainError("Θ is not Hermitian");
  }
  const Inertia in = inertia(theta, tol.rank);
  if (in.positive != n || in.negative != n) {
    throw DomainError("Θ must have inertia (n, n) and be invertible");
  }

  const Matrix h1 = h_c.topRows(m_u);
  const Matrix h2 = h_c.bottomRows(m_u);
  const Matrix g1 = g_cy.leftCols(m_y);
  const Matrix g2 = g_cy.rightCols(m_y);
  const Matrix m = hermitian_part(f_c * theta + theta * f_c.adjoint() -
                                  theta * (h2.adjoint() * h2 - h1.adjoint() * h1) * theta +
                                  g1 * g1.adjoint() - g2 * g2.adjoint());
  const PsdSplit split = psd_split(m, tol);
  const Matrix w1b = split.negative_factor;
  const Matrix w2b = exchange_sigma(n) * w1b.conjugate();
  const Index r_extra = w1b.cols();

  const Matrix w1a = -theta * h1.adjoint();
  const Matrix w2a = theta * h2.adjoint();
  Matrix a_block(2 * n, 2 * m_u);
  a_block << w1a, w2a;
  Matrix b_block(2 * n, 2 * r_extra);
  b_block << w1b, w2b;

  NoiseSynthesis out;
  ControllerModel& c = out.controller;
  c.kind = kind;
  c.f_c = f_c;
  c.g_cw = hcat_fields(kind, {a_block, b_block});
  c.g_cy = g_cy;
  c.h_c = h_c;
  c.k_cw = hcat_fields(kind, {field_identity(kind, m_u), field_zero(kind, m_u, r_extra)});
  c.k_cy = field_zero(kind, m_u, m_y);
  out.theta = theta;
  out.extra_noise_channels = r_extra;
  out.zero_extra_noise = max_abs(m) <= tol.residual * (1.0 + max_abs(f_c) * max_abs(theta));
  out.verdict = verify_augmented(kind, c, theta, tol);
  return out;
}

Matrix random_commutation_matrix(Index modes, std::uint64_t seed) {
  MatrixSampler rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const Matrix t1 = Matrix::Identity(modes, modes) + 0.5 * rng.gaussian(modes, modes);
    const Matrix t2 = 0.5 * rng.gaussian(modes, modes);
    const Matrix t = delta_build(t1, t2).matrix();
    if (modes > 0 && min_singular_value(t) < 1e-2 * max_singular_value(t)) continue;
    return hermitian_part(t * signature_j(modes) * t.adjoint());
  }
  throw GenerationError("could not draw a well-conditioned commutation matrix");
}

PlantModel random_pr_plant(Index n, Index m_w, Index m_u, std::uint64_t seed,
                           Index cost_rows, Index selector_rows) {
  if (selector_rows > m_w + m_u) throw DimensionError("selector has too many rows");
  RandomSystemOptions opts;
  opts.hurwitz_required = true;
  const RandomPrSystem base =
      random_pr_system(n, m_w + m_u, seed, SystemKind::annihilation, opts);
  const QuantumSystem& s = base.system;
  PlantModel p;
  p.kind = SystemKind::annihilation;
  p.f = s.f();
  p.g_w = s.g().leftCols(m_w);
  p.g_u = s.g().rightCols(m_u);
  p.h = s.h().topRows(m_w);
  p.k = Matrix::Identity(m_w, m_w);
  MatrixSampler rng(seed ^ 0x9e3779b97f4a7c15ULL);
  if (cost_rows > 0) {
    p.cost = CostOutput{rng.gaussian(cost_rows, n), Matrix::Zero(cost_rows, m_u), Matrix()};
  }
  if (selector_rows > 0) {
    std::vector<Index> idx(static_cast<std::size_t>(m_w + m_u));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Index>(i);
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    Matrix l = Matrix::Zero(selector_rows, m_w + m_u);
    for (Index i = 0; i < selector_rows; ++i) l(i, idx[static_cast<std::size_t>(i)]) = 1.0;
    p.selector = l;
  }
  return p;
}

ControllerModel random_pr_controller(Index m_u, Index m_y, std::uint64_t seed,
                                     Index max_modes) {
  MatrixSampler rng(seed);
  for (int attempt = 0; attempt < 16; ++attempt) {
    const Index n = rng.uniform_int(1, static_cast<int>(std::max<Index>(1, max_modes)));
    Matrix f = rng.gaussian(n, n);
    f -= Complex(spectral_abscissa(f) + rng.uniform(0.3, 1.3), 0.0) *
         Matrix::Identity(n, n);
    Matrix h = rng.gaussian(m_u, n);
    const Matrix g = rng.uniform(0.2, 1.0) * rng.gaussian(n, m_y);
    if (m_u > 0) {
      const double gamma =
          hinf_norm(StateSpaceTF(f, Matrix::Identity(n, n), h, Matrix::Zero(m_u, n))).value;
      if (!(gamma > 0.0) || !std::isfinite(gamma)) continue;
      h *= rng.uniform(0.3, 0.95) / gamma;
    }
    try {
      NoiseSynthesis s = synth_noise_annihilation(f, g, h);
      if (s.verdict.realizable()) return s.controller;
    } catch (const Error&) {
    }
  }
  throw GenerationError("could not draw an admissible controller");
}

}  // namespace qcfb
