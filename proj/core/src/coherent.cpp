#include "qcfb/coherent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "qcfb/random.hpp"

namespace qcfb {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

Matrix psd_sqrt(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
  const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

double min_eig(const Matrix& h) {
  if (h.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool detectable(const Matrix& a, const Matrix& c, const Tolerances& tol) {
  const Index n = a.rows();
  const Vector ev = eigenvalues(a);
  const double scale = std::max(1.0, max_abs(a) + max_abs(c));
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i).real() < -tol.singular) continue;
    Matrix pbh(n + c.rows(), n);
    pbh << ev(i) * Matrix::Identity(n, n) - a, c;
    if (min_singular_value(pbh) <= 1e-8 * scale) return false;
  }
  return true;
}

// Unused-output completion that ignores the control input.
AugmentedSystem augment_noise_only(const PlantModel& mp, const Tolerances& tol) {
  PlantModel q = mp;
  q.g_u = Matrix(mp.f.rows(), 0);
  q.cost.reset();
  q.selector.reset();
  return augment_plant(q, tol);
}

bool is_partial_permutation(const Matrix& l) {
  std::vector<bool> used(static_cast<std::size_t>(l.cols()), false);
  for (Index i = 0; i < l.rows(); ++i) {
    Index hits = 0;
    Index where = -1;
    for (Index j = 0; j < l.cols(); ++j) {
      if (l(i, j) == Complex(1.0, 0.0)) {
        ++hits;
        where = j;
      } else if (l(i, j) != Complex(0.0, 0.0)) {
        return false;
      }
    }
    if (hits != 1 || used[static_cast<std::size_t>(where)]) return false;
    used[static_cast<std::size_t>(where)] = true;
  }
  return true;
}

}  // namespace

KalmanResult kalman_design(const Matrix& f_a, const Matrix& g_a, const Matrix& h_a,
                           const Matrix& l_select, const Tolerances& tol) {
  const Index n = f_a.rows();
  if (f_a.cols() != n || g_a.rows() != n || h_a.cols() != n || h_a.rows() != g_a.cols() ||
      l_select.cols() != h_a.rows()) {
    throw DimensionError("kalman_design: inconsistent shapes");
  }
  const Matrix v = l_select * l_select.adjoint();
  if (v.rows() == 0 || min_singular_value(v) <= tol.singular * std::max(1.0, max_abs(v))) {
    throw DomainError("L L^† is singular");
  }
  const Matrix v_inv = v.inverse();
  const Matrix hy = l_select * h_a;
  const Matrix gy = g_a * l_select.adjoint();
  if (!detectable(f_a, hy, tol)) {
    throw DesignError("(F_a, L H_a) is not detectable");
  }

  const Matrix a = f_a - gy * v_inv * hy;
  const Matrix r = -hy.adjoint() * v_inv * hy;
  const Matrix q0 = hermitian_part(g_a * g_a.adjoint() - gy * v_inv * gy.adjoint());

  std::optional<Matrix> best;
  bool best_stabilizing = false;
  double best_abscissa = std::numeric_limits<double>::infinity();
  for (const CareSolution& s : care_hermitian_solutions(a, r, q0, tol)) {
    if (min_eig(s.x) < -1e-8 * std::max(1.0, max_abs(s.x))) continue;
    const double abscissa = n > 0 ? spectral_abscissa(a + s.x * r) : -1.0;
    const bool stabilizing = abscissa < 0.0;
    if (!best || (stabilizing && !best_stabilizing) ||
        (stabilizing == best_stabilizing && abscissa < best_abscissa)) {
      best = s.x;
      best_stabilizing = stabilizing;
      best_abscissa = abscissa;
    }
  }
  if (!best) throw DesignError("filter Riccati equation has no PSD solution");

  KalmanResult out;
  out.q = *best;
  const Matrix cross = g_a + out.q * h_a.adjoint();
  out.gain = cross * l_select.adjoint() * v_inv;
  const Matrix res = f_a * out.q + out.q * f_a.adjoint() + g_a * g_a.adjoint() -
                     cross * l_select.adjoint() * v_inv * l_select * cross.adjoint();
  out.riccati_residual =
      max_abs(res) / (1.0 + max_abs(g_a * g_a.adjoint()) + max_abs(f_a) * max_abs(out.q));
  out.gain_norm = out.gain.size() > 0 ? max_singular_value(out.gain) : 0.0;
  return out;
}

std::vector<StaticGain> zero_gain_family(Index m_u, Index m_y, std::uint64_t seed) {
  MatrixSampler rng(seed);
  std::vector<StaticGain> out;
  const Matrix k_cy = Matrix::Zero(m_u, m_y);
  out.push_back({Matrix::Identity(m_u, m_u), k_cy, "K_cw = I"});
  out.push_back({rng.unitary(m_u), k_cy, "K_cw unitary"});
  const Matrix u = rng.unitary(m_u + 1);
  out.push_back({u.topRows(m_u), k_cy, "K_cw co-isometry"});
  return out;
}

TheoremReport verify_zero_gain(const PlantModel& p, const Matrix& k_cy, const Matrix& k_cw,
                               const Tolerances& tol) {
  if (p.kind != SystemKind::annihilation) {
    throw DomainError("zero Kalman gain applies to annihilation-kind plants");
  }
  TheoremReport rep;
  rep.theorem = "C1";
  const ControllerModel c = ControllerModel::static_gain(p.kind, k_cw, k_cy);
  const ModifiedPair mod = modified_forms(p, c);
  std::optional<AugmentedSystem> maybe;
  try {
    maybe = augment_noise_only(mod.plant, tol);
  } catch (const NotAugmentableError& e) {
    rep.hypothesis_ok = false;
    constexpr double inf = std::numeric_limits<double>::infinity();
    rep.evidence = {{"gain_norm", inf}, {"covariance_deviation", inf}, {"riccati_residual", inf}};
    rep.evidence.insert(rep.evidence.end(), e.residuals().begin(), e.residuals().end());
    rep.narrative = std::string("modified plant is not augmentable: ") + e.what();
    return rep;
  }
  const AugmentedSystem& aug = *maybe;
  const QuantumSystem& s = aug.system;
  const Index m_y = p.output_fields();
  const Matrix l = Matrix::Identity(s.fields(), s.fields()).topRows(m_y);
  const KalmanResult kf = kalman_design(s.f(), s.g(), s.h(), l, tol);
  const double dev = max_abs(kf.q - aug.theta);
  rep.evidence = {{"gain_norm", kf.gain_norm},
                  {"covariance_deviation", dev},
                  {"riccati_residual", kf.riccati_residual}};
  rep.holds = kf.gain_norm <= 1e-8 && dev <= 1e-8;
  rep.narrative = rep.holds ? "zero Kalman gain with Q = Θ"
                            : "Kalman gain " + num(kf.gain_norm) + ", |Q - Θ| = " + num(dev);
  return rep;
}

NormResult lqg_cost(const ClosedLoop& cl, const Tolerances& tol) {
  if (!cl.internally_stable) throw InstabilityError("closed loop is not internally stable");
  return h2_norm(cl.system, tol);
}

std::vector<StaticGain> static_grid(Index m_u, Index m_y, std::uint64_t seed) {
  std::vector<StaticGain> out;
  auto complete = [&](const Matrix& k_cy, std::string label) {
    if (k_cy.size() > 0 && max_singular_value(k_cy) > 1.0 + 1e-12) return;
    const Matrix k_cw = psd_sqrt(Matrix::Identity(m_u, m_u) - k_cy * k_cy.adjoint());
    out.push_back({k_cw, k_cy, std::move(label)});
  };
  const Index dof = m_u * m_y;
  if (m_u <= 2 && m_y <= 2) {
    static constexpr double levels[] = {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
    Index total = 1;
    for (Index i = 0; i < dof; ++i) total *= 7;
    for (Index code = 0; code < total; ++code) {
      Matrix k = Matrix::Zero(m_u, m_y);
      Index rem = code;
      for (Index e = 0; e < dof; ++e) {
        k(e / m_y, e % m_y) = levels[rem % 7];
        rem /= 7;
      }
      complete(k, "grid " + std::to_string(code));
    }
  } else {
    MatrixSampler rng(seed);
    complete(Matrix::Zero(m_u, m_y), "K_cy = 0");
    for (int i = 0; i < 64; ++i) {
      Matrix k = rng.gaussian(m_u, m_y);
      k *= rng.uniform(0.0, 1.0) / max_singular_value(k);
      complete(k, "random " + std::to_string(i));
    }
  }
  return out;
}

std::vector<ControllerModel> random_challengers(const PlantModel& p, int count,
                                                std::uint64_t seed) {
  std::vector<ControllerModel> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(random_pr_controller(p.control_fields(), p.output_fields(),
                                       seed * 7919u + static_cast<std::uint64_t>(i) + 1));
  }
  return out;
}

TheoremReport verify_static_lqg(const PlantModel& p, const StaticLqgOptions& opts,
                                const Tolerances& tol) {
  TheoremReport rep;
  rep.theorem = "T5";
  if (p.kind != SystemKind::annihilation || !p.cost) {
    rep.hypothesis_ok = false;
    rep.narrative = "requires an annihilation-kind plant with a cost output";
    return rep;
  }
  try {
    augment_plant(p, tol);
  } catch (const NotAugmentableError& e) {
    rep.hypothesis_ok = false;
    rep.narrative = std::string("plant not physically realizable: ") + e.what();
    return rep;
  }
  const Index m_u = p.control_fields();
  const Index m_y = p.output_fields();

  bool zero_gain = true;
  double max_gain = 0.0;
  for (const StaticGain& sg : zero_gain_family(m_u, m_y, opts.seed)) {
    const TheoremReport z = verify_zero_gain(p, sg.k_cy, sg.k_cw, tol);
    zero_gain = zero_gain && z.holds;
    max_gain = std::max(max_gain, z.evidence.front().second);
  }

  double best_static = std::numeric_limits<double>::infinity();
  std::string best_label;
  for (const StaticGain& sg : static_grid(m_u, m_y, opts.seed)) {
    const ClosedLoop cl = close_loop(p, ControllerModel::static_gain(p.kind, sg.k_cw, sg.k_cy), tol);
    if (!cl.internally_stable) continue;
    try {
      const double v = lqg_cost(cl, tol).value;
      if (v < best_static) {
        best_static = v;
        best_label = sg.label;
      }
    } catch (const Error&) {
    }
  }

  double best_dynamic = std::numeric_limits<double>::infinity();
  int evaluated = 0;
  const std::vector<ControllerModel> dyn = random_challengers(p, opts.challengers, opts.seed);
  for (std::size_t i = 0; i < dyn.size(); ++i) {
    const ClosedLoop cl = close_loop(p, dyn[i], tol);
    if (!cl.internally_stable) {
      rep.skipped.push_back("challenger " + std::to_string(i) + ": closed loop unstable");
      continue;
    }
    try {
      best_dynamic = std::min(best_dynamic, lqg_cost(cl, tol).value);
      ++evaluated;
    } catch (const Error& e) {
      rep.skipped.push_back("challenger " + std::to_string(i) + ": " + e.what());
    }
  }

  const bool cost_ok = best_static <= best_dynamic + 1e-6;
  rep.holds = zero_gain && cost_ok;
  rep.evidence = {{"max_gain_norm", max_gain},
                  {"best_static_cost", best_static},
                  {"best_dynamic_cost", best_dynamic},
                  {"dynamic_evaluated", static_cast<double>(evaluated)}};
  rep.narrative = "best static " + num(best_static) + " (" + best_label + "), best dynamic " +
                  num(best_dynamic) + (zero_gain ? "" : "; nonzero Kalman gain");
  return rep;
}

StateSpaceTF selected_outputs(const PlantModel& p, const ControllerModel& c,
                              const Tolerances& tol) {
  if (!p.selector) throw DomainError("plant has no cost selector");
  const StateSpaceTF phys = physical_outputs(p, c, tol);
  const Index rows = p.noise_fields() + p.control_fields();
  const Matrix& l = *p.selector;
  return StateSpaceTF(phys.a, phys.b, l * phys.c.topRows(rows), l * phys.d.topRows(rows));
}

TheoremReport verify_trivial_hinf(const PlantModel& p,
                                  const std::vector<ControllerModel>& challengers,
                                  const HinfOptions& opts, const Tolerances& tol) {
  TheoremReport rep;
  rep.theorem = "T6";
  if (p.kind != SystemKind::annihilation) {
    rep.hypothesis_ok = false;
    rep.narrative = "requires an annihilation-kind plant";
    return rep;
  }
  if (!p.selector || p.selector->rows() == 0 || !is_partial_permutation(*p.selector)) {
    rep.hypothesis_ok = false;
    rep.narrative = "selector L must have standard unit vector rows";
    return rep;
  }
  try {
    augment_plant(p, tol);
  } catch (const NotAugmentableError& e) {
    rep.hypothesis_ok = false;
    rep.narrative = std::string("plant not physically realizable: ") + e.what();
    return rep;
  }

  std::vector<std::pair<std::string, ControllerModel>> loops;
  loops.emplace_back("trivial",
                     ControllerModel::trivial(p.kind, p.control_fields(), p.output_fields()));
  for (std::size_t i = 0; i < challengers.size(); ++i) {
    loops.emplace_back("challenger " + std::to_string(i), challengers[i]);
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  double pointwise = 0.0;
  int lossless_failures = 0;
  int evaluated = 0;
  bool ok = true;
  for (const auto& [name, c] : loops) {
    try {
      const AugmentedSystem ac = augment_controller(c, tol);
      if (!ac.verdict.realizable()) {
        rep.skipped.push_back(name + ": controller not physically realizable");
        continue;
      }
    } catch (const Error& e) {
      rep.skipped.push_back(name + ": " + e.what());
      continue;
    }
    const StateSpaceTF phys = physical_outputs(p, c, tol);
    const StateSpaceTF gz = selected_outputs(p, c, tol);
    const double norm = hinf_norm(gz, 1e-9, tol).value;
    lo = std::min(lo, norm);
    hi = std::max(hi, norm);
    ok = ok && std::abs(norm - 1.0) <= opts.norm_tol;

    const FrequencyResponse fr(gz, tol);
    for (double w : frequency_grid(gz.a, opts.seed)) {
      const Complex s(0.0, w);
      if (fr.near_pole(s)) continue;
      const double sigma = max_singular_value(fr.at(s));
      pointwise = std::max(pointwise, std::abs(sigma - 1.0));
    }
    if (!lossless_br_check(phys, tol).holds) {
      ++lossless_failures;
      ok = false;
    }
    ++evaluated;
  }
  ok = ok && pointwise <= opts.pointwise_tol && evaluated > 0;
  rep.holds = ok;
  rep.evidence = {{"min_norm", evaluated ? lo : 0.0},
                  {"max_norm", hi},
                  {"max_pointwise_deviation", pointwise},
                  {"lossless_failures", static_cast<double>(lossless_failures)},
                  {"evaluated", static_cast<double>(evaluated)}};
  rep.narrative = "norms in [" + num(evaluated ? lo : 0.0) + ", " + num(hi) + "] over " +
                  std::to_string(evaluated) + " loops";
  return rep;
}

}  // namespace qcfb
