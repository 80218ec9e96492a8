#include "qcfb/feedback.hpp"

#include <algorithm>
#include <cmath>

namespace qcfb {

namespace {

void expect_shape(const Matrix& m, Index rows, Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(what) + " is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void expect_doubled(const Matrix& m, const char* what, const Tolerances& tol) {
  if (m.rows() % 2 != 0 || m.cols() % 2 != 0) {
    throw DimensionError(std::string(what) + " must have even dimensions");
  }
  const StructureCheck c = is_doubled(m, tol.structure * std::max(1.0, max_abs(m)));
  if (!c.ok) throw DomainError(std::string(what) + " is not doubled-up");
}

// [I 0] mapping the first `rows` of `cols` fields.
Matrix leading_identity(SystemKind k, Index rows, Index cols) {
  return field_rows(k, field_identity(k, cols), 0, rows);
}

}  // namespace

void PlantModel::validate(const Tolerances& tol) const {
  const Index m = multiplicity(kind);
  if (f.rows() % m != 0 || g_w.cols() % m != 0 || g_u.cols() % m != 0 ||
      h.rows() % m != 0) {
    throw DimensionError("general-kind plant matrices must have even dimensions");
  }
  const Index n = f.rows();
  expect_shape(f, n, n, "F");
  expect_shape(g_w, n, g_w.cols(), "G_w");
  expect_shape(g_u, n, g_u.cols(), "G_u");
  expect_shape(h, h.rows(), n, "H");
  expect_shape(k, h.rows(), g_w.cols(), "K");
  for (const auto& [mat, name] : {std::pair{&f, "F"}, {&g_w, "G_w"}, {&g_u, "G_u"},
                                  {&h, "H"}, {&k, "K"}}) {
    require_finite(*mat, name);
    if (kind == SystemKind::general) expect_doubled(*mat, name, tol);
  }
  if (cost) {
    expect_shape(cost->c, cost->c.rows(), n, "cost C");
    expect_shape(cost->d, cost->c.rows(), g_u.cols(), "cost D");
    if (cost->d_w.size() != 0) expect_shape(cost->d_w, cost->c.rows(), g_w.cols(), "cost D_w");
    require_finite(cost->c, "cost C");
    require_finite(cost->d, "cost D");
  }
  if (selector) {
    expect_shape(*selector, selector->rows(), g_w.cols() + g_u.cols(), "selector L");
    require_finite(*selector, "selector L");
  }
}

void ControllerModel::validate(const Tolerances& tol) const {
  const Index m = multiplicity(kind);
  if (f_c.rows() % m != 0 || k_cw.rows() % m != 0 || k_cw.cols() % m != 0 ||
      k_cy.cols() % m != 0) {
    throw DimensionError("general-kind controller matrices must have even dimensions");
  }
  const Index n = f_c.rows();
  expect_shape(f_c, n, n, "F_c");
  expect_shape(g_cw, n, k_cw.cols(), "G_cw");
  expect_shape(g_cy, n, k_cy.cols(), "G_cy");
  expect_shape(h_c, k_cw.rows(), n, "H_c");
  expect_shape(k_cy, k_cw.rows(), k_cy.cols(), "K_cy");
  for (const auto& [mat, name] : {std::pair{&f_c, "F_c"}, {&g_cw, "G_cw"}, {&g_cy, "G_cy"},
                                  {&h_c, "H_c"}, {&k_cw, "K_cw"}, {&k_cy, "K_cy"}}) {
    require_finite(*mat, name);
    if (kind == SystemKind::general && mat->size() > 0) expect_doubled(*mat, name, tol);
  }
}

ControllerModel ControllerModel::trivial(SystemKind kind, Index control_fields,
                                         Index output_fields) {
  const Index m = multiplicity(kind);
  ControllerModel c;
  c.kind = kind;
  c.f_c = Matrix(0, 0);
  c.g_cw = Matrix(0, m * control_fields);
  c.g_cy = Matrix(0, m * output_fields);
  c.h_c = Matrix(m * control_fields, 0);
  c.k_cw = field_identity(kind, control_fields);
  c.k_cy = field_zero(kind, control_fields, output_fields);
  return c;
}

ControllerModel ControllerModel::static_gain(SystemKind kind, const Matrix& k_cw,
                                             const Matrix& k_cy) {
  if (k_cw.rows() != k_cy.rows()) {
    throw DimensionError("K_cw and K_cy must have the same number of rows");
  }
  ControllerModel c;
  c.kind = kind;
  c.f_c = Matrix(0, 0);
  c.g_cw = Matrix(0, k_cw.cols());
  c.g_cy = Matrix(0, k_cy.cols());
  c.h_c = Matrix(k_cw.rows(), 0);
  c.k_cw = k_cw;
  c.k_cy = k_cy;
  return c;
}

namespace {

// Square completion shared by plant and controller augmentation. `g` holds
// every input column; the first `given` output fields are prescribed by `h`.
AugmentedSystem augment_square(SystemKind kind, const Matrix& f, const Matrix& g,
                               const Matrix& h, Index given, const char* what,
                               const Tolerances& tol) {
  const Index mult = multiplicity(kind);
  const Index inputs = g.cols() / mult;
  const Index states = f.rows();
  const Matrix jf = field_sign(kind, inputs);
  const Matrix q = g * jf * g.adjoint();
  const Matrix g_given = field_cols(kind, g, 0, given);
  const Matrix j_given = field_sign(kind, given);

  Matrix theta = Matrix::Zero(states, states);
  if (states > 0) {
    if (eig_sum_condition(f, tol)) {
      theta = solve_lyapunov_hermitian(f, q, tol).x;
    } else {
      const CoupledCertificate cert = solve_coupled_lyapunov(f, q, g_given, h, j_given, tol);
      theta = cert.x;
    }
  }
  const double lyap = max_abs(f * theta + theta * f.adjoint() + q) / (1.0 + max_abs(q));
  const double coupling =
      max_abs(g_given + theta * h.adjoint() * j_given) / (1.0 + max_abs(g_given));
  const Inertia in = inertia(theta, tol.rank);
  const bool commutation = kind == SystemKind::annihilation
                               ? in.positive == states
                               : (in.positive == states / 2 && in.negative == states / 2);
  NamedValues residuals{{"lyapunov", lyap},
                        {"coupling", coupling},
                        {"commutation", commutation ? 0.0 : 1.0}};
  if (lyap > tol.residual || coupling > tol.residual || !commutation) {
    std::string why = lyap > tol.residual       ? "no Hermitian Lyapunov certificate"
                      : coupling > tol.residual ? "given output rows violate the coupling identity"
                                                : "certificate has the wrong inertia";
    throw NotAugmentableError(std::string(what) + " is not augmentable: " + why,
                              std::move(residuals));
  }

  const Index rest = inputs - given;
  const Matrix g_rest = field_cols(kind, g, given, rest);
  Matrix h_tilde(mult * rest, states);
  if (states > 0) {
    const Matrix theta_inv = theta.fullPivLu().inverse();
    h_tilde = -field_sign(kind, rest) * g_rest.adjoint() * theta_inv;
  }
  const Matrix h_aug = vcat_fields(kind, {h, h_tilde});
  QuantumSystem sys(kind, f, g, h_aug, field_identity(kind, inputs), tol);
  PrVerdict verdict = verify_pr_certificate(sys, theta, tol);
  return {std::move(sys), std::move(theta), std::move(h_tilde), std::move(verdict)};
}

}  // namespace

AugmentedSystem augment_plant(const PlantModel& p, const Tolerances& tol) {
  p.validate(tol);
  const SystemKind k = p.kind;
  const Index m_w = p.noise_fields();
  const Index m_y = p.output_fields();
  if (m_y > m_w) {
    throw NotAugmentableError("plant has more outputs than noise inputs",
                              {{"outputs", static_cast<double>(m_y)},
                               {"noise_inputs", static_cast<double>(m_w)}});
  }
  const double feed = max_abs(p.k - leading_identity(k, m_y, m_w));
  if (feed > tol.residual) {
    throw NotAugmentableError("plant feedthrough must be K = [I 0]", {{"feedthrough", feed}});
  }
  return augment_square(k, p.f, hcat_fields(k, {p.g_w, p.g_u}), p.h, m_y, "plant", tol);
}

AugmentedSystem augment_controller(const ControllerModel& c, const Tolerances& tol) {
  c.validate(tol);
  const SystemKind k = c.kind;
  const Index m_u = c.output_fields();
  const Index m_wt = c.noise_fields();
  if (m_u > m_wt) {
    throw NotAugmentableError("controller has fewer noise inputs than outputs",
                              {{"outputs", static_cast<double>(m_u)},
                               {"noise_inputs", static_cast<double>(m_wt)}});
  }
  const double feed = std::max(max_abs(c.k_cw - leading_identity(k, m_u, m_wt)),
                               max_abs(c.k_cy));
  if (feed > tol.residual) {
    throw NotAugmentableError("controller feedthrough must be K_cw = [I 0], K_cy = 0",
                              {{"feedthrough", feed}});
  }
  return augment_square(k, c.f_c, hcat_fields(k, {c.g_cw, c.g_cy}), c.h_c, m_u,
                        "controller", tol);
}

namespace {

void check_compatible(const PlantModel& p, const ControllerModel& c) {
  if (p.kind != c.kind) throw DimensionError("plant and controller kinds differ");
  if (c.output_fields() != p.control_fields()) {
    throw DimensionError("controller outputs (" + std::to_string(c.output_fields()) +
                         ") do not match plant control inputs (" +
                         std::to_string(p.control_fields()) + ")");
  }
  if (c.input_fields() != p.output_fields()) {
    throw DimensionError("controller inputs (" + std::to_string(c.input_fields()) +
                         ") do not match plant outputs (" +
                         std::to_string(p.output_fields()) + ")");
  }
}

}  // namespace

ClosedLoop close_loop(const PlantModel& p, const ControllerModel& c, const Tolerances& tol) {
  p.validate(tol);
  c.validate(tol);
  check_compatible(p, c);
  const SystemKind k = p.kind;

  const Matrix a = vcat_fields(k, {hcat_fields(k, {p.f + p.g_u * c.k_cy * p.h, p.g_u * c.h_c}),
                                   hcat_fields(k, {c.g_cy * p.h, c.f_c})});
  const Matrix b = vcat_fields(
      k, {hcat_fields(k, {p.g_w + p.g_u * c.k_cy * p.k, p.g_u * c.k_cw}),
          hcat_fields(k, {c.g_cy * p.k, c.g_cw})});

  Matrix cz(0, a.cols());
  Matrix dz(0, b.cols());
  if (p.cost) {
    const CostOutput& co = *p.cost;
    Matrix dw = co.d * c.k_cy * p.k;
    if (co.d_w.size() != 0) dw += co.d_w;
    cz = hcat_fields(k, {co.c + co.d * c.k_cy * p.h, co.d * c.h_c});
    dz = hcat_fields(k, {dw, co.d * c.k_cw});
  }

  ClosedLoop cl;
  cl.kind = k;
  cl.state_matrix = a;
  cl.noise_matrix = b;
  cl.system = StateSpaceTF(a, b, cz, dz);
  cl.plant_noise = {0, p.noise_fields()};
  cl.controller_noise = {p.noise_fields(), c.noise_fields()};
  cl.plant_modes = p.modes();
  cl.controller_modes = c.modes();
  cl.internally_stable = is_hurwitz(a, tol.singular);
  return cl;
}

StateSpaceTF gamma_cl(const PlantModel& p, const ControllerModel& c, const Tolerances& tol) {
  if (!p.cost) throw DomainError("plant has no cost output");
  return close_loop(p, c, tol).system;
}

StateSpaceTF physical_outputs(const PlantModel& p, const ControllerModel& c,
                              const Tolerances& tol) {
  const ClosedLoop cl = close_loop(p, c, tol);
  const AugmentedSystem ap = augment_plant(p, tol);
  const AugmentedSystem ac = augment_controller(c, tol);
  const SystemKind k = p.kind;
  const Index m_w = p.noise_fields();
  const Index m_u = p.control_fields();
  const Index m_y = p.output_fields();
  const Index m_wt = c.noise_fields();

  // Linear maps from (state, noise) to each internal field.
  const Matrix x_plant = hcat_fields(k, {field_identity(k, p.modes()),
                                         field_zero(k, p.modes(), c.modes())});
  const Matrix x_ctrl = hcat_fields(k, {field_zero(k, c.modes(), p.modes()),
                                        field_identity(k, c.modes())});
  const Matrix n_w = hcat_fields(k, {field_identity(k, m_w), field_zero(k, m_w, m_wt)});
  const Matrix n_wt = hcat_fields(k, {field_zero(k, m_wt, m_w), field_identity(k, m_wt)});

  const Matrix y_c = p.h * x_plant;
  const Matrix y_d = p.k * n_w;
  const Matrix u_c = c.k_cy * y_c + c.h_c * x_ctrl;
  const Matrix u_d = c.k_cy * y_d + c.k_cw * n_wt;

  const Matrix pin_c = vcat_fields(k, {Matrix::Zero(n_w.rows(), x_plant.cols()), u_c});
  const Matrix pin_d = vcat_fields(k, {n_w, u_d});
  const Matrix pout_c = ap.system.h() * x_plant + ap.system.k() * pin_c;
  const Matrix pout_d = ap.system.k() * pin_d;

  const Matrix cin_c = vcat_fields(k, {Matrix::Zero(n_wt.rows(), x_plant.cols()), y_c});
  const Matrix cin_d = vcat_fields(k, {n_wt, y_d});
  const Matrix cout_c = ac.system.h() * x_ctrl + ac.system.k() * cin_c;
  const Matrix cout_d = ac.system.k() * cin_d;

  const Matrix out_c = vcat_fields(k, {field_rows(k, cout_c, m_wt, m_y),
                                       field_rows(k, pout_c, m_y, m_w - m_y + m_u),
                                       field_rows(k, cout_c, m_u, m_wt - m_u)});
  const Matrix out_d = vcat_fields(k, {field_rows(k, cout_d, m_wt, m_y),
                                       field_rows(k, pout_d, m_y, m_w - m_y + m_u),
                                       field_rows(k, cout_d, m_u, m_wt - m_u)});
  return StateSpaceTF(cl.state_matrix, cl.noise_matrix, out_c, out_d);
}

ModifiedPair modified_forms(const PlantModel& p, const ControllerModel& c) {
  p.validate();
  c.validate();
  check_compatible(p, c);
  if (c.noise_fields() < c.output_fields()) {
    throw DimensionError("controller needs at least as many noise fields as outputs");
  }
  const SystemKind k = p.kind;
  ModifiedPair out;
  PlantModel& mp = out.plant;
  mp.kind = k;
  mp.f = p.f + p.g_u * c.k_cy * p.h;
  mp.g_w = hcat_fields(k, {p.g_w + p.g_u * c.k_cy * p.k, p.g_u * c.k_cw});
  mp.g_u = p.g_u;
  mp.h = p.h;
  mp.k = hcat_fields(k, {p.k, Matrix::Zero(p.k.rows(), c.k_cw.cols())});
  if (p.cost) {
    CostOutput co;
    co.c = p.cost->c + p.cost->d * c.k_cy * p.h;
    co.d = p.cost->d;
    Matrix dw = p.cost->d * c.k_cy * p.k;
    if (p.cost->d_w.size() != 0) dw += p.cost->d_w;
    co.d_w = hcat_fields(k, {dw, p.cost->d * c.k_cw});
    mp.cost = co;
  }
  ControllerModel& mc = out.controller;
  mc = c;
  mc.k_cw.setZero();
  mc.k_cy.setZero();
  return out;
}

ClosedLoop close_modified_loop(const ModifiedPair& pair, const Tolerances& tol) {
  const PlantModel& p = pair.plant;
  const ControllerModel& c = pair.controller;
  p.validate(tol);
  c.validate(tol);
  const SystemKind k = p.kind;
  const Index m_wt = c.noise_fields();
  const Index m_w = p.noise_fields() - m_wt;
  if (max_abs(c.k_cw) != 0.0 || max_abs(c.k_cy) != 0.0) {
    throw DomainError("modified controller must be strictly proper");
  }
  const Matrix a = vcat_fields(k, {hcat_fields(k, {p.f, p.g_u * c.h_c}),
                                   hcat_fields(k, {c.g_cy * p.h, c.f_c})});
  const Matrix ctrl_noise =
      c.g_cy * p.k + hcat_fields(k, {Matrix::Zero(c.g_cw.rows(), multiplicity(k) * m_w), c.g_cw});
  const Matrix b = vcat_fields(k, {p.g_w, ctrl_noise});
  Matrix cz(0, a.cols());
  Matrix dz(0, b.cols());
  if (p.cost) {
    cz = hcat_fields(k, {p.cost->c, p.cost->d * c.h_c});
    dz = p.cost->d_w.size() != 0 ? p.cost->d_w : Matrix::Zero(p.cost->c.rows(), b.cols());
  }
  ClosedLoop cl;
  cl.kind = k;
  cl.state_matrix = a;
  cl.noise_matrix = b;
  cl.system = StateSpaceTF(a, b, cz, dz);
  cl.plant_noise = {0, m_w};
  cl.controller_noise = {m_w, m_wt};
  cl.plant_modes = p.modes();
  cl.controller_modes = c.modes();
  cl.internally_stable = is_hurwitz(a, tol.singular);
  return cl;
}

}  // namespace qcfb
