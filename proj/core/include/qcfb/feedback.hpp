#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qcfb/dmat.hpp"
#include "qcfb/qsys.hpp"
#include "qcfb/xfer.hpp"

namespace qcfb {

// Channel counts below are in fields (or modes); general-kind matrices carry
// twice as many rows and columns in doubled-up layout.

/// Cost output dZ = C x dt + D dU (+ D_w dW).
struct CostOutput {
  Matrix c;    ///< z x states
  Matrix d;    ///< z x control
  Matrix d_w;  ///< z x noise; empty means zero
};

/// Plant  dx = F x dt + G_w dW + G_u dU,  dY = H x dt + K dW.
struct PlantModel {
  SystemKind kind = SystemKind::annihilation;
  Matrix f, g_w, g_u, h, k;
  std::optional<CostOutput> cost;
  /// Physical cost selector Z = L [Y; Ỹ] over the augmented outputs.
  std::optional<Matrix> selector;

  Index modes() const { return f.rows() / multiplicity(kind); }
  Index noise_fields() const { return g_w.cols() / multiplicity(kind); }
  Index control_fields() const { return g_u.cols() / multiplicity(kind); }
  Index output_fields() const { return h.rows() / multiplicity(kind); }

  void validate(const Tolerances& tol = {}) const;
};

/// Controller  dξ = F_c ξ dt + G_cw dW̃ + G_cy dY,
///             dU = H_c ξ dt + K_cw dW̃ + K_cy dY.
struct ControllerModel {
  SystemKind kind = SystemKind::annihilation;
  Matrix f_c, g_cw, g_cy, h_c, k_cw, k_cy;

  Index modes() const { return f_c.rows() / multiplicity(kind); }
  Index noise_fields() const { return k_cw.cols() / multiplicity(kind); }
  Index input_fields() const { return k_cy.cols() / multiplicity(kind); }
  Index output_fields() const { return k_cw.rows() / multiplicity(kind); }

  void validate(const Tolerances& tol = {}) const;

  /// dU = dW̃: no states, one noise field per control field.
  static ControllerModel trivial(SystemKind kind, Index control_fields,
                                 Index output_fields);
  /// dU = K_cw dW̃ + K_cy dY without states.
  static ControllerModel static_gain(SystemKind kind, const Matrix& k_cw,
                                     const Matrix& k_cy);
};

struct ChannelRange {
  Index first = 0;
  Index count = 0;
};

struct ClosedLoop {
  SystemKind kind = SystemKind::annihilation;
  /// Noise [W; W̃] to cost Z (no outputs if the plant has no cost).
  StateSpaceTF system;
  Matrix state_matrix;
  Matrix noise_matrix;
  ChannelRange plant_noise;
  ChannelRange controller_noise;
  Index plant_modes = 0;
  Index controller_modes = 0;
  bool internally_stable = false;
};

struct AugmentedSystem {
  QuantumSystem system;
  Matrix theta;
  Matrix h_tilde;  ///< added output rows
  PrVerdict verdict;
};

class NotAugmentableError : public DomainError {
 public:
  NotAugmentableError(const std::string& what, NamedValues residuals)
      : DomainError(what), residuals_(std::move(residuals)) {}
  const NamedValues& residuals() const { return residuals_; }

 private:
  NamedValues residuals_;
};

/// Completes the plant with unused outputs Ỹ so that [W; U] -> [Y; Ỹ] is
/// square with K = I and physically realizable.
AugmentedSystem augment_plant(const PlantModel& p, const Tolerances& tol = {});

/// Same for a controller in the form K_cw = [I 0], K_cy = 0: inputs
/// [W̃; Y], outputs [U; Ũ].
AugmentedSystem augment_controller(const ControllerModel& c, const Tolerances& tol = {});

ClosedLoop close_loop(const PlantModel& p, const ControllerModel& c,
                      const Tolerances& tol = {});

/// Closed-loop transfer function from [W; W̃] to Z.
StateSpaceTF gamma_cl(const PlantModel& p, const ControllerModel& c,
                      const Tolerances& tol = {});

/// Closed loop from [W; W̃] to the fields leaving the interconnection:
/// [Ũ_y; Ỹ; Ũ_b], where Ũ_y exits the controller port that took Y,
/// Ỹ are the unused plant outputs and Ũ_b the remaining controller outputs.
/// Square with identity feedthrough when both parts are realizable.
StateSpaceTF physical_outputs(const PlantModel& p, const ControllerModel& c,
                              const Tolerances& tol = {});

struct ModifiedPair {
  PlantModel plant;
  ControllerModel controller;
};

/// Moves the controller feedthrough into the plant; W̃ becomes a plant noise.
ModifiedPair modified_forms(const PlantModel& p, const ControllerModel& c);

/// Closes a modified pair; noise ordering matches close_loop.
ClosedLoop close_modified_loop(const ModifiedPair& pair, const Tolerances& tol = {});

class NotRealizableError : public DomainError {
 public:
  NotRealizableError(const std::string& what, std::string prong, double value)
      : DomainError(what), prong_(std::move(prong)), value_(value) {}
  const std::string& prong() const { return prong_; }
  double value() const { return value_; }

 private:
  std::string prong_;
  double value_;
};

struct NoiseSynthesis {
  ControllerModel controller;
  Matrix theta;
  Index extra_noise_channels = 0;
  bool zero_extra_noise = false;
  double admissibility_norm = 0.0;
  PrVerdict verdict;  ///< of the augmented controller
  std::string note;
};

struct SynthOptions {
  /// Apply the bounded-real admissibility gate before solving.
  bool hinf_gate = true;
  double rel_tol = 1e-6;
};

NoiseSynthesis synth_noise_annihilation(const Matrix& f_c, const Matrix& g_cy,
                                        const Matrix& h_c, const SynthOptions& opts = {},
                                        const Tolerances& tol = {});

NoiseSynthesis synth_noise_general(const Matrix& f_c, const Matrix& g_cy,
                                   const Matrix& h_c, const Matrix& theta,
                                   const Tolerances& tol = {});

/// Random T J T^† with T doubled-up, for synth_noise_general.
Matrix random_commutation_matrix(Index modes, std::uint64_t seed);

/// Random physically realizable annihilation plant: n modes, m_w noise
/// fields (all measured, Y = first m_w outputs) and m_u control fields.
/// Hurwitz F. Optional random cost C (D = 0) and selector L.
PlantModel random_pr_plant(Index n, Index m_w, Index m_u, std::uint64_t seed,
                           Index cost_rows = 0, Index selector_rows = 0);

/// Random admissible (F_c, G_cy, H_c) completed by synth_noise_annihilation.
ControllerModel random_pr_controller(Index m_u, Index m_y, std::uint64_t seed,
                                     Index max_modes = 3);

}  // namespace qcfb
