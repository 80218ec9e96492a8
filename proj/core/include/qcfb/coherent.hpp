#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcfb/feedback.hpp"

namespace qcfb {

struct KalmanResult {
  Matrix q;     ///< error covariance
  Matrix gain;  ///< (G_a + Q H_a^†) L^† (L L^†)^{-1}
  double riccati_residual = 0.0;
  double gain_norm = 0.0;
};

/// Steady-state filter for dx = F_a x dt + G_a dW, dY = L (H_a x dt + dW)
/// with unit-intensity noise. Throws DomainError if L L^† is singular and
/// DesignError if (F_a, L H_a) is not detectable or no PSD solution exists.
KalmanResult kalman_design(const Matrix& f_a, const Matrix& g_a, const Matrix& h_a,
                           const Matrix& l_select, const Tolerances& tol = {});

struct TheoremReport {
  std::string theorem;  ///< "C1", "T5" or "T6"
  bool holds = false;
  bool hypothesis_ok = true;
  NamedValues evidence;
  std::string narrative;
  std::vector<std::string> skipped;
};

struct StaticGain {
  Matrix k_cw;
  Matrix k_cy;
  std::string label;
};

/// K_cy = 0 with K_cw = I, a random unitary and a random m_u x (m_u + 1)
/// co-isometry.
std::vector<StaticGain> zero_gain_family(Index m_u, Index m_y, std::uint64_t seed);

/// Kalman filter of the plant modified by dU = K_cw dW̃ + K_cy dY. Holds
/// when the gain vanishes and the error covariance equals Θ.
TheoremReport verify_zero_gain(const PlantModel& p, const Matrix& k_cy, const Matrix& k_cw,
                               const Tolerances& tol = {});

/// H2 norm of the closed loop from [W; W̃] to Z.
NormResult lqg_cost(const ClosedLoop& cl, const Tolerances& tol = {});

struct StaticLqgOptions {
  int challengers = 20;
  std::uint64_t seed = 0;
  Index max_controller_modes = 3;
};

/// Static K_cy grid against random dynamic PR controllers.
TheoremReport verify_static_lqg(const PlantModel& p, const StaticLqgOptions& opts = {},
                                const Tolerances& tol = {});

/// Realizable static controllers [K_cw K_cy] used for the cost comparison.
std::vector<StaticGain> static_grid(Index m_u, Index m_y, std::uint64_t seed);

struct HinfOptions {
  double norm_tol = 1e-6;
  double pointwise_tol = 1e-7;
  std::uint64_t seed = 0;
};

/// Trivial controller and each challenger must give ‖L Γ‖∞ = 1.
TheoremReport verify_trivial_hinf(const PlantModel& p,
                                  const std::vector<ControllerModel>& challengers,
                                  const HinfOptions& opts = {}, const Tolerances& tol = {});

/// Closed loop from [W; W̃] to Z = L [Ũ_y; Ỹ].
StateSpaceTF selected_outputs(const PlantModel& p, const ControllerModel& c,
                              const Tolerances& tol = {});

std::vector<ControllerModel> random_challengers(const PlantModel& p, int count,
                                                std::uint64_t seed);

}  // namespace qcfb
