#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "qcfb/dmat.hpp"

namespace qcfb {

/// Physical parameters (Θ, M, N) of a linear quantum system.
struct HamiltonianCoupling {
  SystemKind kind = SystemKind::annihilation;
  Matrix theta;       ///< commutation matrix
  Matrix hamiltonian; ///< M
  Matrix coupling;    ///< N

  Index modes() const;
  Index fields() const;
  /// Throws DomainError when an invariant fails.
  void validate(const Tolerances& tol = {}) const;
};

/// QSDE quadruple (F, G, H, K). General-kind matrices are doubled-up:
/// F is 2n x 2n, G is 2n x 2m, H is 2m x 2n and K is 2m x 2m.
class QuantumSystem {
 public:
  QuantumSystem(SystemKind kind, Matrix f, Matrix g, Matrix h, Matrix k,
                const Tolerances& tol = {});

  SystemKind kind() const { return kind_; }
  Index modes() const { return f_.rows() / multiplicity(kind_); }
  Index fields() const { return k_.rows() / multiplicity(kind_); }
  const Matrix& f() const { return f_; }
  const Matrix& g() const { return g_; }
  const Matrix& h() const { return h_; }
  const Matrix& k() const { return k_; }

 private:
  SystemKind kind_;
  Matrix f_, g_, h_, k_;
};

enum class PrStatus { realizable, not_realizable, indeterminate };
enum class PrFailure { none, structure, feedthrough, lyapunov, coupling, commutation };

std::string_view to_string(PrStatus s);
std::string_view to_string(PrFailure f);

struct PrResiduals {
  double lyapunov = 0.0;
  double coupling = 0.0;
  double feedthrough = 0.0;
};

struct PrVerdict {
  PrStatus status = PrStatus::not_realizable;
  std::optional<Matrix> theta;
  PrResiduals residuals;
  PrFailure failure = PrFailure::none;
  std::string detail;

  bool realizable() const { return status == PrStatus::realizable; }
};

/// Raised by extract_params for systems that are not physically realizable.
class ExtractionError : public DomainError {
 public:
  ExtractionError(const std::string& what, PrVerdict verdict)
      : DomainError(what), verdict_(std::move(verdict)) {}
  const PrVerdict& verdict() const { return verdict_; }

 private:
  PrVerdict verdict_;
};

QuantumSystem realize_general(const HamiltonianCoupling& p, const Tolerances& tol = {});
QuantumSystem realize_annihilation(const HamiltonianCoupling& p, const Tolerances& tol = {});
QuantumSystem realize(const HamiltonianCoupling& p, const Tolerances& tol = {});

PrVerdict check_pr_general(const QuantumSystem& s, const Tolerances& tol = {});
PrVerdict check_pr_annihilation(const QuantumSystem& s, const Tolerances& tol = {});
PrVerdict check_pr(const QuantumSystem& s, const Tolerances& tol = {});

/// Same test on raw matrices; structure violations become a verdict rather
/// than a construction error.
PrVerdict check_pr_matrices(SystemKind kind, const Matrix& f, const Matrix& g,
                            const Matrix& h, const Matrix& k,
                            const Tolerances& tol = {});

/// Evaluates the realizability equations for a given candidate Θ.
PrVerdict verify_pr_certificate(const QuantumSystem& s, const Matrix& theta,
                                const Tolerances& tol = {});

HamiltonianCoupling extract_params(const QuantumSystem& s, const Tolerances& tol = {});

bool eig_sum_condition(const Matrix& f, const Tolerances& tol = {});

struct RandomSystemOptions {
  bool hurwitz_required = false;
  int max_attempts = 16;
};

struct RandomPrSystem {
  QuantumSystem system;
  HamiltonianCoupling params;
  int attempts = 0;
};

RandomPrSystem random_pr_system(Index n, Index m, std::uint64_t seed,
                                SystemKind kind, RandomSystemOptions opts = {});

}  // namespace qcfb
