#pragma once

#include <cstdint>
#include <random>

#include "qcfb/dmat.hpp"

namespace qcfb {

/// Seeded source of complex Gaussian matrices.
class MatrixSampler {
 public:
  explicit MatrixSampler(std::uint64_t seed) : engine_(seed) {}

  /// Entries with unit complex variance (real and imaginary parts N(0, 1/2)).
  Matrix gaussian(Index rows, Index cols);
  Matrix hermitian(Index n);
  Matrix symmetric(Index n);
  /// Haar-distributed unitary via QR with phase correction.
  Matrix unitary(Index n);
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qcfb
