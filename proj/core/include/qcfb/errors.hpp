#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace qcfb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of the operands are inconsistent.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An input violates a documented invariant (Hermitian, positive, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A linear operator is numerically singular. Carries the eigenvalue pair
/// whose sum (or difference) fell below the guard.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, std::complex<double> first,
                   std::complex<double> second)
      : Error(what), first_(first), second_(second) {}

  std::complex<double> first() const { return first_; }
  std::complex<double> second() const { return second_; }

 private:
  std::complex<double> first_;
  std::complex<double> second_;
};

class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// Raised for H2 norms of systems with nonzero feedthrough.
class InfiniteNormError : public Error {
 public:
  using Error::Error;
};

class DesignError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace qcfb
