#pragma once

#include <vector>

#include "qcfb/dmat.hpp"

namespace qcfb::detail {

/// Complex Schur form A = U T U^†.
struct SchurForm {
  Matrix t;
  Matrix u;
};

SchurForm complex_schur(const Matrix& a);

/// Reorders the Schur form in place so that the diagonal entries flagged in
/// `select` (indexed by current position) lead. Uses adjacent Givens swaps.
void reorder_schur(SchurForm& form, std::vector<bool> select);

}  // namespace qcfb::detail
