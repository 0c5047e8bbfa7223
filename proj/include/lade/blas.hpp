#pragma once

#include <cstddef>

#include <cblas.h>

#include "lade/errors.hpp"

namespace lade {

// Row-major C = alpha * op(A) * op(B) + beta * C with op(A) [m x k], op(B) [k x n].
// Leading dimensions are the operands' stored row widths.
inline void gemm_rm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                    double alpha, const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double beta, double* c, std::size_t ldc) {
  if (m == 0 || n == 0) return;
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m), static_cast<int>(n),
              static_cast<int>(k), alpha, a, static_cast<int>(lda), b, static_cast<int>(ldb), beta,
              c, static_cast<int>(ldc));
}

}  // namespace lade
