#pragma once

#include <cstddef>

namespace wiae::ad {

// Dense row-major kernels. Every kernel accumulates each output element in a
// fixed ascending-index order, so repeated runs are bit-identical.

/// C(m x n) = A(m x k) * B(k x n). C must not alias A or B.
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);

/// C(m x n) = A(m x k) * B(n x k)^T.
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);

/// C(m x n) = A(k x m)^T * B(k x n).
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);

/// C(m x n) = A(k x m)^T * B(n x k)^T.
void gemm_tt(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);

/// out(cols x rows) = in(rows x cols)^T.
void transpose(std::size_t rows, std::size_t cols, const double* in, double* out);

/// Elementwise tanh. Saturates to exactly +/-1 only in the far tails; exact 0 at 0.
void vtanh(std::size_t n, const double* x, double* y);

}  // namespace wiae::ad
