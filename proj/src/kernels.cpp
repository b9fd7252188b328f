#include "wiae/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define WIAE_HAVE_AVX2 1
#endif

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace wiae::ad {

namespace {

#ifdef __GLIBC__
// Graph evaluation allocates multi-megabyte buffers at a high rate. Keeping
// them on the heap instead of per-allocation mmap regions avoids paying page
// faults on every operation.
const bool g_malloc_tuned = [] {
    mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
    mallopt(M_TRIM_THRESHOLD, 256 * 1024 * 1024);
    return true;
}();
#endif

thread_local std::vector<double> g_scratch_a;
thread_local std::vector<double> g_scratch_b;

template <bool kAccumulate>
inline void scalar_tile(std::size_t mb, std::size_t nb, std::size_t k,
                        const double* a, std::size_t lda,
                        const double* b, std::size_t ldb,
                        double* c, std::size_t ldc) {
    for (std::size_t i = 0; i < mb; ++i) {
        const double* ar = a + i * lda;
        for (std::size_t j = 0; j < nb; ++j) {
            double acc = 0.0;
            for (std::size_t kk = 0; kk < k; ++kk) {
                acc = std::fma(ar[kk], b[kk * ldb + j], acc);
            }
            if constexpr (kAccumulate) {
                c[i * ldc + j] += acc;
            } else {
                c[i * ldc + j] = acc;
            }
        }
    }
}

#ifdef WIAE_HAVE_AVX2
// 4x8 register tile, k innermost. Each output element accumulates in
// ascending-k order with fused multiply-add, matching the scalar tail.
template <bool kAccumulate>
inline void kernel_4x8(std::size_t k, const double* a, std::size_t lda,
                       const double* b, std::size_t ldb, double* c, std::size_t ldc) {
    __m256d acc00 = _mm256_setzero_pd(), acc01 = _mm256_setzero_pd();
    __m256d acc10 = _mm256_setzero_pd(), acc11 = _mm256_setzero_pd();
    __m256d acc20 = _mm256_setzero_pd(), acc21 = _mm256_setzero_pd();
    __m256d acc30 = _mm256_setzero_pd(), acc31 = _mm256_setzero_pd();
    const double* a0 = a;
    const double* a1 = a + lda;
    const double* a2 = a + 2 * lda;
    const double* a3 = a + 3 * lda;
    for (std::size_t kk = 0; kk < k; ++kk) {
        const __m256d b0 = _mm256_loadu_pd(b + kk * ldb);
        const __m256d b1 = _mm256_loadu_pd(b + kk * ldb + 4);
        __m256d av = _mm256_broadcast_sd(a0 + kk);
        acc00 = _mm256_fmadd_pd(av, b0, acc00);
        acc01 = _mm256_fmadd_pd(av, b1, acc01);
        av = _mm256_broadcast_sd(a1 + kk);
        acc10 = _mm256_fmadd_pd(av, b0, acc10);
        acc11 = _mm256_fmadd_pd(av, b1, acc11);
        av = _mm256_broadcast_sd(a2 + kk);
        acc20 = _mm256_fmadd_pd(av, b0, acc20);
        acc21 = _mm256_fmadd_pd(av, b1, acc21);
        av = _mm256_broadcast_sd(a3 + kk);
        acc30 = _mm256_fmadd_pd(av, b0, acc30);
        acc31 = _mm256_fmadd_pd(av, b1, acc31);
    }
    if constexpr (kAccumulate) {
        acc00 = _mm256_add_pd(_mm256_loadu_pd(c), acc00);
        acc01 = _mm256_add_pd(_mm256_loadu_pd(c + 4), acc01);
        acc10 = _mm256_add_pd(_mm256_loadu_pd(c + ldc), acc10);
        acc11 = _mm256_add_pd(_mm256_loadu_pd(c + ldc + 4), acc11);
        acc20 = _mm256_add_pd(_mm256_loadu_pd(c + 2 * ldc), acc20);
        acc21 = _mm256_add_pd(_mm256_loadu_pd(c + 2 * ldc + 4), acc21);
        acc30 = _mm256_add_pd(_mm256_loadu_pd(c + 3 * ldc), acc30);
        acc31 = _mm256_add_pd(_mm256_loadu_pd(c + 3 * ldc + 4), acc31);
    }
    _mm256_storeu_pd(c, acc00);
    _mm256_storeu_pd(c + 4, acc01);
    _mm256_storeu_pd(c + ldc, acc10);
    _mm256_storeu_pd(c + ldc + 4, acc11);
    _mm256_storeu_pd(c + 2 * ldc, acc20);
    _mm256_storeu_pd(c + 2 * ldc + 4, acc21);
    _mm256_storeu_pd(c + 3 * ldc, acc30);
    _mm256_storeu_pd(c + 3 * ldc + 4, acc31);
}
#endif

}  // namespace

namespace {

template <bool kAccumulate>
void gemm_nn_impl(std::size_t m, std::size_t n, std::size_t k,
                  const double* a, std::size_t lda, const double* b, std::size_t ldb,
                  double* c, std::size_t ldc) {
#ifdef WIAE_HAVE_AVX2
    const std::size_t m4 = m - m % 4;
    const std::size_t n8 = n - n % 8;
    for (std::size_t i = 0; i < m4; i += 4) {
        for (std::size_t j = 0; j < n8; j += 8) {
            kernel_4x8<kAccumulate>(k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc);
        }
        if (n8 < n) {
            scalar_tile<kAccumulate>(4, n - n8, k, a + i * lda, lda, b + n8, ldb,
                                     c + i * ldc + n8, ldc);
        }
    }
    if (m4 < m) {
        scalar_tile<kAccumulate>(m - m4, n, k, a + m4 * lda, lda, b, ldb, c + m4 * ldc, ldc);
    }
#else
    scalar_tile<kAccumulate>(m, n, k, a, lda, b, ldb, c, ldc);
#endif
}

}  // namespace

void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
    gemm_nn_impl<false>(m, n, k, a, k, b, n, c, n);
}

void transpose(std::size_t rows, std::size_t cols, const double* in, double* out) {
    constexpr std::size_t kBlock = 32;
    for (std::size_t i0 = 0; i0 < rows; i0 += kBlock) {
        const std::size_t i1 = std::min(rows, i0 + kBlock);
        for (std::size_t j0 = 0; j0 < cols; j0 += kBlock) {
            const std::size_t j1 = std::min(cols, j0 + kBlock);
            for (std::size_t i = i0; i < i1; ++i) {
                for (std::size_t j = j0; j < j1; ++j) {
                    out[j * rows + i] = in[i * cols + j];
                }
            }
        }
    }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
    g_scratch_b.resize(k * n);
    transpose(n, k, b, g_scratch_b.data());
    gemm_nn(m, n, k, a, g_scratch_b.data(), c);
}

// C = A^T B with the shared dimension processed in chunks: each chunk of A is
// transposed into a packed panel and fed to the register-tiled kernel, so the
// accumulators stay in registers across the whole chunk. Per element the
// accumulation order is ascending-k chunk by chunk, which is fixed across
// runs.
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
    constexpr std::size_t kChunk = 320;
    std::fill(c, c + m * n, 0.0);
    g_scratch_a.resize(std::min(kChunk, k) * m);
    for (std::size_t k0 = 0; k0 < k; k0 += kChunk) {
        const std::size_t kc = std::min(kChunk, k - k0);
        transpose(kc, m, a + k0 * m, g_scratch_a.data());
        gemm_nn_impl<true>(m, n, kc, g_scratch_a.data(), kc, b + k0 * n, n, c, n);
    }
}

void gemm_tt(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
    g_scratch_a.resize(m * k);
    transpose(k, m, a, g_scratch_a.data());
    g_scratch_b.resize(k * n);
    transpose(n, k, b, g_scratch_b.data());
    gemm_nn(m, n, k, g_scratch_a.data(), g_scratch_b.data(), c);
}

// ---------------------------------------------------------------------------
// tanh(x) = sign(x) * (1 - 2 / (exp(2|x|) + 1)), with exp evaluated by
// Cody-Waite range reduction and a degree-13 Taylor polynomial. The scalar
// path mirrors the vector path operation-for-operation so tail elements are
// bit-identical to full lanes.
// ---------------------------------------------------------------------------

namespace {

constexpr double kLog2E = 1.4426950408889634074;
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kArgCap = 50.0;  // tanh saturates far below exp overflow

constexpr double kExpC[14] = {
    1.0,
    1.0,
    1.0 / 2,
    1.0 / 6,
    1.0 / 24,
    1.0 / 120,
    1.0 / 720,
    1.0 / 5040,
    1.0 / 40320,
    1.0 / 362880,
    1.0 / 3628800,
    1.0 / 39916800,
    1.0 / 479001600,
    1.0 / 6227020800.0,
};

inline double exp_scalar(double x) {
    const double nf = std::nearbyint(x * kLog2E);
    double r = std::fma(-nf, kLn2Hi, x);
    r = std::fma(-nf, kLn2Lo, r);
    double p = kExpC[13];
    for (int i = 12; i >= 0; --i) p = std::fma(p, r, kExpC[i]);
    const auto n = static_cast<std::int64_t>(nf);
    std::uint64_t bits = static_cast<std::uint64_t>(n + 1023) << 52;
    double scale;
    std::memcpy(&scale, &bits, sizeof scale);
    return p * scale;
}

inline double tanh_scalar(double x) {
    const double ax = std::min(2.0 * std::fabs(x), kArgCap);
    const double y = 1.0 - 2.0 / (exp_scalar(ax) + 1.0);
    return std::copysign(y, x);
}

#ifdef WIAE_HAVE_AVX2
inline __m256d exp_avx(__m256d x) {
    const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 2^52 + 2^51
    const __m256d nf = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kLog2E)),
                                       _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fmadd_pd(nf, _mm256_set1_pd(-kLn2Hi), x);
    r = _mm256_fmadd_pd(nf, _mm256_set1_pd(-kLn2Lo), r);
    __m256d p = _mm256_set1_pd(kExpC[13]);
    for (int i = 12; i >= 0; --i) {
        p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kExpC[i]));
    }
    const __m256i magic_bits = _mm256_castpd_si256(magic);
    const __m256i n64 = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(nf, magic)), magic_bits);
    const __m256i scale_bits =
        _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(scale_bits));
}
#endif

}  // namespace

void vtanh(std::size_t n, const double* x, double* y) {
#ifdef WIAE_HAVE_AVX2
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d cap = _mm256_set1_pd(kArgCap);
    const std::size_t n4 = n - n % 4;
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d sign = _mm256_and_pd(v, sign_mask);
        const __m256d ax = _mm256_min_pd(_mm256_mul_pd(two, _mm256_andnot_pd(sign_mask, v)), cap);
        const __m256d e = exp_avx(ax);
        const __m256d t = _mm256_sub_pd(one, _mm256_div_pd(two, _mm256_add_pd(e, one)));
        _mm256_storeu_pd(y + i, _mm256_or_pd(t, sign));
    }
    for (std::size_t i = n4; i < n; ++i) y[i] = tanh_scalar(x[i]);
#else
    for (std::size_t i = 0; i < n; ++i) y[i] = tanh_scalar(x[i]);
#endif
}

}  // namespace wiae::ad
