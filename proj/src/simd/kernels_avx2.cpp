#include "fibreflow/simd/kernels.hpp"

#include <cmath>
#include <limits>

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#include <immintrin.h>
#define FIBREFLOW_HAVE_AVX2_TARGET 1
#define FIBREFLOW_AVX2 __attribute__((target("avx2")))
#else
#define FIBREFLOW_HAVE_AVX2_TARGET 0
#endif

namespace fibreflow::simd::avx2 {

#if FIBREFLOW_HAVE_AVX2_TARGET

FIBREFLOW_AVX2 void hermitian_eigs(HermitianSpan h, std::span<double> lo,
                                   std::span<double> hi) {
    const std::size_t n = h.a.size();
    const __m256d half = _mm256_set1_pd(0.5);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_loadu_pd(h.a.data() + i);
        const __m256d d = _mm256_loadu_pd(h.d.data() + i);
        const __m256d br = _mm256_loadu_pd(h.br.data() + i);
        const __m256d bi = _mm256_loadu_pd(h.bi.data() + i);
        const __m256d m = _mm256_mul_pd(_mm256_add_pd(a, d), half);
        const __m256d s = _mm256_mul_pd(_mm256_sub_pd(a, d), half);
        const __m256d b2 = _mm256_add_pd(_mm256_mul_pd(br, br), _mm256_mul_pd(bi, bi));
        const __m256d r = _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(s, s), b2));
        _mm256_storeu_pd(lo.data() + i, _mm256_sub_pd(m, r));
        _mm256_storeu_pd(hi.data() + i, _mm256_add_pd(m, r));
    }
    if (i < n) {
        HermitianSpan tail{h.a.subspan(i), h.d.subspan(i), h.br.subspan(i), h.bi.subspan(i)};
        scalar::hermitian_eigs(tail, lo.subspan(i), hi.subspan(i));
    }
}

FIBREFLOW_AVX2 void lincomb(double alpha, std::span<const double> x, double beta,
                            std::span<const double> y, std::span<double> out) {
    const std::size_t n = x.size();
    const __m256d va = _mm256_set1_pd(alpha);
    const __m256d vb = _mm256_set1_pd(beta);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x.data() + i)),
                                        _mm256_mul_pd(vb, _mm256_loadu_pd(y.data() + i)));
        _mm256_storeu_pd(out.data() + i, r);
    }
    for (; i < n; ++i) out[i] = alpha * x[i] + beta * y[i];
}

FIBREFLOW_AVX2 void stencil5(const double* const rows[5], const double c[5], double scale,
                             std::size_t n, double* out) {
    const __m256d c0 = _mm256_set1_pd(c[0]), c1 = _mm256_set1_pd(c[1]),
                  c2 = _mm256_set1_pd(c[2]), c3 = _mm256_set1_pd(c[3]),
                  c4 = _mm256_set1_pd(c[4]), sc = _mm256_set1_pd(scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_mul_pd(c0, _mm256_loadu_pd(rows[0] + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(c1, _mm256_loadu_pd(rows[1] + i)));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(c2, _mm256_loadu_pd(rows[2] + i)));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(c3, _mm256_loadu_pd(rows[3] + i)));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(c4, _mm256_loadu_pd(rows[4] + i)));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(sc, acc));
    }
    if (i < n) {
        const double* tail[5] = {rows[0] + i, rows[1] + i, rows[2] + i, rows[3] + i, rows[4] + i};
        scalar::stencil5(tail, c, scale, n - i, out + i);
    }
}

FIBREFLOW_AVX2 void relax_step(std::span<const double> phi, std::span<const double> rhs,
                               double damping, double dt, std::span<double> out) {
    const std::size_t n = phi.size();
    const __m256d vd = _mm256_set1_pd(damping);
    const __m256d vt = _mm256_set1_pd(dt);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d p = _mm256_loadu_pd(phi.data() + i);
        const __m256d r = _mm256_loadu_pd(rhs.data() + i);
        const __m256d inc = _mm256_mul_pd(vt, _mm256_sub_pd(r, _mm256_mul_pd(vd, p)));
        _mm256_storeu_pd(out.data() + i, _mm256_add_pd(p, inc));
    }
    for (; i < n; ++i) out[i] = phi[i] + dt * (rhs[i] - damping * phi[i]);
}

FIBREFLOW_AVX2 double min_value(std::span<const double> x) {
    const std::size_t n = x.size();
    __m256d m = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d unord = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x.data() + i);
        unord = _mm256_or_pd(unord, _mm256_cmp_pd(v, v, _CMP_UNORD_Q));
        m = _mm256_min_pd(v, m);
    }
    bool nan = _mm256_movemask_pd(unord) != 0;
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = lanes[0];
    for (int k = 1; k < 4; ++k) r = lanes[k] < r ? lanes[k] : r;
    for (; i < n; ++i) {
        nan |= x[i] != x[i];
        r = x[i] < r ? x[i] : r;
    }
    return nan ? std::numeric_limits<double>::quiet_NaN() : r;
}

FIBREFLOW_AVX2 double max_abs(std::span<const double> x) {
    const std::size_t n = x.size();
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    __m256d unord = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x.data() + i);
        unord = _mm256_or_pd(unord, _mm256_cmp_pd(v, v, _CMP_UNORD_Q));
        m = _mm256_max_pd(_mm256_andnot_pd(sign, v), m);
    }
    bool nan = _mm256_movemask_pd(unord) != 0;
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = lanes[0];
    for (int k = 1; k < 4; ++k) r = lanes[k] > r ? lanes[k] : r;
    for (; i < n; ++i) {
        const double a = std::fabs(x[i]);
        nan |= a != a;
        r = a > r ? a : r;
    }
    if (nan) return std::numeric_limits<double>::quiet_NaN();
    return r;
}

#else  // no AVX2 target support: forward to the scalar kernels

void hermitian_eigs(HermitianSpan h, std::span<double> lo, std::span<double> hi) {
    scalar::hermitian_eigs(h, lo, hi);
}
void lincomb(double alpha, std::span<const double> x, double beta,
             std::span<const double> y, std::span<double> out) {
    scalar::lincomb(alpha, x, beta, y, out);
}
void stencil5(const double* const rows[5], const double c[5], double scale,
              std::size_t n, double* out) {
    scalar::stencil5(rows, c, scale, n, out);
}
void relax_step(std::span<const double> phi, std::span<const double> rhs,
                double damping, double dt, std::span<double> out) {
    scalar::relax_step(phi, rhs, damping, dt, out);
}
double min_value(std::span<const double> x) { return scalar::min_value(x); }
double max_abs(std::span<const double> x) { return scalar::max_abs(x); }

#endif

}  // namespace fibreflow::simd::avx2
