#include "fibreflow/simd/kernels.hpp"

#include <cmath>
#include <limits>

namespace fibreflow::simd::scalar {

void hermitian_eigs(HermitianSpan h, std::span<double> lo, std::span<double> hi) {
    const std::size_t n = h.a.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double m = (h.a[i] + h.d[i]) * 0.5;
        const double s = (h.a[i] - h.d[i]) * 0.5;
        const double b2 = h.br[i] * h.br[i] + h.bi[i] * h.bi[i];
        const double r = std::sqrt(s * s + b2);
        lo[i] = m - r;
        hi[i] = m + r;
    }
}

void lincomb(double alpha, std::span<const double> x, double beta,
             std::span<const double> y, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = alpha * x[i] + beta * y[i];
}

void stencil5(const double* const rows[5], const double c[5], double scale,
              std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = c[0] * rows[0][i];
        acc = acc + c[1] * rows[1][i];
        acc = acc + c[2] * rows[2][i];
        acc = acc + c[3] * rows[3][i];
        acc = acc + c[4] * rows[4][i];
        out[i] = scale * acc;
    }
}

void relax_step(std::span<const double> phi, std::span<const double> rhs,
                double damping, double dt, std::span<double> out) {
    for (std::size_t i = 0; i < phi.size(); ++i)
        out[i] = phi[i] + dt * (rhs[i] - damping * phi[i]);
}

double min_value(std::span<const double> x) {
    double m = std::numeric_limits<double>::infinity();
    bool nan = false;
    for (double v : x) {
        nan |= v != v;
        m = v < m ? v : m;
    }
    return nan ? std::numeric_limits<double>::quiet_NaN() : m;
}

double max_abs(std::span<const double> x) {
    double m = 0.0;
    bool nan = false;
    for (double v : x) {
        const double a = std::fabs(v);
        nan |= a != a;
        m = a > m ? a : m;
    }
    return nan ? std::numeric_limits<double>::quiet_NaN() : m;
}

}  // namespace fibreflow::simd::scalar
