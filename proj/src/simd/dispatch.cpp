#include "fibreflow/error.hpp"
#include "fibreflow/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace fibreflow::simd {

namespace {

Backend detect() {
    const char* env = std::getenv("FIBREFLOW_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return Backend::scalar;
    return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& slot() {
    static std::atomic<Backend> b{detect()};
    return b;
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Backend active_backend() { return slot().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
    if (b == Backend::avx2 && !avx2_supported())
        throw ConfigError("AVX2 backend requested but the CPU does not support AVX2");
    slot().store(b, std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

void hermitian_eigs(HermitianSpan h, std::span<double> lo, std::span<double> hi) {
    if (active_backend() == Backend::avx2) return avx2::hermitian_eigs(h, lo, hi);
    scalar::hermitian_eigs(h, lo, hi);
}

void lincomb(double alpha, std::span<const double> x, double beta,
             std::span<const double> y, std::span<double> out) {
    if (active_backend() == Backend::avx2) return avx2::lincomb(alpha, x, beta, y, out);
    scalar::lincomb(alpha, x, beta, y, out);
}

void stencil5(const double* const rows[5], const double c[5], double scale,
              std::size_t n, double* out) {
    if (active_backend() == Backend::avx2) return avx2::stencil5(rows, c, scale, n, out);
    scalar::stencil5(rows, c, scale, n, out);
}

void relax_step(std::span<const double> phi, std::span<const double> rhs,
                double damping, double dt, std::span<double> out) {
    if (active_backend() == Backend::avx2) return avx2::relax_step(phi, rhs, damping, dt, out);
    scalar::relax_step(phi, rhs, damping, dt, out);
}

double min_value(std::span<const double> x) {
    return active_backend() == Backend::avx2 ? avx2::min_value(x) : scalar::min_value(x);
}

double max_abs(std::span<const double> x) {
    return active_backend() == Backend::avx2 ? avx2::max_abs(x) : scalar::max_abs(x);
}

}  // namespace fibreflow::simd
