#pragma once
// Pointwise kernels used by the field algebra and the flow stepper.
//
// Every kernel has a scalar reference implementation and an AVX2 variant.
// The AVX2 variants use the same operation order as the scalar code and no
// fused multiply-add, so both backends produce bit-identical results.

#include <cstddef>
#include <span>
#include <string_view>

namespace fibreflow::simd {

enum class Backend { scalar, avx2 };

/// Backend chosen at first use: AVX2 when the CPU supports it, unless the
/// environment variable FIBREFLOW_SIMD=scalar is set.
Backend active_backend();
void set_backend(Backend b);  // throws ConfigError if b is unsupported
bool avx2_supported();
std::string_view backend_name(Backend b);

struct HermitianSpan {
    std::span<const double> a;   // fiber-fiber entry
    std::span<const double> d;   // base-base entry
    std::span<const double> br;  // Re g_{z wbar}
    std::span<const double> bi;  // Im g_{z wbar}
};

// lo[i], hi[i] = eigenvalues of [[a, b], [conj b, d]]
void hermitian_eigs(HermitianSpan h, std::span<double> lo, std::span<double> hi);

// out = alpha * x + beta * y
void lincomb(double alpha, std::span<const double> x, double beta,
             std::span<const double> y, std::span<double> out);

// out[i] = scale * sum_j c[j] * rows[j][i], j = 0..4, accumulated left to right
void stencil5(const double* const rows[5], const double c[5], double scale,
              std::size_t n, double* out);

// out = phi + dt * (rhs - damping * phi)
void relax_step(std::span<const double> phi, std::span<const double> rhs,
                double damping, double dt, std::span<double> out);

// min over i of x[i]; returns +inf for empty input
double min_value(std::span<const double> x);
double max_abs(std::span<const double> x);

namespace scalar {
void hermitian_eigs(HermitianSpan h, std::span<double> lo, std::span<double> hi);
void lincomb(double alpha, std::span<const double> x, double beta,
             std::span<const double> y, std::span<double> out);
void stencil5(const double* const rows[5], const double c[5], double scale,
              std::size_t n, double* out);
void relax_step(std::span<const double> phi, std::span<const double> rhs,
                double damping, double dt, std::span<double> out);
double min_value(std::span<const double> x);
double max_abs(std::span<const double> x);
}  // namespace scalar

namespace avx2 {
void hermitian_eigs(HermitianSpan h, std::span<double> lo, std::span<double> hi);
void lincomb(double alpha, std::span<const double> x, double beta,
             std::span<const double> y, std::span<double> out);
void stencil5(const double* const rows[5], const double c[5], double scale,
              std::size_t n, double* out);
void relax_step(std::span<const double> phi, std::span<const double> rhs,
                double damping, double dt, std::span<double> out);
double min_value(std::span<const double> x);
double max_abs(std::span<const double> x);
}  // namespace avx2

}  // namespace fibreflow::simd
