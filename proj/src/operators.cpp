#include "fibreflow/operators.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "fibreflow/error.hpp"
#include "fibreflow/simd/kernels.hpp"

namespace fibreflow {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// One reusable r2c/c2r plan pair per line length.
struct LinePlan {
    int n;
    double* real;
    fftw_complex* spec;
    fftw_plan fwd;
    fftw_plan bwd;

    explicit LinePlan(int len) : n(len) {
        real = fftw_alloc_real(n);
        spec = fftw_alloc_complex(n / 2 + 1);
        fwd = fftw_plan_dft_r2c_1d(n, real, spec, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(n, spec, real, FFTW_ESTIMATE);
    }
    ~LinePlan() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(spec);
    }
    LinePlan(const LinePlan&) = delete;
    LinePlan& operator=(const LinePlan&) = delete;
};

std::mutex plan_mutex;

LinePlan& line_plan(int n) {
    static std::map<int, std::unique_ptr<LinePlan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<LinePlan>(n);
    return *slot;
}

void spectral_axis(const double* f, double* out, std::size_t total, std::size_t stride, int n, int order) {
    std::lock_guard lock(plan_mutex);
    LinePlan& p = line_plan(n);
    const std::size_t block = stride * std::size_t(n);
    const std::size_t outer = total / block;
    const int half = n / 2;
    std::vector<std::complex<double>> mult(half + 1);
    for (int k = 0; k <= half; ++k) {
        const double w = two_pi * k;
        if (order == 1)
            mult[k] = (k == half) ? 0.0 : std::complex<double>(0.0, w);
        else
            mult[k] = -w * w;
        mult[k] /= double(n);
    }
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t s = 0; s < stride; ++s) {
            const std::size_t base = o * block + s;
            for (int q = 0; q < n; ++q) p.real[q] = f[base + q * stride];
            fftw_execute(p.fwd);
            for (int k = 0; k <= half; ++k) {
                const std::complex<double> c(p.spec[k][0], p.spec[k][1]);
                const std::complex<double> r = c * mult[k];
                p.spec[k][0] = r.real();
                p.spec[k][1] = r.imag();
            }
            fftw_execute(p.bwd);
            for (int q = 0; q < n; ++q) out[base + q * stride] = p.real[q];
        }
    }
}

// 4th-order stencils, coefficients over 12 h^order.
constexpr double d1_interior[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
constexpr double d2_interior[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
constexpr double d1_edge0[5] = {-25.0, 48.0, -36.0, 16.0, -3.0};
constexpr double d1_edge1[5] = {-3.0, -10.0, 18.0, -6.0, 1.0};
constexpr double d2_edge0[6] = {45.0, -154.0, 214.0, -156.0, 61.0, -10.0};
constexpr double d2_edge1[6] = {10.0, -15.0, -4.0, 14.0, -6.0, 1.0};

void fd_axis(const double* f, double* out, std::size_t total, std::size_t stride, int n, int order, double h) {
    const std::size_t block = stride * std::size_t(n);
    const std::size_t outer = total / block;
    const double scale = order == 1 ? 1.0 / (12.0 * h) : 1.0 / (12.0 * h * h);
    const double* ci = order == 1 ? d1_interior : d2_interior;
    const int width = order == 1 ? 5 : 6;
    const double* e0 = order == 1 ? d1_edge0 : d2_edge0;
    const double* e1 = order == 1 ? d1_edge1 : d2_edge1;
    const double mirror = order == 1 ? -1.0 : 1.0;

    for (std::size_t o = 0; o < outer; ++o) {
        const double* fb = f + o * block;
        double* ob = out + o * block;
        for (int p = 2; p < n - 2; ++p) {
            const double* rows[5] = {fb + (p - 2) * stride, fb + (p - 1) * stride, fb + p * stride,
                                     fb + (p + 1) * stride, fb + (p + 2) * stride};
            simd::stencil5(rows, ci, scale, stride, ob + p * stride);
        }
        for (std::size_t s = 0; s < stride; ++s) {
            auto at = [&](int q) { return fb[q * stride + s]; };
            double lo0 = 0.0, lo1 = 0.0, hi0 = 0.0, hi1 = 0.0;
            for (int j = 0; j < width; ++j) {
                lo0 += e0[j] * at(j);
                lo1 += e1[j] * at(j);
                hi0 += e0[j] * at(n - 1 - j);
                hi1 += e1[j] * at(n - 1 - j);
            }
            ob[s] = scale * lo0;
            ob[stride + s] = scale * lo1;
            ob[(n - 1) * stride + s] = mirror * scale * hi0;
            ob[(n - 2) * stride + s] = mirror * scale * hi1;
        }
    }
}

}  // namespace

std::vector<double> derivative(const Grid& g, const std::vector<double>& f, int axis, int order,
                               bool periodic) {
    if (order != 1 && order != 2) throw DomainError("derivative: order must be 1 or 2");
    if (f.size() != g.size()) throw DomainError("derivative: field does not match grid");
    std::vector<double> out(f.size(), 0.0);
    if (!g.stores_axis(axis)) return out;
    const int n = g.axis_length(axis);
    const std::size_t stride = g.axis_stride(axis);
    if (periodic && axis != axis_v) {
        spectral_axis(f.data(), out.data(), f.size(), stride, n, order);
    } else {
        const double h = axis == axis_v ? g.hv() : 1.0 / n;
        fd_axis(f.data(), out.data(), f.size(), stride, n, order, h);
    }
    return out;
}

std::vector<double> derivative(const ScalarField& f, int axis, int order) {
    return derivative(f.grid(), f.values(), axis, order, f.periodic(axis));
}

std::array<std::array<cplx, 4>, 2> FrameJacobian::coframe() const {
    const cplx ty = dtau * y;
    const cplx I(0.0, 1.0);
    return {{{cplx(1.0), tau, ty, I * ty}, {cplx(0.0), cplx(0.0), cplx(1.0), I}}};
}

std::array<std::array<cplx, 4>, 2> FrameJacobian::frame() const {
    const double b = tau.imag();
    const cplx inv = 1.0 / cplx(0.0, 2.0 * b);  // 1 / (2 i b)
    const cplx ty = dtau * y;
    return {{{-std::conj(tau) * inv, inv, cplx(0.0), cplx(0.0)},
             {std::conj(tau) * ty * inv, -ty * inv, cplx(0.5), cplx(0.0, -0.5)}}};
}

std::array<std::array<cplx, 2>, 4> FrameJacobian::connection() const {
    const double b = tau.imag();
    const double b2 = b * b;
    const double R = tau.real();
    const double n2 = std::norm(dtau);
    const cplx zw_x = tau * std::conj(dtau) / (4.0 * b2);
    const cplx zw_y = -std::conj(dtau) / (4.0 * b2);
    return {{{cplx(0.0), cplx(0.0)},
             {zw_x, zw_y},
             {std::conj(zw_x), std::conj(zw_y)},
             {cplx(-y * n2 * R / (2.0 * b2)), cplx(y * n2 / (2.0 * b2))}}};
}

FrameJacobian frame_at(const Grid& g, const ModulusFamily& tau, std::size_t idx) {
    const auto c = g.coords(idx);
    const ModulusSample m = tau.at_w(g.w(c[2], c[3]), g.spec().base);
    return {m.tau, m.dtau, g.full() ? g.y(c[1]) : 0.0};
}

HermitianFormField complex_hessian(const ScalarField& f, const ModulusFamily& tau) {
    const Grid& g = f.grid();
    HermitianFormField H(f.grid_ptr());
    if (!g.full()) {
        const auto fuu = derivative(f, axis_u, 2);
        const auto fvv = derivative(f, axis_v, 2);
        for (std::size_t n = 0; n < f.size(); ++n) H.d[n] = 0.25 * (fuu[n] + fvv[n]);
        H.check_finite("complex_hessian");
        return H;
    }

    std::array<std::vector<double>, 4> d1;
    for (int a = 0; a < 4; ++a) d1[a] = derivative(f, a, 1);
    std::array<std::array<std::vector<double>, 4>, 4> d2;
    for (int a = 0; a < 4; ++a) {
        d2[a][a] = derivative(f, a, 2);
        for (int b = a + 1; b < 4; ++b) {
            d2[a][b] = derivative(g, d1[a], b, 1, f.periodic(b));
        }
    }
    auto second = [&](int a, int b, std::size_t n) { return a <= b ? d2[a][b][n] : d2[b][a][n]; };

    for (std::size_t n = 0; n < f.size(); ++n) {
        const FrameJacobian J = frame_at(g, tau, n);
        const auto V = J.frame();
        const auto C = J.connection();
        cplx h[2][2];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                cplx s = 0.0;
                for (int a = 0; a < 4; ++a) {
                    if (V[i][a] == 0.0) continue;
                    for (int b = 0; b < 4; ++b) s += V[i][a] * std::conj(V[j][b]) * second(a, b, n);
                }
                s += C[2 * i + j][0] * d1[axis_x][n] + C[2 * i + j][1] * d1[axis_y][n];
                h[i][j] = s;
            }
        H.a[n] = h[0][0].real();
        H.d[n] = h[1][1].real();
        const cplx b = 0.5 * (h[0][1] + std::conj(h[1][0]));
        H.br[n] = b.real();
        H.bi[n] = b.imag();
    }
    H.check_finite("complex_hessian");
    return H;
}

double fiber_integral(const Grid& g, const std::vector<double>& f, int k, int l) {
    if (!g.full()) return f[g.base_index(k, l)];
    const std::size_t base = g.index(0, 0, k, l);
    double s = 0.0;
    for (std::size_t q = 0; q < g.fiber_size(); ++q) s += f[base + q];
    return s * g.hx() * g.hy();
}

double integrate(const ScalarField& f, const Region& region) {
    const Grid& g = f.grid();
    check_region(g, region);
    if (region.kind == Region::Kind::fiber) return fiber_integral(g, f.values(), region.k, region.l);

    int k0 = 0, k1 = g.nu() - 1, l0 = 0, l1 = g.nv() - 1;
    if (region.kind == Region::Kind::base_rect) {
        k0 = region.k0;
        k1 = region.k1;
        l0 = region.l0;
        l1 = region.l1;
    }
    const bool full_u = (k0 == 0 && k1 == g.nu() - 1);
    const double hu = g.hu();
    const double hv = g.hv();
    double total = 0.0;
    for (int l = l0; l <= l1; ++l) {
        const double wv = (l1 == l0) ? 1.0 : ((l == l0 || l == l1) ? 0.5 * hv : hv);
        double row = 0.0;
        for (int k = k0; k <= k1; ++k) {
            const double wu = full_u ? hu : (k1 == k0 ? 1.0 : ((k == k0 || k == k1) ? 0.5 * hu : hu));
            row += wu * fiber_integral(g, f.values(), k, l);
        }
        total += wv * row;
    }
    return total;
}

}  // namespace fibreflow
