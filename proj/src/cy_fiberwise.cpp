#include "fibreflow/cy_fiberwise.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "fibreflow/error.hpp"
#include "fibreflow/operators.hpp"

namespace fibreflow {

namespace {

constexpr double pi = std::numbers::pi;

std::mutex fft_mutex;

// Apply the symbol of d_z dbar_z (or its inverse on nonzero modes) to one fiber.
class FiberSpectral {
public:
    FiberSpectral(int nx, int ny) : nx_(nx), ny_(ny), hx_(nx / 2 + 1) {
        std::lock_guard lock(fft_mutex);
        real_ = fftw_alloc_real(std::size_t(nx) * ny);
        spec_ = fftw_alloc_complex(std::size_t(ny) * hx_);
        fwd_ = fftw_plan_dft_r2c_2d(ny, nx, real_, spec_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_2d(ny, nx, spec_, real_, FFTW_ESTIMATE);
    }
    ~FiberSpectral() {
        std::lock_guard lock(fft_mutex);
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(spec_);
    }
    FiberSpectral(const FiberSpectral&) = delete;
    FiberSpectral& operator=(const FiberSpectral&) = delete;

    // inverse = false: out = ddbar in; inverse = true: out = ddbar^{-1} in (mean-free).
    void apply(const double* in, double* out, cplx tau, bool inverse) {
        const std::size_t n = std::size_t(nx_) * ny_;
        std::copy(in, in + n, real_);
        fftw_execute(fwd_);
        const double b = tau.imag();
        for (int j = 0; j < ny_; ++j) {
            const int l = j <= ny_ / 2 ? j : j - ny_;
            for (int i = 0; i < hx_; ++i) {
                const int k = i;
                fftw_complex& c = spec_[std::size_t(j) * hx_ + i];
                double m = 0.0;
                const bool nyquist = (k == nx_ / 2) || (j == ny_ / 2);
                if (!(k == 0 && l == 0) && !nyquist) {
                    const double sym = -pi * pi * std::norm(double(l) - double(k) * tau) / (b * b);
                    m = inverse ? 1.0 / sym : sym;
                }
                m /= double(n);
                c[0] *= m;
                c[1] *= m;
            }
        }
        fftw_execute(bwd_);
        std::copy(real_, real_ + n, out);
    }

private:
    int nx_, ny_, hx_;
    double* real_;
    fftw_complex* spec_;
    fftw_plan fwd_, bwd_;
};

}  // namespace

FiberField extract_fiber(const Grid& g, const std::vector<double>& f, int k, int l) {
    FiberField out;
    if (!g.full()) {
        out.values = {f[g.base_index(k, l)]};
        return out;
    }
    out.nx = g.nx();
    out.ny = g.ny();
    const std::size_t base = g.index(0, 0, k, l);
    out.values.assign(f.begin() + base, f.begin() + base + g.fiber_size());
    return out;
}

FiberField fiber_ricci_potential(const Fibration& fib, const HermitianFormField& omega0, int k, int l) {
    const Grid& g = *fib.grid;
    check_region(g, Region::fiber(k, l));
    FiberField a = extract_fiber(g, omega0.a, k, l);
    const double b = fib.tau[g.base_index(k, l)].tau.imag();
    const double cell = g.full() ? g.hx() * g.hy() : 1.0;
    double area = 0.0, mass = 0.0;
    FiberField F = a;
    for (std::size_t q = 0; q < a.values.size(); ++q) {
        if (!(a.values[q] > 0.0))
            throw SolverError("fiber_ricci_potential: omega_0 not positive on fiber (" + std::to_string(k) + "," +
                                  std::to_string(l) + ")",
                              a.values[q]);
        F.values[q] = -std::log(a.values[q]);
        area += a.values[q] * 2.0 * b * cell;
        mass += std::exp(F.values[q]) * a.values[q] * 2.0 * b * cell;
    }
    const double c = std::log(area / mass);
    for (double& f : F.values) f += c;
    double res = 0.0;
    for (std::size_t q = 0; q < a.values.size(); ++q)
        res += (std::exp(F.values[q]) - 1.0) * a.values[q] * 2.0 * b * cell;
    if (!(std::abs(res) < 1e-10 * std::max(1.0, area)))
        throw SolverError("fiber_ricci_potential: normalization not attained", res);
    return F;
}

FiberSolve fiberwise_cy_solve(const Fibration& fib, const HermitianFormField& omega0, double tolerance) {
    const Grid& g = *fib.grid;
    FiberSolve out;
    out.rho = ScalarField(fib.grid);
    out.constant.assign(g.base_size(), 0.0);
    out.residual.assign(g.base_size(), 0.0);
    out.normalization.assign(g.base_size(), 0.0);

    if (g.full()) {
        FiberSpectral sp(g.nx(), g.ny());
        const std::size_t nf = g.fiber_size();
        const double cell = g.hx() * g.hy();
        std::vector<double> rhs(nf), rho(nf), check(nf);
        for (int l = 0; l < g.nv(); ++l)
            for (int k = 0; k < g.nu(); ++k) {
                const std::size_t bi = g.base_index(k, l);
                const cplx tau = fib.tau[bi].tau;
                const double b = tau.imag();
                const double* g0 = omega0.a.data() + g.index(0, 0, k, l);
                double area = 0.0;
                for (std::size_t q = 0; q < nf; ++q) {
                    if (!(g0[q] > 0.0))
                        throw SolverError("fiberwise_cy_solve: omega_0 not positive on fiber (" + std::to_string(k) +
                                              "," + std::to_string(l) + ")",
                                          g0[q]);
                    area += g0[q] * 2.0 * b * cell;
                }
                const double flat = area / (2.0 * b);
                for (std::size_t q = 0; q < nf; ++q) rhs[q] = flat - g0[q];
                sp.apply(rhs.data(), rho.data(), tau, true);
                double m = 0.0;
                for (std::size_t q = 0; q < nf; ++q) m += rho[q] * g0[q] * 2.0 * b * cell;
                const double c = -m / area;
                for (double& r : rho) r += c;
                sp.apply(rho.data(), check.data(), tau, false);
                double res = 0.0, norm = 0.0;
                for (std::size_t q = 0; q < nf; ++q) {
                    res = std::max(res, std::abs(g0[q] + check[q] - flat));
                    norm += rho[q] * g0[q] * 2.0 * b * cell;
                }
                if (!(res <= tolerance * std::max(1.0, flat)))
                    throw SolverError("fiberwise_cy_solve: residual above tolerance on fiber (" + std::to_string(k) +
                                          "," + std::to_string(l) + ")",
                                      res);
                std::copy(rho.begin(), rho.end(), out.rho.values().begin() + g.index(0, 0, k, l));
                out.constant[bi] = c;
                out.residual[bi] = res;
                out.normalization[bi] = norm;
            }
        out.omega_srf = omega0 + complex_hessian(out.rho, fib.modulus());
    } else {
        // Fiber-constant data: every fiber is already flat and rho_y = 0.
        out.omega_srf = omega0;
    }
    return out;
}

std::vector<double> unit_area_fiber_density(const Fibration& fib, const HermitianFormField& omega) {
    const Grid& g = *fib.grid;
    std::vector<double> out(omega.size());
    std::vector<double> area(g.base_size(), 0.0);
    for (int l = 0; l < g.nv(); ++l)
        for (int k = 0; k < g.nu(); ++k) {
            const double b = fib.tau[g.base_index(k, l)].tau.imag();
            double s = 0.0;
            for (double v : extract_fiber(g, omega.a, k, l).values) s += v;
            s *= 2.0 * b / double(g.points_per_base());
            if (!(s > 0.0)) throw NumericError("unit_area_fiber_density: degenerate fiber metric");
            area[g.base_index(k, l)] = s;
        }
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = omega.a[n] / area[g.base_of(n)];
    return out;
}

double fiber_ricci_sup(const Fibration& fib, const HermitianFormField& omega) {
    const Grid& g = *fib.grid;
    if (!g.full()) return 0.0;
    FiberSpectral sp(g.nx(), g.ny());
    std::vector<double> lg(g.fiber_size()), out(g.fiber_size());
    double sup = 0.0;
    for (int l = 0; l < g.nv(); ++l)
        for (int k = 0; k < g.nu(); ++k) {
            const double* a = omega.a.data() + g.index(0, 0, k, l);
            for (std::size_t q = 0; q < lg.size(); ++q) lg[q] = std::log(a[q]);
            sp.apply(lg.data(), out.data(), fib.tau[g.base_index(k, l)].tau, false);
            for (double v : out) sup = std::max(sup, std::abs(v));
        }
    return sup;
}

FoliationReport foliation_kernel(const HermitianFormField& omega, KernelSubspace subspace) {
    FoliationReport r;
    const std::size_t n = omega.size();
    std::vector<double> lo, hi;
    if (subspace == KernelSubspace::full) {
        omega.eigenvalues(lo, hi);
    } else {
        lo = omega.a;
        hi = omega.a;
    }
    double emax = 0.0;
    for (std::size_t i = 0; i < n; ++i) emax = std::max(emax, std::abs(hi[i]));
    r.threshold = 1e-9 * emax;
    r.kernel_dim.resize(n);
    r.min_eigenvalue = lo;
    r.min_trace = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (lo[i] < -r.threshold)
            throw NumericError("foliation_kernel: form is not semidefinite on the chosen subspace (eigenvalue " +
                               std::to_string(lo[i]) + ")");
        int dim = 0;
        if (lo[i] <= r.threshold) ++dim;
        if (subspace == KernelSubspace::full && hi[i] <= r.threshold) ++dim;
        r.kernel_dim[i] = dim;
        ++r.rank_profile[dim];
        if (dim > 0) r.degeneracy_locus.push_back(i);
        const double det = subspace == KernelSubspace::full ? omega.at(i).det() : omega.a[i];
        const double tr = subspace == KernelSubspace::full ? omega.at(i).trace() : omega.a[i];
        r.max_abs_det = std::max(r.max_abs_det, std::abs(det));
        r.min_trace = std::min(r.min_trace, tr);
        if (i > 0 && dim != r.kernel_dim[0]) r.constant_rank = false;
    }
    return r;
}

}  // namespace fibreflow
