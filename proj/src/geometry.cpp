#include "fibreflow/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fibreflow/error.hpp"
#include "fibreflow/operators.hpp"
#include "fibreflow/simd/kernels.hpp"

namespace fibreflow {

namespace {

std::string where(const Grid& g, std::size_t n) {
    const auto c = g.coords(n);
    return "(i,j,k,l)=(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) +
           "," + std::to_string(c[3]) + ")";
}

}  // namespace

PositivityReport positivity_spectrum(const HermitianFormField& omega) {
    std::vector<double> lo, hi;
    omega.eigenvalues(lo, hi);
    PositivityReport r;
    r.min_eigenvalue = std::numeric_limits<double>::infinity();
    r.min_fiber_entry = simd::min_value(omega.a);
    for (std::size_t n = 0; n < lo.size(); ++n)
        if (lo[n] < r.min_eigenvalue) {
            r.min_eigenvalue = lo[n];
            r.argmin = n;
        }
    r.argmin_coords = omega.grid().coords(r.argmin);
    r.positive_definite = r.min_eigenvalue > 0.0;
    r.positive_on_fibers = r.min_fiber_entry > 0.0;
    return r;
}

ScalarField relative_volume_density(const HermitianFormField& omega, const HermitianFormField& base_vol) {
    if (omega.size() != base_vol.size()) throw DomainError("relative_volume_density: grid mismatch");
    ScalarField out(omega.grid_ptr());
    for (std::size_t n = 0; n < out.size(); ++n) {
        const double v = omega.a[n] * base_vol.d[n];
        if (!(v > 0.0))
            throw NumericError("relative_volume_density: degenerate metric, density " + std::to_string(v) +
                               " at " + where(omega.grid(), n));
        out[n] = v;
    }
    return out;
}

HermitianFormField ricci_of_density(const ScalarField& density, const ModulusFamily& tau) {
    ScalarField logd = density;
    for (std::size_t n = 0; n < density.size(); ++n) {
        if (!(density[n] > 0.0))
            throw DomainError("ricci_of_density: density must be positive, got " + std::to_string(density[n]) +
                              " at " + where(density.grid(), n));
        logd[n] = std::log(density[n]);
    }
    HermitianFormField h = complex_hessian(logd, tau);
    h *= -1.0;
    return h;
}

HermitianFormField relative_ricci_form(const HermitianFormField& omega, const HermitianFormField& base_vol,
                                       const ModulusFamily& tau) {
    return ricci_of_density(relative_volume_density(omega, base_vol), tau);
}

std::vector<std::size_t> region_points(const Grid& g, const Region& region) {
    check_region(g, region);
    std::vector<std::size_t> pts;
    const std::size_t per = g.points_per_base();
    auto push_base = [&](int k, int l) {
        const std::size_t b = g.index(0, 0, k, l);
        for (std::size_t q = 0; q < per; ++q) pts.push_back(b + q);
    };
    switch (region.kind) {
        case Region::Kind::whole:
            pts.resize(g.size());
            for (std::size_t n = 0; n < pts.size(); ++n) pts[n] = n;
            break;
        case Region::Kind::fiber: push_base(region.k, region.l); break;
        case Region::Kind::base_rect:
            for (int l = region.l0; l <= region.l1; ++l)
                for (int k = region.k0; k <= region.k1; ++k) push_base(k, l);
            break;
    }
    return pts;
}

ChernData chern_forms(const ScalarField& h, const ModulusFamily& tau, const Region& region) {
    ChernData out;
    out.c1 = ricci_of_density(h, tau);
    out.c1 *= -1.0 / (2.0 * std::numbers::pi);
    const Grid& g = h.grid();
    ScalarField integrand(h.grid_ptr());
    for (std::size_t n = 0; n < integrand.size(); ++n) {
        const auto c = g.coords(n);
        const double coef = out.c1.d[n];
        integrand[n] = coef * coef / g.disc_jacobian(c[2], c[3]);
    }
    out.c1_squared = integrate(integrand, region);
    return out;
}

Eigen::MatrixXcd model_metric_eval(ModelKind kind, const std::vector<cplx>& z, cplx t) {
    const std::size_t n = z.size();
    if (n == 0) throw DomainError("model_metric_eval: need at least one coordinate");
    if (t == 0.0) throw DomainError("model_metric_eval: singular locus, t = 0");
    double denom = std::log(std::norm(t));
    for (std::size_t k = 0; k < n; ++k) {
        if (z[k] == 0.0) throw DomainError("model_metric_eval: singular locus, z_" + std::to_string(k + 1) + " = 0");
        denom -= std::log(std::norm(z[k]));
    }
    if (denom == 0.0) throw DomainError("model_metric_eval: singular locus, log|t|^2 = sum log|z_k|^2");
    const double w = 1.0 / (denom * denom);
    const double inv_pi = 1.0 / std::numbers::pi;
    Eigen::MatrixXcd m(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) m(j, k) = inv_pi * w / (z[j] * std::conj(z[k]));
    for (std::size_t k = 0; k < n; ++k) {
        const double r2 = std::norm(z[k]);
        double diag = 1.0 / r2;
        if (kind == ModelKind::poincare) {
            const double lg = std::log(r2);
            diag /= lg * lg;
        }
        m(k, k) += inv_pi * diag;
    }
    return m;
}

QuasiIsometry quasi_isometry_ratio(const HermitianFormField& A, const HermitianFormField& B, const Region& region) {
    if (A.size() != B.size()) throw DomainError("quasi_isometry_ratio: grid mismatch");
    QuasiIsometry q{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t n : region_points(A.grid(), region)) {
        // B = L L^*, L = [[l11, 0], [l21, l22]]
        const double b11 = B.a[n], b22 = B.d[n];
        const cplx b12(B.br[n], B.bi[n]);
        if (!(b11 > 0.0)) throw NumericError("quasi_isometry_ratio: degenerate comparison form at " + where(B.grid(), n));
        const double l11 = std::sqrt(b11);
        const cplx l21 = std::conj(b12) / l11;
        const double s = b22 - std::norm(l21);
        if (!(s > 0.0)) throw NumericError("quasi_isometry_ratio: degenerate comparison form at " + where(B.grid(), n));
        const double l22 = std::sqrt(s);
        // M = L^{-1} A L^{-*}
        const double a11 = A.a[n], a22 = A.d[n];
        const cplx a12(A.br[n], A.bi[n]);
        const double m11 = a11 / b11;
        const cplx m21 = (std::conj(a12) - l21 * a11 / l11) / (l11 * l22);
        // row 2 of L^{-1}: (-l21/(l11 l22), 1/l22)
        const cplx r0 = -l21 / (l11 * l22);
        const double r1 = 1.0 / l22;
        // m22 = r A r^*
        const double m22 = (std::norm(r0) * a11 + r1 * r1 * a22 + 2.0 * (r0 * a12 * r1).real());
        const Hermitian2 M{m11, m22, std::conj(m21)};
        const auto e = M.eigenvalues();
        q.c_low = std::min(q.c_low, e[0]);
        q.c_high = std::max(q.c_high, e[1]);
    }
    return q;
}

HermitianFormField base_form(GridPtr g, const std::vector<double>& coefficient) {
    if (coefficient.size() != g->base_size()) throw DomainError("base_form: expected one value per base point");
    HermitianFormField out(g);
    for (std::size_t n = 0; n < out.size(); ++n) out.d[n] = coefficient[g->base_of(n)];
    return out;
}

}  // namespace fibreflow
