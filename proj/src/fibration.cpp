#include "fibreflow/fibration.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fibreflow/cy_fiberwise.hpp"
#include "fibreflow/error.hpp"
#include "fibreflow/operators.hpp"

namespace fibreflow {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double mode_value(const ReferenceMode& m, const Grid& g, double x, double y, double u, double v) {
    double val = std::cos(two_pi * (m.mx * x + m.my * y + m.mu * u));
    if (m.mv > 0) {
        const double s = std::sin(std::numbers::pi * m.mv * (v - g.v_min()) / (g.v_max() - g.v_min()));
        val *= s * s;
    }
    return val;
}

}  // namespace

void FibrationSpec::validate() const {
    grid.validate();
    if (!(reference.scale > 0.0)) throw ConfigError("reference.scale: must be positive");
    if (!std::isfinite(reference.amplitude)) throw ConfigError("reference.amplitude: must be finite");
    for (const auto& m : reference.modes) {
        if (grid.mode == GridMode::symmetric && (m.mx != 0 || m.my != 0))
            throw ConfigError("reference.modes: fiber-dependent modes need grid.mode = full");
        if (m.mv < 0) throw ConfigError("reference.modes: the v bump index must be >= 0");
    }
    if (!(base_metric.scale > 0.0)) throw ConfigError("base.metric_scale: must be positive");
    if (modulus.kind() == ModulusKind::affine && grid.base == BaseKind::strip && modulus.slope().imag() != 0.0)
        throw ConfigError("modulus.c_im: affine slope must be real on a strip (tau must be periodic in u)");
    if (divisor) {
        if (!(divisor->beta > 0.0 && divisor->beta <= 1.0)) throw ConfigError("divisor.beta: must lie in (0,1]");
        if (!(divisor->epsilon > 0.0)) throw ConfigError("divisor.epsilon: must be positive");
        if (!std::isfinite(divisor->delta) || divisor->delta < 0.0) throw ConfigError("divisor.delta: must be >= 0");
    }
}

double Fibration::section_norm2(int k, int l) const { return section_norm2_at(grid->disc(k, l)); }

double Fibration::section_norm2_at(cplx s) const {
    if (!spec.divisor) return 1.0;
    const cplx s0 = spec.divisor->s0;
    if (grid->spec().base == BaseKind::annulus) return std::norm(s - s0);
    // strip with periodic u: the section must be periodic too, so use
    // (e^{2 pi i (s - s0)} - 1) / (2 pi i), which behaves like s - s0 near s0
    const double two_pi = 2.0 * std::numbers::pi;
    return std::norm(std::exp(cplx(0.0, two_pi) * (s - s0)) - 1.0) / (two_pi * two_pi);
}

HermitianFormField semiflat_form(const Grid& g, const GridPtr& gp, const std::vector<ModulusSample>& tau,
                                 double scale) {
    HermitianFormField out(gp);
    for (std::size_t n = 0; n < out.size(); ++n) {
        const auto c = g.coords(n);
        const ModulusSample& m = tau[g.base_of(n)];
        const double b = m.tau.imag();
        const double k = scale / (2.0 * b);
        out.a[n] = k;
        if (g.full()) {
            const double y = g.y(c[1]);
            const cplx off = -y * std::conj(m.dtau) * k;
            out.br[n] = off.real();
            out.bi[n] = off.imag();
            out.d[n] = y * y * std::norm(m.dtau) * k;
        }
    }
    return out;
}

Fibration build_fibration(const FibrationSpec& spec) {
    spec.validate();
    Fibration fib;
    fib.spec = spec;
    fib.grid = make_grid(spec.grid);
    const Grid& g = *fib.grid;

    fib.tau.resize(g.base_size());
    for (int l = 0; l < g.nv(); ++l)
        for (int k = 0; k < g.nu(); ++k) {
            const ModulusSample m = spec.modulus.at_w(g.w(k, l), spec.grid.base);
            if (!(m.tau.imag() > 0.0) || !std::isfinite(m.tau.imag()))
                throw ConfigError("modulus domain: Im tau = " + std::to_string(m.tau.imag()) + " <= 0 at (u,v)=(" +
                                  std::to_string(g.u(k)) + "," + std::to_string(g.v(l)) + ") for family " +
                                  spec.modulus.name());
            fib.tau[g.base_index(k, l)] = m;
        }

    const auto& ref = spec.reference;
    if (ref.kind == ReferenceKind::semiflat) {
        fib.fiber_form = semiflat_form(g, fib.grid, fib.tau, ref.scale);
    } else {
        const double vmid = 0.5 * (g.v_min() + g.v_max());
        const double bref = spec.modulus.at_w(cplx(0.0, vmid), spec.grid.base).tau.imag();
        fib.fiber_form = HermitianFormField(fib.grid);
        for (auto& a : fib.fiber_form.a) a = ref.scale / (2.0 * bref);
    }

    fib.eta = ScalarField::sample(fib.grid, [&](double x, double y, double u, double v) {
        double s = 0.0;
        for (const auto& m : ref.modes) s += mode_value(m, g, x, y, u, v);
        return ref.amplitude * s;
    });

    std::vector<double> can(g.base_size());
    for (int l = 0; l < g.nv(); ++l)
        for (int k = 0; k < g.nu(); ++k) {
            const double v = g.v(l);
            double c = spec.base_metric.scale;
            if (spec.base_metric.kind == BaseMetricKind::hyperbolic) {
                if (!(v > 0.0)) throw ConfigError("base.metric: hyperbolic base metric needs v > 0 on the whole base");
                c /= 2.0 * v * v;
            }
            can[g.base_index(k, l)] = c;
        }
    fib.omega_can = base_form(fib.grid, can);

    fib.omega0 = fib.fiber_form + fib.omega_can;
    if (ref.amplitude != 0.0 && !ref.modes.empty()) fib.omega0 += complex_hessian(fib.eta, spec.modulus);
    fib.omega0.check_finite("build_fibration");
    fib.omega0_positivity = positivity_spectrum(fib.omega0);
    if (!fib.omega0_positivity.positive_on_fibers)
        throw ConfigError("reference: omega_0 is not positive on fibers (min fiber entry " +
                          std::to_string(fib.omega0_positivity.min_fiber_entry) + ")");
    return fib;
}

ScalarField semiflat_potential(const Fibration& fib) {
    const Grid& g = *fib.grid;
    if (!g.full()) throw DomainError("semiflat_potential: the potential depends on y, use grid.mode = full");
    ScalarField p(fib.grid);
    for (std::size_t n = 0; n < p.size(); ++n) {
        const double y = g.y(g.coords(n)[1]);
        p[n] = fib.fiber_area() * y * y * fib.tau_at(n).tau.imag();
    }
    p.set_periodic(axis_y, false);
    return p;
}

cplx disc_from_q(const Fibration& fib, cplx q) {
    if (fib.modulus().kind() == ModulusKind::nome_log && fib.spec.grid.base == BaseKind::strip)
        return std::log(q) / cplx(0.0, two_pi);
    return q;
}

bool increments_diverge(const std::vector<double>& p) {
    if (p.size() < 3) throw DomainError("divergence test: need at least 3 partial values");
    const double d1 = p[p.size() - 2] - p[p.size() - 3];
    const double d2 = p[p.size() - 1] - p[p.size() - 2];
    const double tol = 1e-12 * std::max(1.0, std::abs(p.back()));
    if (!(d2 > tol)) return false;
    if (!(d1 > tol)) return true;
    return d2 / d1 >= 0.5;
}

SttMeasure stt_measure(const Fibration& fib, const HermitianFormField& omega_srf) {
    const Grid& g = *fib.grid;
    SttMeasure out;
    out.density = ScalarField(fib.grid);
    // (i/2) dz ^ dzbar has fiber volume Im tau against the unit-area omega_SRF.
    const std::vector<double> unit = unit_area_fiber_density(fib, omega_srf);
    for (std::size_t n = 0; n < out.density.size(); ++n) {
        const auto c = g.coords(n);
        out.density[n] = 1.0 / (2.0 * unit[n] * fib.section_norm2(c[2], c[3]));
    }

    constexpr int collars = 5;
    constexpr int radial = 16, angular = 32;
    for (int j = 1; j <= collars; ++j) {
        const double r_out = std::pow(10.0, -j), r_in = std::pow(10.0, -(j + 1));
        double sup = -std::numeric_limits<double>::infinity();
        for (int a = 0; a <= radial; ++a) {
            const double r = r_out * std::pow(r_in / r_out, double(a) / radial);
            for (int t = 0; t < angular; ++t) {
                const cplx q = std::polar(r, two_pi * (t + 0.5) / angular);
                const ModulusSample m = fib.modulus().at_q(q);
                double dens = m.tau.imag();
                dens /= fib.section_norm2_at(disc_from_q(fib, q));
                sup = std::max(sup, dens);
            }
        }
        out.collar_radius.push_back(r_out);
        out.collar_sup.push_back(sup);
    }
    out.bounded = !increments_diverge(out.collar_sup);
    return out;
}

}  // namespace fibreflow
