#include <algorithm>
#include <cmath>
#include <limits>

#include "fibreflow/analysis.hpp"
#include "fibreflow/error.hpp"
#include "fibreflow/geometry.hpp"

namespace fibreflow {

namespace {

constexpr double truncation_levels[3] = {1e-1, 1e-2, 1e-4};
// int over the unit fiber square of (i/2) dz ^ dzbar with dz = dx + tau dy; the
// dx ^ dy coefficient is constant on the fiber.
double fiber_volume(cplx tau) {
    const cplx wedge = cplx(0.0, 0.5) * (std::conj(tau) - tau);
    return wedge.real();
}

double max_second_difference(const std::vector<double>& rho, const std::vector<double>& v) {
    double m = 0.0;
    for (std::size_t i = 1; i + 1 < rho.size(); ++i) {
        const double h0 = rho[i] - rho[i - 1], h1 = rho[i + 1] - rho[i];
        const double d = 2.0 * ((v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0) / (h0 + h1);
        // rounding in v alone produces differences of order eps |v| / (h0 h1)
        const double scale = std::max({std::abs(v[i - 1]), std::abs(v[i]), std::abs(v[i + 1])});
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale / (h0 * h1);
        if (std::abs(d) > floor) m = std::max(m, std::abs(d));
    }
    return m;
}

}  // namespace

VolumeProbe fiber_volume_probe(const Fibration& fib, bool weighted) {
    if (weighted && !fib.spec.divisor) throw ConfigError("volume: the weighted probe needs divisor data");
    VolumeProbe p;
    p.weighted = weighted;
    const ModulusFamily& tau = fib.modulus();
    auto V = [&](double rho) {
        const cplx q(0.0, rho);
        double v = fiber_volume(tau.at_q(q).tau);
        if (weighted) v /= fib.section_norm2_at(disc_from_q(fib, q));
        return v;
    };

    const Grid& g = *fib.grid;
    p.grid_volume.resize(g.base_size());
    for (std::size_t b = 0; b < p.grid_volume.size(); ++b) {
        p.grid_volume[b] = fiber_volume(fib.tau[b].tau);
        if (weighted) {
            const int k = int(b % g.nu()), l = int(b / g.nu());
            p.grid_volume[b] /= fib.section_norm2(k, l);
        }
    }

    p.truncations.assign(std::begin(truncation_levels), std::end(truncation_levels));
    constexpr int per_decade = 32;
    for (double trunc : truncation_levels) {
        const double s0 = -1.0, s1 = std::log(trunc);
        const int n = std::max(8, int(std::ceil((s0 - s1) / std::log(10.0) * per_decade)));
        std::vector<double> rho(n + 1), v(n + 1);
        for (int i = 0; i <= n; ++i) {
            rho[i] = std::exp(s1 + (s0 - s1) * i / n);
            v[i] = V(rho[i]);
        }
        p.end_values.push_back(v.front());
        p.divided_diff_max.push_back(max_second_difference(rho, v));
        p.rho = rho;
        p.volume = v;
    }
    p.continuous = !increments_diverge(p.end_values);
    p.smooth = p.continuous && !increments_diverge(p.divided_diff_max);
    return p;
}

double bmy_prefactor(int n, int m) {
    if (n <= m) throw DomainError("bmy: need n > m");
    return 2.0 * (n - m + 1) / double(n - m);
}

BmyResult bmy_check(const Fibration& fib, const HermitianFormField& omega, const Region& region, bool converged,
                    bool override_convergence) {
    if (!converged && !override_convergence)
        throw DomainError("bmy: omega is not a converged flow solution (set the override to evaluate anyway)");
    BmyResult r;
    r.prefactor = bmy_prefactor(r.n, r.m);
    ScalarField h(omega.grid_ptr());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = omega.a[i];
    const ChernData c = chern_forms(h, fib.modulus(), region);
    r.c1_squared = c.c1_squared;
    r.c2 = 0.0;
    r.lhs = r.prefactor * r.c2 - r.c1_squared;
    r.holds = r.lhs >= -1e-8;
    return r;
}

}  // namespace fibreflow
