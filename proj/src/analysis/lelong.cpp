#include <algorithm>
#include <cmath>
#include <numbers>

#include "fibreflow/analysis.hpp"
#include "fibreflow/error.hpp"

namespace fibreflow {

namespace {

// Least-squares line y = c0 + c1 x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    const double c1 = (n * sxy - sx * sy) / den;
    return {(sy - c1 * sx) / n, c1};
}

}  // namespace

double PolarField::radius(std::size_t i) const { return r_max * std::exp2(-double(i) / per_octave); }

double PolarField::theta(int t) const { return 2.0 * std::numbers::pi * t / n_theta; }

PolarField sample_polar(const std::function<double(cplx)>& u, cplx center, double r_max, int octaves,
                        int per_octave, int n_theta) {
    if (!(r_max > 0.0) || octaves < 1 || per_octave < 1 || n_theta < 4)
        throw ConfigError("lelong: polar grid needs r_max > 0, octaves >= 1, per_octave >= 1, n_theta >= 4");
    PolarField f;
    f.center = center;
    f.r_max = r_max;
    f.octaves = octaves;
    f.per_octave = per_octave;
    f.n_theta = n_theta;
    f.values.resize(f.n_radii() * std::size_t(n_theta));
    for (std::size_t i = 0; i < f.n_radii(); ++i)
        for (int t = 0; t < n_theta; ++t)
            f.values[i * n_theta + t] = u(center + std::polar(f.radius(i), f.theta(t)));
    return f;
}

LelongResult lelong_estimate(const PolarField& u) {
    const int m = u.per_octave;
    const std::size_t N = u.n_radii() - 1;
    if (u.octaves < 5 || m < 2)
        throw DomainError("lelong: radii underflow grid resolution (need >= 5 octaves and >= 2 radii per octave)");
    if (u.values.size() != u.n_radii() * std::size_t(u.n_theta)) throw DomainError("lelong: sample count mismatch");
    for (double v : u.values)
        if (!std::isfinite(v)) throw NumericError("lelong: non-finite sample");

    LelongResult r;
    r.point = u.center;
    const double hl = std::log(2.0) / m;
    auto at = [&](std::size_t i, int t) { return u.values[i * u.n_theta + t]; };

    std::vector<double> logr2, minu, r2;
    for (int s = 4; s >= 1; --s) {
        const std::size_t i = N - std::size_t(s) * m;
        const double rad = u.radius(i);
        r.radii.push_back(rad);
        double mn = at(i, 0), mean_drv = 0.0;
        for (int t = 0; t < u.n_theta; ++t) {
            mn = std::min(mn, at(i, t));
            // d u / d ln r; ln r decreases with i
            const double d = -(at(i - 2, t) - 8.0 * at(i - 1, t) + 8.0 * at(i + 1, t) - at(i + 2, t)) / (12.0 * hl);
            mean_drv += d;
        }
        mean_drv /= u.n_theta;
        r.mass_ratio.push_back(0.5 * mean_drv);  // (1/4pi) * 2pi * mean
        logr2.push_back(std::log(rad * rad));
        minu.push_back(mn);
        r2.push_back(rad * rad);
    }
    r.slope_estimate = fit_line(logr2, minu).second;
    r.mass_limit = fit_line(r2, r.mass_ratio).first;
    for (std::size_t s = 1; s < r.mass_ratio.size(); ++s)
        if (r.mass_ratio[s] > r.mass_ratio[s - 1] + 1e-6) r.mass_monotone = false;
    r.routes_agree = std::abs(r.slope_estimate - r.mass_limit) < 0.05;
    return r;
}

}  // namespace fibreflow
