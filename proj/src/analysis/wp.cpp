#include <algorithm>
#include <cmath>
#include <numbers>

#include "fibreflow/analysis.hpp"
#include "fibreflow/cy_fiberwise.hpp"
#include "fibreflow/error.hpp"
#include "fibreflow/geometry.hpp"

namespace fibreflow {

namespace {

constexpr double truncation_levels[3] = {1e-1, 1e-2, 1e-4};
constexpr int panel_levels[3] = {64, 128, 256};
constexpr double path_start = -1.0;  // ln rho at the start of the path, rho = 1/e

// Composite Simpson rule on [a, b] with an even panel count.
template <class F>
double simpson(F f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace

std::string to_string(WpRoute r) { return r == WpRoute::ks ? "kodaira-spencer" : "hessian-formula"; }

WpReport wp_form(const Fibration& fib, WpRoute route) {
    const Grid& g = *fib.grid;
    WpReport rep;
    rep.route = route;
    std::vector<double> ks(g.base_size());
    for (std::size_t b = 0; b < ks.size(); ++b) ks[b] = ks_norm_squared(fib.tau[b]);

    if (route == WpRoute::ks) {
        rep.g_wp = ks;
        rep.calibration = 1.0;
        rep.fitted_calibration = 1.0;
        return rep;
    }

    const FiberSolve srf = fiberwise_cy_solve(fib, fib.omega0);
    const HermitianFormField unit_base = base_form(fib.grid, std::vector<double>(g.base_size(), 1.0));
    const HermitianFormField ric = relative_ricci_form(srf.omega_srf, unit_base, fib.modulus());
    std::vector<double> raw(g.base_size(), 0.0);
    for (std::size_t n = 0; n < ric.size(); ++n) raw[g.base_of(n)] += ric.d[n];
    for (double& v : raw) v /= double(g.points_per_base());

    // Convention: Ric_{X/Y}(omega_SRF) = -omega_WP.
    rep.calibration = -1.0;
    rep.g_wp.resize(raw.size());
    double num = 0.0, den = 0.0;
    for (std::size_t b = 0; b < raw.size(); ++b) {
        rep.g_wp[b] = rep.calibration * raw[b];
        num += raw[b] * ks[b];
        den += raw[b] * raw[b];
    }
    rep.fitted_calibration = den > 0.0 ? num / den : rep.calibration;
    return rep;
}

WpReport wp_distance(const Fibration& fib) {
    WpReport rep = wp_form(fib, WpRoute::ks);
    const ModulusFamily& tau = fib.modulus();
    // sqrt(g) |dq| with q = i rho, rho = e^s: |dq| = rho ds
    auto integrand = [&](double s) {
        const double rho = std::exp(s);
        const ModulusSample m = tau.at_q(cplx(0.0, rho));
        return std::sqrt(ks_norm_squared(m)) * rho;
    };
    rep.truncations.assign(std::begin(truncation_levels), std::end(truncation_levels));
    rep.panels.assign(std::begin(panel_levels), std::end(panel_levels));
    for (int panels : panel_levels) {
        std::vector<double> lengths;
        for (double rho : truncation_levels) lengths.push_back(simpson(integrand, std::log(rho), path_start, panels));
        rep.level_verdicts.push_back(increments_diverge(lengths) ? "infinite" : "finite");
        rep.partial_lengths.push_back(std::move(lengths));
    }
    const bool agree = std::all_of(rep.level_verdicts.begin(), rep.level_verdicts.end(),
                                   [&](const std::string& v) { return v == rep.level_verdicts.front(); });
    rep.verdict = agree ? rep.level_verdicts.front() : "inconclusive";
    rep.distance = rep.partial_lengths.back().back();
    return rep;
}

YoshikawaFit yoshikawa_fit(const WpReport& wp, const Fibration& fib) {
    const Grid& g = *fib.grid;
    if (g.spec().base != BaseKind::annulus)
        throw DomainError("yoshikawa_fit: the base must be parametrized by a punctured disc (annulus grid)");
    if (wp.g_wp.size() != g.base_size()) throw DomainError("yoshikawa_fit: report does not match the grid");
    YoshikawaFit fit;
    const double gmax = *std::max_element(wp.g_wp.begin(), wp.g_wp.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    });
    if (std::abs(gmax) < 1e-14) {
        fit.degenerate = true;
        fit.holds = true;
        fit.r = std::numeric_limits<double>::quiet_NaN();
        fit.C = 0.0;
        return fit;
    }
    std::vector<double> X, Y;
    for (int l = 0; l < g.nv(); ++l)
        for (int k = 0; k < g.nu(); ++k) {
            const double gw = wp.g_wp[g.base_index(k, l)];
            if (!(gw > 0.0)) continue;
            const double r = std::abs(g.disc(k, l));
            const double gs = gw / g.disc_jacobian(k, l);
            const double lr = std::log(r);
            X.push_back(2.0 * lr);
            Y.push_back(std::log(gs) + std::log(r * r * lr * lr));
        }
    fit.samples = X.size();
    if (X.size() < 2) throw NumericError("yoshikawa_fit: fewer than two positive samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        sx += X[i];
        sy += Y[i];
        sxx += X[i] * X[i];
        sxy += X[i] * Y[i];
    }
    const double den = n * sxx - sx * sx;
    if (!(std::abs(den) > 0.0)) throw NumericError("yoshikawa_fit: all samples at one radius");
    fit.r = (n * sxy - sx * sy) / den;
    const double intercept = (sy - fit.r * sx) / n;
    fit.C = std::exp(intercept) * 1.05;
    const double logC = std::log(fit.C);
    for (std::size_t i = 0; i < X.size(); ++i)
        if (Y[i] > logC + fit.r * X[i]) fit.holds = false;
    return fit;
}

}  // namespace fibreflow
