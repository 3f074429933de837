#pragma once
// Lelong numbers, Weil-Petersson geometry, volume probes and the BMY check.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fibreflow/fibration.hpp"

namespace fibreflow {

/// Polar samples of a function around a point p: radii
/// r_i = r_max * 2^(-i / per_octave), i = 0..octaves*per_octave, and n_theta
/// equally spaced angles.
struct PolarField {
    cplx center{};
    double r_max = 0.5;
    int octaves = 8;
    int per_octave = 8;
    int n_theta = 64;
    std::vector<double> values;  // [i * n_theta + t]

    std::size_t n_radii() const { return std::size_t(octaves) * per_octave + 1; }
    double radius(std::size_t i) const;
    double theta(int t) const;
};

PolarField sample_polar(const std::function<double(cplx)>& u, cplx center, double r_max, int octaves,
                        int per_octave, int n_theta);

struct LelongResult {
    cplx point{};
    std::vector<double> radii;  // the four dyadic radii, decreasing
    double slope_estimate = 0.0;
    std::vector<double> mass_ratio;  // at the same radii
    double mass_limit = 0.0;
    bool mass_monotone = true;       // non-decreasing in r
    bool routes_agree = false;
    double estimate() const { return 0.5 * (slope_estimate + mass_limit); }
};

/// Lelong number with dd^c = (i / 2 pi) ddbar: mass(r) = (1/4pi) int r d_r u dtheta,
/// extrapolated as nu + c r^2, and the regression slope of min_theta u against log r^2.
LelongResult lelong_estimate(const PolarField& u);

enum class WpRoute { hessian, ks };

struct WpReport {
    WpRoute route = WpRoute::ks;
    std::vector<double> g_wp;    // per base point, coefficient of i dw ^ dwbar
    double calibration = 1.0;    // factor applied to the raw route output
    double fitted_calibration = 1.0;  // least-squares factor against the ks route
    // distance
    std::vector<double> truncations;
    std::vector<int> panels;
    std::vector<std::vector<double>> partial_lengths;  // [refinement][truncation]
    std::vector<std::string> level_verdicts;
    std::string verdict = "finite";
    double distance = 0.0;  // finest partial length at the deepest truncation
};

WpReport wp_form(const Fibration& fib, WpRoute route);

/// WP length of the path q = i rho, rho from 1/e down to each truncation.
WpReport wp_distance(const Fibration& fib);

struct YoshikawaFit {
    double C = 0.0;
    double r = 0.0;
    bool holds = true;
    bool degenerate = false;
    std::size_t samples = 0;
};

YoshikawaFit yoshikawa_fit(const WpReport& wp, const Fibration& fib);

struct VolumeProbe {
    bool weighted = false;
    std::vector<double> rho;              // path points, finest refinement
    std::vector<double> volume;           // V at those points
    std::vector<double> truncations;
    std::vector<double> end_values;       // V at each truncation
    std::vector<double> grid_volume;      // per base point, fiber quadrature
    std::vector<double> divided_diff_max; // per refinement: max |second divided difference| in ln rho
    bool continuous = true;
    bool smooth = true;
};

VolumeProbe fiber_volume_probe(const Fibration& fib, bool weighted);

struct BmyResult {
    double lhs = 0.0;
    double c1_squared = 0.0;
    double c2 = 0.0;
    double prefactor = 4.0;
    int n = 2, m = 1;
    bool holds = true;
};

double bmy_prefactor(int n, int m);

/// lhs = prefactor * c2 - c1^2 for the rank-one relative tangent sheaf with
/// fiber metric density omega_{z zbar}. Requires a converged omega unless
/// override_convergence is set.
BmyResult bmy_check(const Fibration& fib, const HermitianFormField& omega, const Region& region, bool converged,
                    bool override_convergence = false);

std::string to_string(WpRoute r);

}  // namespace fibreflow
