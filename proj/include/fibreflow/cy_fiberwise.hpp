#pragma once
// Fiberwise Calabi-Yau solves and the kernel of semi-positive forms.

#include <vector>

#include "fibreflow/fibration.hpp"

namespace fibreflow {

/// Values on a single fiber square, x fastest. 1x1 in symmetric mode.
struct FiberField {
    int nx = 1, ny = 1;
    std::vector<double> values;
    double& operator()(int i, int j) { return values[std::size_t(j) * nx + i]; }
    double operator()(int i, int j) const { return values[std::size_t(j) * nx + i]; }
};

FiberField extract_fiber(const Grid& g, const std::vector<double>& f, int k, int l);

/// F_y with Ric(omega_y) = i ddbar F_y and int (e^F - 1) omega_y = 0.
FiberField fiber_ricci_potential(const Fibration& fib, const HermitianFormField& omega0, int k, int l);

struct FiberSolve {
    ScalarField rho;
    HermitianFormField omega_srf;
    std::vector<double> constant;  // per base point, additive normalization applied
    std::vector<double> residual;  // per base point, sup |g0 + ddbar rho - A/(2b)|
    std::vector<double> normalization;  // per base point, int rho omega_0 over the fiber
};

/// Per fiber, solve the (linear) Monge-Ampere problem omega_0|_y + i ddbar rho_y
/// = flat metric of the same area, normalized by int rho_y omega_0|_y = 0, then
/// glue rho and add its full complex Hessian to omega_0.
FiberSolve fiberwise_cy_solve(const Fibration& fib, const HermitianFormField& omega0,
                              double tolerance = 1e-8);

/// Fiber entry of omega divided by its fiber area at each base point: the
/// unit-area normalization of the polarization.
std::vector<double> unit_area_fiber_density(const Fibration& fib, const HermitianFormField& omega);

/// sup over the grid of |Ric(omega|_{X_y})| = |d_z dbar_z log g_{z zbar}|.
double fiber_ricci_sup(const Fibration& fib, const HermitianFormField& omega);

enum class KernelSubspace { relative, full };

struct FoliationReport {
    std::vector<int> kernel_dim;
    std::vector<double> min_eigenvalue;
    std::array<std::size_t, 3> rank_profile{};  // number of points with kernel dim 0, 1, 2
    bool constant_rank = true;
    double threshold = 0.0;
    double max_abs_det = 0.0;    // |omega^top| statistic
    double min_trace = 0.0;      // omega^(top-1) statistic
    std::vector<std::size_t> degeneracy_locus;  // points with nonzero kernel
};

FoliationReport foliation_kernel(const HermitianFormField& omega, KernelSubspace subspace);

}  // namespace fibreflow
