#pragma once
// Differential operators and quadrature on product grids.

#include <array>
#include <vector>

#include "fibreflow/field.hpp"
#include "fibreflow/modulus.hpp"

namespace fibreflow {

/// d^order f / d axis^order (order 1 or 2). Spectral on periodic axes, 4th-order
/// finite differences (one-sided at the two boundary layers) otherwise. Axes not
/// stored by the grid (fiber axes in symmetric mode) give zero.
std::vector<double> derivative(const ScalarField& f, int axis, int order);

/// Same, applied to a raw value array laid out on g.
std::vector<double> derivative(const Grid& g, const std::vector<double>& f, int axis, int order,
                               bool periodic);

/// Change of basis between (dx, dy, du, dv) and the holomorphic coframe
/// (dz, dw), z = x + tau(w) y, at a grid point.
struct FrameJacobian {
    cplx tau, dtau;
    double y = 0.0;

    /// Rows dz, dw in the real coordinate differentials (dx, dy, du, dv).
    std::array<std::array<cplx, 4>, 2> coframe() const;
    /// Frame vectors d/dz, d/dw in (d/dx, d/dy, d/du, d/dv), dual to the coframe.
    std::array<std::array<cplx, 4>, 2> frame() const;
    /// First-order coefficients C_{ij}^b of d_i dbar_j f on the x, y axes.
    std::array<std::array<cplx, 2>, 4> connection() const;  // index 2*i+j, then b in {x, y}
};

FrameJacobian frame_at(const Grid& g, const ModulusFamily& tau, std::size_t idx);

/// Coefficients of i ddbar f in the (dz, dw) coframe at every point.
/// Symmetric mode returns diag(0, (f_uu + f_vv) / 4).
HermitianFormField complex_hessian(const ScalarField& f, const ModulusFamily& tau);

/// Quadrature of f times the coordinate volume element of the region.
double integrate(const ScalarField& f, const Region& region = Region::whole());

/// Quadrature over the fiber square at base point (k, l), for a field on g.
double fiber_integral(const Grid& g, const std::vector<double>& f, int k, int l);

}  // namespace fibreflow
