#pragma once
// Pointwise Hermitian-form algebra on (1,1)-forms.

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "fibreflow/field.hpp"
#include "fibreflow/modulus.hpp"

namespace fibreflow {

struct PositivityReport {
    double min_eigenvalue = 0.0;
    std::size_t argmin = 0;
    std::array<int, 4> argmin_coords{};
    double min_fiber_entry = 0.0;
    bool positive_definite = false;
    bool positive_on_fibers = false;
};

PositivityReport positivity_spectrum(const HermitianFormField& omega);

/// Coefficient of omega ^ pi*(base_vol) against the coordinate top form:
/// g_{z zbar} times the base coefficient. Throws NumericError at the first
/// non-positive point.
ScalarField relative_volume_density(const HermitianFormField& omega, const HermitianFormField& base_vol);

/// -i ddbar log(density). Throws DomainError if density <= 0 anywhere.
HermitianFormField ricci_of_density(const ScalarField& density, const ModulusFamily& tau);

HermitianFormField relative_ricci_form(const HermitianFormField& omega, const HermitianFormField& base_vol,
                                       const ModulusFamily& tau);

struct ChernData {
    HermitianFormField c1;  // (1/2pi) i ddbar log h
    double c1_squared = 0.0;
};

/// c1 of the line bundle with fiber metric density h, and the L2 pairing of its
/// base coefficient over the region, measured in the disc coordinate s.
ChernData chern_forms(const ScalarField& h, const ModulusFamily& tau, const Region& region);

enum class ModelKind { poincare, conical };

/// Coefficient matrix (against (i/pi)-normalized dz_j ^ dzbar_k, times 1/pi
/// included) of the fibrewise Poincare or conical model at (z_1..z_n), t.
Eigen::MatrixXcd model_metric_eval(ModelKind kind, const std::vector<cplx>& z, cplx t);

struct QuasiIsometry {
    double c_low = 0.0;
    double c_high = 0.0;
};

/// Range of generalized eigenvalues of (A, B) over the region.
QuasiIsometry quasi_isometry_ratio(const HermitianFormField& A, const HermitianFormField& B,
                                   const Region& region = Region::whole());

/// Base-block form d * i dw ^ dwbar, for base metrics and volume forms.
HermitianFormField base_form(GridPtr g, const std::vector<double>& coefficient_per_base_point);

/// Stored point indices belonging to a region, in ascending order.
std::vector<std::size_t> region_points(const Grid& g, const Region& region);

}  // namespace fibreflow
