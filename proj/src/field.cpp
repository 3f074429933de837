#include "fibreflow/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fibreflow/error.hpp"
#include "fibreflow/simd/kernels.hpp"

namespace fibreflow {

namespace {

std::string location(const Grid& g, std::size_t n) {
    const auto c = g.coords(n);
    return "(i,j,k,l)=(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," +
           std::to_string(c[2]) + "," + std::to_string(c[3]) + ")";
}

}  // namespace

ScalarField::ScalarField(GridPtr g, double fill) : grid_(std::move(g)), values_(grid_->size(), fill) {}

ScalarField::ScalarField(GridPtr g, std::vector<double> values)
    : grid_(std::move(g)), values_(std::move(values)) {
    if (values_.size() != grid_->size())
        throw DomainError("scalar field: value count " + std::to_string(values_.size()) +
                          " does not match grid size " + std::to_string(grid_->size()));
}

ScalarField& ScalarField::set_periodic(int axis, bool p) {
    if (axis == axis_v && p) throw DomainError("scalar field: the v axis is never periodic");
    periodic_[axis] = p;
    return *this;
}

void ScalarField::check_finite(const std::string& what) const {
    for (std::size_t n = 0; n < values_.size(); ++n)
        if (!std::isfinite(values_[n]))
            throw NumericError(what + ": non-finite value at " + location(*grid_, n));
}

double ScalarField::sup() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::inf() const { return *std::min_element(values_.begin(), values_.end()); }

std::array<double, 2> Hermitian2::eigenvalues() const {
    const double m = (a + d) * 0.5;
    const double s = (a - d) * 0.5;
    const double r = std::sqrt(s * s + (b.real() * b.real() + b.imag() * b.imag()));
    return {m - r, m + r};
}

HermitianFormField::HermitianFormField(GridPtr g)
    : a(g->size(), 0.0), d(g->size(), 0.0), br(g->size(), 0.0), bi(g->size(), 0.0), grid_(std::move(g)) {}

void HermitianFormField::set(std::size_t i, const Hermitian2& h) {
    a[i] = h.a;
    d[i] = h.d;
    br[i] = h.b.real();
    bi[i] = h.b.imag();
}

HermitianFormField& HermitianFormField::operator+=(const HermitianFormField& o) {
    *this = lincomb(1.0, *this, 1.0, o);
    return *this;
}

HermitianFormField& HermitianFormField::operator*=(double s) {
    *this = lincomb(s, *this, 0.0, *this);
    return *this;
}

HermitianFormField HermitianFormField::lincomb(double alpha, const HermitianFormField& x, double beta,
                                               const HermitianFormField& y) {
    if (x.size() != y.size()) throw DomainError("hermitian form: size mismatch in linear combination");
    HermitianFormField out(x.grid_ptr());
    simd::lincomb(alpha, x.a, beta, y.a, out.a);
    simd::lincomb(alpha, x.d, beta, y.d, out.d);
    simd::lincomb(alpha, x.br, beta, y.br, out.br);
    simd::lincomb(alpha, x.bi, beta, y.bi, out.bi);
    return out;
}

void HermitianFormField::eigenvalues(std::vector<double>& lo, std::vector<double>& hi) const {
    lo.resize(size());
    hi.resize(size());
    simd::hermitian_eigs({a, d, br, bi}, lo, hi);
}

double HermitianFormField::sup_distance(const HermitianFormField& o) const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        m = std::max(m, std::abs(a[i] - o.a[i]));
        m = std::max(m, std::abs(d[i] - o.d[i]));
        m = std::max(m, std::hypot(br[i] - o.br[i], bi[i] - o.bi[i]));
    }
    return m;
}

double HermitianFormField::sup_norm() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
        m = std::max({m, std::abs(a[i]), std::abs(d[i]), std::hypot(br[i], bi[i])});
    return m;
}

void HermitianFormField::check_finite(const std::string& what) const {
    for (std::size_t n = 0; n < size(); ++n)
        if (!std::isfinite(a[n]) || !std::isfinite(d[n]) || !std::isfinite(br[n]) || !std::isfinite(bi[n]))
            throw NumericError(what + ": non-finite form entry at " + location(*grid_, n));
}

}  // namespace fibreflow
