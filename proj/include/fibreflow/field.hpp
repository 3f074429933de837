#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "fibreflow/grid.hpp"

namespace fibreflow {

/// One real value per stored grid point, with per-axis periodicity flags.
/// Axes flagged non-periodic are differentiated by finite differences.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr g, double fill = 0.0);
    ScalarField(GridPtr g, std::vector<double> values);

    /// Sample f(x, y, u, v) at every stored point (x = y = 0 in symmetric mode).
    template <class F>
    static ScalarField sample(GridPtr g, F&& f);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    bool periodic(int axis) const noexcept { return periodic_[axis]; }
    ScalarField& set_periodic(int axis, bool p);

    /// Throws NumericError naming the first non-finite entry.
    void check_finite(const std::string& what) const;

    double sup() const;
    double inf() const;

private:
    GridPtr grid_;
    std::vector<double> values_;
    std::array<bool, 4> periodic_{true, true, true, false};
};

struct Hermitian2 {
    double a = 0.0;  // g_{z zbar}
    double d = 0.0;  // g_{w wbar}
    cplx b{};        // g_{z wbar}; g_{w zbar} = conj(b)

    double det() const { return a * d - std::norm(b); }
    double trace() const { return a + d; }
    std::array<double, 2> eigenvalues() const;
};

/// A (1,1)-form stored as its Hermitian coefficient matrix in the (dz, dw)
/// coframe, structure-of-arrays. Hermitian by construction.
class HermitianFormField {
public:
    HermitianFormField() = default;
    explicit HermitianFormField(GridPtr g);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    std::size_t size() const noexcept { return a.size(); }

    Hermitian2 at(std::size_t i) const { return {a[i], d[i], {br[i], bi[i]}}; }
    void set(std::size_t i, const Hermitian2& h);

    std::vector<double> a, d, br, bi;

    HermitianFormField& operator+=(const HermitianFormField& o);
    HermitianFormField& operator*=(double s);
    friend HermitianFormField operator+(HermitianFormField x, const HermitianFormField& y) {
        return x += y;
    }
    friend HermitianFormField operator*(double s, HermitianFormField x) { return x *= s; }
    HermitianFormField operator-() const { return -1.0 * *this; }
    friend HermitianFormField operator-(const HermitianFormField& x, const HermitianFormField& y) {
        return x + (-y);
    }

    /// alpha * x + beta * y, computed with the dispatched SIMD kernel.
    static HermitianFormField lincomb(double alpha, const HermitianFormField& x, double beta,
                                      const HermitianFormField& y);

    /// Per-point eigenvalues (lo, hi).
    void eigenvalues(std::vector<double>& lo, std::vector<double>& hi) const;

    /// Max over points of |entry| of the difference, entrywise.
    double sup_distance(const HermitianFormField& o) const;
    double sup_norm() const;

    void check_finite(const std::string& what) const;

private:
    GridPtr grid_;
};

template <class F>
ScalarField ScalarField::sample(GridPtr g, F&& f) {
    ScalarField out(g);
    const Grid& gr = *g;
    for (std::size_t n = 0; n < out.size(); ++n) {
        const auto c = gr.coords(n);
        out[n] = f(gr.x(c[0]), gr.y(c[1]), gr.u(c[2]), gr.v(c[3]));
    }
    return out;
}

}  // namespace fibreflow
