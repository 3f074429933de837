#pragma once
// Product grids over fiber x base coordinates, quadrature and regions.

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <string>

#include "fibreflow/modulus.hpp"

namespace fibreflow {

enum class GridMode { symmetric, full };

/// Fiber axes x, y are periodic on [0,1). The base coordinate w = u + i v has
/// u periodic on [0,1) and v non-periodic: v in [t0, t1] for a strip, or the
/// image of r in [r0, r1] under r = exp(-2 pi v) for an annulus.
struct GridSpec {
    int nx = 16;
    int ny = 16;
    int nu = 16;
    int nv = 16;
    BaseKind base = BaseKind::strip;
    double t0 = 1.0;
    double t1 = 2.0;
    double r0 = 0.05;
    double r1 = 0.5;
    GridMode mode = GridMode::symmetric;

    void validate() const;  // throws ConfigError naming the field
};

enum Axis : int { axis_x = 0, axis_y = 1, axis_u = 2, axis_v = 3 };

class Grid {
public:
    explicit Grid(const GridSpec& spec);

    const GridSpec& spec() const noexcept { return spec_; }
    bool full() const noexcept { return spec_.mode == GridMode::full; }
    int nx() const noexcept { return spec_.nx; }
    int ny() const noexcept { return spec_.ny; }
    int nu() const noexcept { return spec_.nu; }
    int nv() const noexcept { return spec_.nv; }

    std::size_t size() const noexcept { return full() ? fiber_size() * base_size() : base_size(); }
    std::size_t base_size() const noexcept { return std::size_t(spec_.nu) * spec_.nv; }
    std::size_t fiber_size() const noexcept { return std::size_t(spec_.nx) * spec_.ny; }
    /// Number of stored points per base point: nx*ny in full mode, 1 otherwise.
    std::size_t points_per_base() const noexcept { return full() ? fiber_size() : 1; }

    double hx() const noexcept { return 1.0 / spec_.nx; }
    double hy() const noexcept { return 1.0 / spec_.ny; }
    double hu() const noexcept { return 1.0 / spec_.nu; }
    double hv() const noexcept { return (v_max_ - v_min_) / (spec_.nv - 1); }
    double v_min() const noexcept { return v_min_; }
    double v_max() const noexcept { return v_max_; }

    double x(int i) const noexcept { return i * hx(); }
    double y(int j) const noexcept { return j * hy(); }
    double u(int k) const noexcept { return k * hu(); }
    double v(int l) const noexcept { return v_min_ + l * hv(); }
    cplx w(int k, int l) const noexcept { return {u(k), v(l)}; }

    /// Disc coordinate s(w): w on a strip, exp(2 pi i w) on an annulus.
    cplx disc(int k, int l) const;
    /// |ds/dw|^2 at a base point.
    double disc_jacobian(int k, int l) const;

    std::size_t index(int i, int j, int k, int l) const noexcept {
        if (!full()) return base_index(k, l);
        return ((std::size_t(l) * spec_.nu + k) * spec_.ny + j) * spec_.nx + i;
    }
    std::size_t base_index(int k, int l) const noexcept { return std::size_t(l) * spec_.nu + k; }
    /// Base index of a stored point index.
    std::size_t base_of(std::size_t idx) const noexcept { return idx / points_per_base(); }

    /// Decompose a stored index into (i, j, k, l); i = j = 0 in symmetric mode.
    std::array<int, 4> coords(std::size_t idx) const noexcept;

    /// Trapezoid weight of the v node l (times hv).
    double v_weight(int l) const noexcept;

    /// Number of points and stride of an axis in the stored layout.
    int axis_length(int axis) const noexcept;
    std::size_t axis_stride(int axis) const noexcept;
    bool stores_axis(int axis) const noexcept { return full() || axis >= axis_u; }

    std::string describe() const;

private:
    GridSpec spec_;
    double v_min_ = 0.0;
    double v_max_ = 1.0;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(const GridSpec& spec);

/// Integration region: the whole grid, one fiber {w = w(k,l)}, or a base
/// sub-rectangle of index ranges [k0,k1] x [l0,l1] (inclusive).
struct Region {
    enum class Kind { whole, fiber, base_rect };
    Kind kind = Kind::whole;
    int k = 0, l = 0;
    int k0 = 0, k1 = 0, l0 = 0, l1 = 0;

    static Region whole() { return {}; }
    static Region fiber(int k, int l) {
        Region r;
        r.kind = Kind::fiber;
        r.k = k;
        r.l = l;
        return r;
    }
    static Region base_rect(int k0, int k1, int l0, int l1) {
        Region r;
        r.kind = Kind::base_rect;
        r.k0 = k0;
        r.k1 = k1;
        r.l0 = l0;
        r.l1 = l1;
        return r;
    }
    /// All u, v-index range [l0, l1].
    static Region collar(const Grid& g, int l0, int l1) { return base_rect(0, g.nu() - 1, l0, l1); }
};

void check_region(const Grid& g, const Region& r);  // throws DomainError

}  // namespace fibreflow
