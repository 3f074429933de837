#include "fibreflow/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fibreflow/error.hpp"

namespace fibreflow {

namespace {

void check_resolution(int n, const char* name) {
    if (n < 4 || n % 2 != 0)
        throw ConfigError(std::string("grid.") + name + ": resolution must be even and >= 4 (got " +
                          std::to_string(n) + ")");
}

}  // namespace

void GridSpec::validate() const {
    check_resolution(nx, "nx");
    check_resolution(ny, "ny");
    check_resolution(nu, "nu");
    check_resolution(nv, "nv");
    if (base == BaseKind::strip) {
        if (!(std::isfinite(t0) && std::isfinite(t1)) || !(t0 < t1))
            throw ConfigError("base.t0/base.t1: strip bounds must satisfy t0 < t1");
    } else {
        if (!(r0 > 0.0 && r0 < 1.0)) throw ConfigError("base.r0: annulus inner radius must lie in (0,1)");
        if (!(r1 > r0 && r1 <= 1.0)) throw ConfigError("base.r1: annulus outer radius must lie in (r0,1]");
    }
}

Grid::Grid(const GridSpec& spec) : spec_(spec) {
    spec_.validate();
    if (spec_.base == BaseKind::strip) {
        v_min_ = spec_.t0;
        v_max_ = spec_.t1;
    } else {
        const double two_pi = 2.0 * std::numbers::pi;
        v_min_ = -std::log(spec_.r1) / two_pi;
        v_max_ = -std::log(spec_.r0) / two_pi;
    }
}

GridPtr make_grid(const GridSpec& spec) { return std::make_shared<const Grid>(spec); }

cplx Grid::disc(int k, int l) const {
    const cplx ww = w(k, l);
    if (spec_.base == BaseKind::strip) return ww;
    return std::exp(cplx(0.0, 2.0 * std::numbers::pi) * ww);
}

double Grid::disc_jacobian(int k, int l) const {
    if (spec_.base == BaseKind::strip) return 1.0;
    const double two_pi = 2.0 * std::numbers::pi;
    return two_pi * two_pi * std::norm(disc(k, l));
}

std::array<int, 4> Grid::coords(std::size_t idx) const noexcept {
    if (!full()) {
        return {0, 0, int(idx % spec_.nu), int(idx / spec_.nu)};
    }
    const int i = int(idx % spec_.nx);
    idx /= spec_.nx;
    const int j = int(idx % spec_.ny);
    idx /= spec_.ny;
    const int k = int(idx % spec_.nu);
    const int l = int(idx / spec_.nu);
    return {i, j, k, l};
}

double Grid::v_weight(int l) const noexcept {
    const double h = hv();
    return (l == 0 || l == spec_.nv - 1) ? 0.5 * h : h;
}

int Grid::axis_length(int axis) const noexcept {
    switch (axis) {
        case axis_x: return spec_.nx;
        case axis_y: return spec_.ny;
        case axis_u: return spec_.nu;
        default: return spec_.nv;
    }
}

std::size_t Grid::axis_stride(int axis) const noexcept {
    const std::size_t f = points_per_base();
    switch (axis) {
        case axis_x: return 1;
        case axis_y: return std::size_t(spec_.nx);
        case axis_u: return f;
        default: return f * spec_.nu;
    }
}

std::string Grid::describe() const {
    std::ostringstream os;
    os << (full() ? "full" : "symmetric") << ' ' << spec_.nx << 'x' << spec_.ny << 'x' << spec_.nu
       << 'x' << spec_.nv << ' ' << (spec_.base == BaseKind::strip ? "strip" : "annulus") << " v=["
       << v_min_ << ',' << v_max_ << ']';
    return os.str();
}

void check_region(const Grid& g, const Region& r) {
    auto in = [](int a, int n) { return a >= 0 && a < n; };
    switch (r.kind) {
        case Region::Kind::whole: return;
        case Region::Kind::fiber:
            if (!in(r.k, g.nu()) || !in(r.l, g.nv()))
                throw DomainError("region: fiber index (" + std::to_string(r.k) + "," +
                                  std::to_string(r.l) + ") outside the base grid");
            return;
        case Region::Kind::base_rect:
            if (!in(r.k0, g.nu()) || !in(r.k1, g.nu()) || !in(r.l0, g.nv()) || !in(r.l1, g.nv()) ||
                r.k0 > r.k1 || r.l0 > r.l1)
                throw DomainError("region: base rectangle outside the grid or empty");
            return;
    }
}

}  // namespace fibreflow
