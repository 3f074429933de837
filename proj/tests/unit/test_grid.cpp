#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fibreflow/error.hpp"
#include "fibreflow/operators.hpp"

using namespace fibreflow;

namespace {

constexpr double pi = std::numbers::pi;

GridPtr full_grid(int nx, int ny, int nu, int nv, double t0 = 1.0, double t1 = 2.0) {
    GridSpec s;
    s.nx = nx;
    s.ny = ny;
    s.nu = nu;
    s.nv = nv;
    s.t0 = t0;
    s.t1 = t1;
    s.mode = GridMode::full;
    return make_grid(s);
}

// Independent oracle: write f in holomorphic coordinates (z, w) and take
// central differences of the Wirtinger combinations directly.
template <class F>
std::array<cplx, 3> wirtinger_oracle(F f, const ModulusFamily& tau, cplx z, cplx w) {
    auto g = [&](cplx zz, cplx ww) {
        const cplx t = tau.at_w(ww, BaseKind::strip).tau;
        const double y = zz.imag() / t.imag();
        const double x = zz.real() - t.real() * y;
        return f(x, y, ww.real(), ww.imag());
    };
    const double h = 1e-4;
    const cplx I(0, 1);
    // d_a dbar_b g = 1/4 (d_ar - i d_ai)(d_br + i d_bi) g
    auto dd = [&](cplx ea, cplx eb, cplx fa, cplx fb) {
        // directional second derivative along (ea in z, eb in w) and (fa, fb)
        const double pp = g(z + h * (ea + fa), w + h * (eb + fb));
        const double pm = g(z + h * (ea - fa), w + h * (eb - fb));
        const double mp = g(z - h * (ea - fa), w - h * (eb - fb));
        const double mm = g(z - h * (ea + fa), w - h * (eb + fb));
        return (pp - pm - mp + mm) / (4 * h * h);
    };
    auto wirt = [&](int i, int j) {
        cplx e_r[2] = {1.0, 0.0}, e_i[2] = {I, 0.0};
        cplx f_r[2] = {0.0, 1.0}, f_i[2] = {0.0, I};
        cplx ar = i == 0 ? e_r[0] : f_r[0], ar_w = i == 0 ? e_r[1] : f_r[1];
        cplx ai = i == 0 ? e_i[0] : f_i[0], ai_w = i == 0 ? e_i[1] : f_i[1];
        cplx br = j == 0 ? e_r[0] : f_r[0], br_w = j == 0 ? e_r[1] : f_r[1];
        cplx bi = j == 0 ? e_i[0] : f_i[0], bi_w = j == 0 ? e_i[1] : f_i[1];
        const double rr = dd(ar, ar_w, br, br_w);
        const double ri = dd(ar, ar_w, bi, bi_w);
        const double ir = dd(ai, ai_w, br, br_w);
        const double ii = dd(ai, ai_w, bi, bi_w);
        return 0.25 * (cplx(rr + ii) + I * (ri - ir));
    };
    return {wirt(0, 0), wirt(1, 1), wirt(0, 1)};
}

}  // namespace

TEST_CASE("grid construction and validation") {
    auto g = full_grid(8, 8, 8, 8, 0.0, 2.0);
    CHECK(g->size() == 4096);
    CHECK(g->hx() == doctest::Approx(0.125));
    CHECK(g->hu() == doctest::Approx(0.125));

    GridSpec s;
    s.nu = 16;
    s.nv = 16;
    CHECK(Grid(s).size() == 256);

    s.nx = 3;
    try {
        Grid bad(s);
        FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("resolution must be even and >= 4") != std::string::npos);
        CHECK(std::string(e.what()).find("grid.nx") != std::string::npos);
    }
    s.nx = 8;
    s.t0 = 2.0;
    s.t1 = 1.0;
    CHECK_THROWS_AS(Grid{s}, ConfigError);
    s.base = BaseKind::annulus;
    s.r0 = 0.0;
    CHECK_THROWS_AS(Grid{s}, ConfigError);
}

TEST_CASE("annulus grid maps radii to v") {
    GridSpec s;
    s.base = BaseKind::annulus;
    s.r0 = 0.1;
    s.r1 = 0.5;
    Grid g(s);
    CHECK(std::abs(g.disc(0, 0)) == doctest::Approx(0.5));
    CHECK(std::abs(g.disc(3, g.nv() - 1)) == doctest::Approx(0.1));
}

TEST_CASE("spectral derivative of a single mode is exact") {
    auto g = full_grid(16, 8, 8, 8);
    auto f = ScalarField::sample(g, [](double x, double y, double u, double) {
        return std::sin(2 * pi * 3 * x) * std::cos(2 * pi * y) + std::cos(2 * pi * 2 * u);
    });
    auto fx = derivative(f, axis_x, 1);
    auto fxx = derivative(f, axis_x, 2);
    auto fuu = derivative(f, axis_u, 2);
    double err = 0;
    for (std::size_t n = 0; n < f.size(); ++n) {
        const auto c = g->coords(n);
        const double x = g->x(c[0]), y = g->y(c[1]), u = g->u(c[2]);
        err = std::max(err, std::abs(fx[n] - 6 * pi * std::cos(6 * pi * x) * std::cos(2 * pi * y)));
        err = std::max(err, std::abs(fxx[n] + 36 * pi * pi * std::sin(6 * pi * x) * std::cos(2 * pi * y)));
        err = std::max(err, std::abs(fuu[n] + 16 * pi * pi * std::cos(4 * pi * u)));
    }
    CHECK(err < 1e-10);
}

TEST_CASE("finite differences are exact on low-degree polynomials in v") {
    auto g = full_grid(4, 4, 4, 12, 1.0, 3.0);
    auto f = ScalarField::sample(g, [](double, double, double, double v) { return v * v * v * v - 2 * v; });
    auto d1 = derivative(f, axis_v, 1);
    auto d2 = derivative(f, axis_v, 2);
    for (std::size_t n = 0; n < f.size(); ++n) {
        const double v = g->v(g->coords(n)[3]);
        CHECK(d1[n] == doctest::Approx(4 * v * v * v - 2).epsilon(1e-10));
        CHECK(d2[n] == doctest::Approx(12 * v * v).epsilon(1e-10));
    }
}

TEST_CASE("i ddbar |z|^2 is the unit fiber form for constant tau") {
    const cplx tau0(0.3, 1.2);
    auto mod = ModulusFamily::constant(tau0);
    auto g = full_grid(8, 8, 4, 8);
    auto f = ScalarField::sample(g, [&](double x, double y, double, double) { return std::norm(x + tau0 * y); });
    f.set_periodic(axis_x, false).set_periodic(axis_y, false);
    auto H = complex_hessian(f, mod);
    for (std::size_t n = 0; n < H.size(); ++n) {
        CHECK(H.a[n] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(H.d[n]) < 1e-9);
        CHECK(std::hypot(H.br[n], H.bi[n]) < 1e-9);
    }
    auto re = ScalarField::sample(g, [&](double x, double y, double, double) {
        const cplx z = x + tau0 * y;
        return (z * z).real();
    });
    re.set_periodic(axis_x, false).set_periodic(axis_y, false);
    CHECK(complex_hessian(re, mod).sup_norm() < 1e-9);
}

TEST_CASE("complex hessian converges to the Wirtinger oracle") {
    auto mod = ModulusFamily::nome_log();
    auto f = [](double x, double, double, double v) { return std::sin(2 * pi * x) * std::sin(2 * pi * v); };
    double errs[2];
    int k = 0;
    for (int nv : {12, 24}) {
        auto g = full_grid(8, 8, 8, nv, 1.0, 2.0);
        auto field = ScalarField::sample(g, f);
        auto H = complex_hessian(field, mod);
        double err = 0;
        for (std::size_t n = 0; n < H.size(); n += 7) {
            const auto c = g->coords(n);
            const cplx w = g->w(c[2], c[3]);
            const cplx t = mod.at_w(w, BaseKind::strip).tau;
            const cplx z = g->x(c[0]) + t * g->y(c[1]);
            const auto o = wirtinger_oracle(f, mod, z, w);
            err = std::max({err, std::abs(H.a[n] - o[0].real()), std::abs(H.d[n] - o[1].real()),
                            std::abs(cplx(H.br[n], H.bi[n]) - o[2])});
        }
        errs[k++] = err;
    }
    CHECK(errs[1] < errs[0] / 4.0);
    CHECK(errs[1] < 0.05);  // second derivatives are O(40) here
}

TEST_CASE("complex hessian is linear and translation equivariant") {
    auto mod = ModulusFamily::constant(cplx(0, 1));
    auto g = full_grid(8, 8, 8, 8);
    auto f = ScalarField::sample(g, [](double x, double y, double u, double v) {
        return std::cos(2 * pi * (x + 2 * y)) * (1 + v * v) + std::sin(2 * pi * u) * v;
    });
    auto h = ScalarField::sample(g, [](double x, double, double u, double v) {
        return std::sin(2 * pi * x) * std::cos(2 * pi * u) * v * v * v;
    });
    ScalarField comb(g);
    for (std::size_t n = 0; n < f.size(); ++n) comb[n] = 2.0 * f[n] - 3.0 * h[n];
    auto lhs = complex_hessian(comb, mod);
    auto rhs = HermitianFormField::lincomb(2.0, complex_hessian(f, mod), -3.0, complex_hessian(h, mod));
    CHECK(lhs.sup_distance(rhs) < 1e-12 * std::max(1.0, rhs.sup_norm()));

    // shift by one grid cell in x
    ScalarField shifted(g);
    for (std::size_t n = 0; n < f.size(); ++n) {
        const auto c = g->coords(n);
        shifted[n] = f[g->index((c[0] + 1) % 8, c[1], c[2], c[3])];
    }
    auto Hf = complex_hessian(f, mod);
    auto Hs = complex_hessian(shifted, mod);
    double err = 0;
    for (std::size_t n = 0; n < f.size(); ++n) {
        const auto c = g->coords(n);
        const auto m = g->index((c[0] + 1) % 8, c[1], c[2], c[3]);
        err = std::max({err, std::abs(Hs.a[n] - Hf.a[m]), std::abs(Hs.d[n] - Hf.d[m]),
                        std::abs(Hs.br[n] - Hf.br[m]), std::abs(Hs.bi[n] - Hf.bi[m])});
    }
    CHECK(err < 1e-10);
}

TEST_CASE("quadrature") {
    auto g = full_grid(8, 8, 8, 10, 1.0, 3.0);
    ScalarField one(g, 1.0);
    CHECK(integrate(one, Region::fiber(2, 3)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(integrate(one) == doctest::Approx(2.0).epsilon(1e-14));
    auto c = ScalarField::sample(g, [](double x, double, double, double) { return std::cos(2 * pi * x); });
    CHECK(std::abs(integrate(c, Region::fiber(0, 0))) < 1e-15);

    // cos^2(2 pi x) sin^2(2 pi y) (1 + cos 2 pi u) cos^2(pi (v - 1)): closed form 1/4 * 1 * 1
    auto p = ScalarField::sample(g, [](double x, double y, double u, double v) {
        const double cv = std::cos(pi * (v - 1.0));
        return std::pow(std::cos(2 * pi * x), 2) * std::pow(std::sin(2 * pi * y), 2) *
               (1 + std::cos(2 * pi * u)) * cv * cv;
    });
    CHECK(std::abs(integrate(p) - 0.25) < 1e-12);
    CHECK_THROWS_AS(integrate(one, Region::fiber(8, 0)), DomainError);
    CHECK(integrate(one, Region::base_rect(0, 7, 0, 9)) == doctest::Approx(2.0).epsilon(1e-14));
}
