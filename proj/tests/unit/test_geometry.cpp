#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fibreflow/error.hpp"
#include "fibreflow/geometry.hpp"
#include "fibreflow/operators.hpp"
#include "helpers.hpp"

using namespace fibreflow;
using namespace testing_support;

namespace {

constexpr double pi = std::numbers::pi;

GridPtr sym_grid(int nu, int nv, double t0 = 1.0, double t1 = 2.0) {
    GridSpec s;
    s.nu = nu;
    s.nv = nv;
    s.t0 = t0;
    s.t1 = t1;
    return make_grid(s);
}

HermitianFormField constant_form(GridPtr g, double a, double d, cplx b = 0.0) {
    HermitianFormField f(g);
    for (std::size_t n = 0; n < f.size(); ++n) f.set(n, {a, d, b});
    return f;
}

}  // namespace

TEST_CASE("positivity spectrum") {
    auto g = sym_grid(4, 4);
    auto id = positivity_spectrum(constant_form(g, 1, 1));
    CHECK(id.min_eigenvalue == doctest::Approx(1.0));
    CHECK(id.positive_definite);
    CHECK(id.positive_on_fibers);
    auto ind = positivity_spectrum(constant_form(g, 1, -1));
    CHECK(ind.positive_on_fibers);
    CHECK_FALSE(ind.positive_definite);
    CHECK(ind.min_eigenvalue == doctest::Approx(-1.0));
}

TEST_CASE("poincare model is positive definite away from the divisor") {
    for (int i = 1; i <= 10; ++i)
        for (int j = 1; j <= 10; ++j) {
            const double r = 0.1 + 0.8 * (i - 1) / 9.0, t = 0.1 + 0.8 * (j - 1) / 9.0;
            if (std::abs(std::log(t * t) - std::log(r * r)) < 1e-9) continue;
            for (auto kind : {ModelKind::poincare, ModelKind::conical}) {
                const auto m = model_metric_eval(kind, {cplx(r, 0.0)}, cplx(t, 0.0));
                CHECK(m(0, 0).real() > 0.0);
                const auto m2 = model_metric_eval(kind, {cplx(r, 0.0), std::polar(0.5, 1.0)}, std::polar(t, 0.3));
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m2);
                CHECK(es.eigenvalues().minCoeff() > 0.0);
            }
        }
}

TEST_CASE("model metric transcription") {
    const double z = 0.5, t = 0.25;
    const double lz = std::log(z * z), lt = std::log(t * t);
    const double expect = (1.0 / pi) * (1.0 / (z * z * lz * lz) + 1.0 / ((lt - lz) * (lt - lz) * z * z));
    CHECK(model_metric_eval(ModelKind::poincare, {z}, t)(0, 0).real() == doctest::Approx(expect).epsilon(1e-14));

    const auto p = model_metric_eval(ModelKind::poincare, {z}, t)(0, 0).real();
    const auto c = model_metric_eval(ModelKind::conical, {z}, t)(0, 0).real();
    CHECK(c - p == doctest::Approx((1.0 / pi) * (1.0 / (z * z) - 1.0 / (z * z * lz * lz))).epsilon(1e-13));

    // |t| -> 1: weight -> 1 / (sum log|z_k|^2)^2
    const double near = model_metric_eval(ModelKind::conical, {z}, 1.0 - 1e-12)(0, 0).real();
    CHECK(near == doctest::Approx((1.0 / pi) * (1.0 / (z * z) + 1.0 / (lz * lz * z * z))).epsilon(1e-9));

    CHECK_THROWS_AS(model_metric_eval(ModelKind::poincare, {0.0}, 0.5), DomainError);
    CHECK_THROWS_AS(model_metric_eval(ModelKind::poincare, {0.5}, 0.0), DomainError);
    CHECK_THROWS_AS(model_metric_eval(ModelKind::poincare, {0.5}, 0.5), DomainError);
}

TEST_CASE("relative volume density and ricci forms") {
    auto g = sym_grid(8, 16);
    auto mod = ModulusFamily::constant(cplx(0, 1));
    auto w = constant_form(g, 2.0, 5.0);
    auto base = constant_form(g, 0.0, 3.0);
    auto dens = relative_volume_density(w, base);
    for (std::size_t n = 0; n < dens.size(); ++n) CHECK(dens[n] == doctest::Approx(6.0));
    CHECK(relative_ricci_form(w, base, mod).sup_norm() < 1e-12);
    CHECK_THROWS_AS(relative_volume_density(constant_form(g, -1.0, 1.0), base), NumericError);

    // density e^{sin 2 pi u} -> -i ddbar sin 2 pi u = pi^2 sin(2 pi u) on the base entry
    auto e = ScalarField::sample(g, [](double, double, double u, double) { return std::exp(std::sin(2 * pi * u)); });
    auto ric = ricci_of_density(e, mod);
    for (std::size_t n = 0; n < ric.size(); ++n) {
        const double u = g->u(g->coords(n)[2]);
        CHECK(ric.d[n] == doctest::Approx(pi * pi * std::sin(2 * pi * u)).epsilon(1e-10));
    }
    // scale invariance
    ScalarField e3 = e;
    for (auto& v : e3.values()) v *= 3.0;
    CHECK(ricci_of_density(e3, mod).sup_distance(ric) < 1e-10);
    ScalarField neg(g, -1.0);
    CHECK_THROWS_AS(ricci_of_density(neg, mod), DomainError);
}

TEST_CASE("ricci of Im tau on the nome-log family") {
    // -i ddbar log v = 1/(4 v^2) i dw ^ dwbar
    auto g = sym_grid(4, 64, 1.0, 4.0);
    auto mod = ModulusFamily::nome_log();
    auto im = ScalarField::sample(g, [](double, double, double, double v) { return v; });
    auto ric = ricci_of_density(im, mod);
    double err = 0;
    for (std::size_t n = 0; n < ric.size(); ++n) {
        const double v = g->v(g->coords(n)[3]);
        err = std::max(err, std::abs(ric.d[n] - 1.0 / (4 * v * v)) * 4 * v * v);
    }
    CHECK(err < 1e-3);
}

TEST_CASE("chern forms") {
    auto fib = build_fibration(annulus_spec(ModulusFamily::constant(cplx(0, 1)), 8, 16, 0.1, 0.5));
    ScalarField h(fib.grid, 2.0);
    auto c = chern_forms(h, fib.modulus(), Region::whole());
    CHECK(c.c1.sup_norm() < 1e-12);
    CHECK(c.c1_squared < 1e-20);

    auto nl = build_fibration(annulus_spec(ModulusFamily::nome_log(), 16, 64, 0.05, 0.5));
    ScalarField im(nl.grid);
    for (std::size_t n = 0; n < im.size(); ++n) im[n] = nl.tau_at(n).tau.imag();
    ScalarField im7 = im;
    for (auto& v : im7.values()) v *= 7.0;
    const double a = chern_forms(im, nl.modulus(), Region::whole()).c1_squared;
    const double b = chern_forms(im7, nl.modulus(), Region::whole()).c1_squared;
    CHECK(a > 0.0);
    CHECK(std::abs(a - b) < 1e-12 * a);
}

TEST_CASE("quasi-isometry ratio") {
    auto g = sym_grid(4, 8);
    auto A = constant_form(g, 2.0, 1.0, cplx(0.3, 0.4));
    auto B = constant_form(g, 1.0, 3.0, cplx(-0.2, 0.1));
    auto same = quasi_isometry_ratio(A, A);
    CHECK(same.c_low == doctest::Approx(1.0));
    CHECK(same.c_high == doctest::Approx(1.0));
    auto two = quasi_isometry_ratio(2.0 * B, B);
    CHECK(two.c_low == doctest::Approx(2.0));
    CHECK(two.c_high == doctest::Approx(2.0));

    // oracle: generalized eigenvalues solve det(A - lambda B) = 0
    const auto ab = quasi_isometry_ratio(A, B);
    const Hermitian2 a = A.at(0), b = B.at(0);
    const double qa = b.det();
    const double qb = -(a.a * b.d + a.d * b.a - 2.0 * (a.b * std::conj(b.b)).real());
    const double qc = a.det();
    const double disc = std::sqrt(qb * qb - 4 * qa * qc);
    CHECK(ab.c_low == doctest::Approx((-qb - disc) / (2 * qa)).epsilon(1e-12));
    CHECK(ab.c_high == doctest::Approx((-qb + disc) / (2 * qa)).epsilon(1e-12));
    const auto ba = quasi_isometry_ratio(B, A);
    CHECK(std::abs(ab.c_low - 1.0 / ba.c_high) < 1e-10);

    auto degenerate = constant_form(g, 1.0, 0.0);
    CHECK_THROWS_AS(quasi_isometry_ratio(A, degenerate), NumericError);
}

TEST_CASE("semi-flat metric against a Poincare-type model on a nome-log collar") {
    auto spec = annulus_spec(ModulusFamily::nome_log(), 8, 32, 0.02, 0.2);
    spec.base_metric.kind = BaseMetricKind::hyperbolic;
    auto fib = build_fibration(spec);
    const Grid& g = *fib.grid;
    // model: unit-area flat fiber plus the punctured-disc Poincare metric in w
    HermitianFormField model(fib.grid);
    for (std::size_t n = 0; n < model.size(); ++n) {
        const auto c = g.coords(n);
        const double r = std::abs(g.disc(c[2], c[3]));
        const double lr = std::log(r * r);
        model.a[n] = 1.0 / (2.0 * fib.tau_at(n).tau.imag());
        model.d[n] = g.disc_jacobian(c[2], c[3]) / (r * r * lr * lr);
    }
    const auto q = quasi_isometry_ratio(fib.omega0, model, Region::collar(g, 0, g.nv() - 1));
    CHECK(q.c_low > 0.0);
    CHECK(std::isfinite(q.c_high));
    CHECK(q.c_low <= q.c_high);
}
