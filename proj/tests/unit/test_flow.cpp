#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fibreflow/error.hpp"
#include "fibreflow/flow.hpp"
#include "fibreflow/operators.hpp"
#include "helpers.hpp"

using namespace fibreflow;
using namespace testing_support;

namespace {

Fibration ode_family(double c, int n = 8) {
    auto spec = strip_spec(ModulusFamily::constant(cplx(0, 1)), n, n, 1.0, 2.0);
    spec.reference.scale = c;
    return build_fibration(spec);
}

double ode_error(double dt, double horizon) {
    auto fib = ode_family(std::exp(1.0));
    FlowConfig cfg;
    cfg.dt = dt;
    cfg.max_steps = int(std::lround(horizon / dt));
    cfg.tolerance = 1e-300;
    cfg.record_every = cfg.max_steps;
    auto [state, rep] = run_flow(fib, cfg);
    const double exact = 1.0 - std::exp(-state.t);
    double err = 0.0;
    for (double v : state.phi.values()) err = std::max(err, std::abs(v - exact));
    return err;
}

}  // namespace

TEST_CASE("reference metric schedule") {
    auto fib = ode_family(1.0);
    HermitianFormField chi(fib.grid);
    for (std::size_t n = 0; n < chi.size(); ++n) chi.set(n, {0.0, -2.0, cplx(0.1, 0.2)});
    CHECK(reference_metric_at(0.0, fib.omega0, chi).sup_distance(fib.omega0) == 0.0);
    CHECK(reference_metric_at(30.0, fib.omega0, chi).sup_distance(chi) < 1e-12);
    auto half = HermitianFormField::lincomb(0.5, fib.omega0, 0.5, chi);
    CHECK(reference_metric_at(std::log(2.0), fib.omega0, chi).sup_distance(half) < 1e-15);
}

TEST_CASE("one Euler step reduces to the ODE") {
    const double c = 3.0, dt = 0.1;
    auto fib = ode_family(c);
    FlowConfig cfg;
    cfg.scheme = Scheme::euler;
    cfg.dt = dt;
    cfg.phi_coeff = 1.5;
    auto ctx = make_flow_context(fib, cfg);
    ScalarField phi0(fib.grid, 0.2);
    auto s0 = initial_state(ctx, &phi0);
    auto s1 = flow_step(s0, ctx, cfg);
    for (double v : s1.phi.values()) CHECK(v == doctest::Approx(0.2 + dt * (std::log(c) - 1.5 * 0.2)).epsilon(1e-14));
}

TEST_CASE("RK4 matches the closed-form ODE solution with fourth-order convergence") {
    CHECK(ode_error(1e-3, 5.0) < 1e-6);
    const double e1 = ode_error(0.05, 5.0), e2 = ode_error(0.025, 5.0);
    CHECK(e1 < 1e-6);
    CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("full-mode steps keep fiber periodicity") {
    auto spec = strip_spec(ModulusFamily::constant(cplx(0, 1)), 4, 8, 1.0, 2.0, GridMode::full, 8, 8);
    spec.reference.amplitude = 0.005;
    spec.reference.modes = {{1, 0, 0, 1}};
    spec.reference.scale = 1.3;
    auto fib = build_fibration(spec);
    FlowConfig cfg;
    cfg.dt = 1e-3;
    cfg.max_steps = 5;
    auto ctx = make_flow_context(fib, cfg);
    auto s = initial_state(ctx, nullptr);
    for (int i = 0; i < 5; ++i) s = flow_step(s, ctx, cfg);
    // spectral resampling on the fiber: shifting by a full period is the identity
    const Grid& g = *fib.grid;
    auto phix = derivative(s.phi, axis_x, 1);
    double mean = 0.0;
    for (int i = 0; i < g.nx(); ++i) mean += phix[g.index(i, 0, 0, 3)];
    CHECK(std::abs(mean) < 1e-13);
    CHECK(s.phi.sup() > 0.0);
}

TEST_CASE("indefinite data raises breakdown, not NaN") {
    auto fib = ode_family(1.0);
    FlowConfig cfg;
    cfg.max_steps = 10;
    auto ctx = make_flow_context(fib, cfg);
    ScalarField phi(fib.grid);
    const Grid& g = *fib.grid;
    for (std::size_t n = 0; n < phi.size(); ++n) phi[n] = -10.0 * std::pow(g.v(g.coords(n)[3]) - 1.5, 2);
    auto [state, rep] = run_flow(fib, cfg, &phi);
    CHECK_FALSE(rep.converged);
    CHECK(rep.breakdown_time.has_value());
}

TEST_CASE("stability guard and sign flag") {
    FlowConfig cfg;
    cfg.sign = +1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    auto spec = strip_spec(ModulusFamily::constant(cplx(0, 1)), 4, 4, 1.0, 2.0, GridMode::full, 16, 16);
    auto fib = build_fibration(spec);
    FlowConfig big;
    big.dt = 1.0;
    auto ctx = make_flow_context(fib, big);
    auto s = initial_state(ctx, nullptr);
    CHECK_THROWS_AS(flow_step(s, ctx, big), NumericError);
}

TEST_CASE("constant-tau family converges and the comparison principle holds") {
    auto fib = ode_family(2.0, 16);
    FlowConfig cfg;
    cfg.dt = 0.05;
    cfg.max_steps = 2000;
    cfg.tolerance = 1e-9;
    const Grid& g = *fib.grid;
    ScalarField lo(fib.grid), hi(fib.grid);
    for (std::size_t n = 0; n < lo.size(); ++n) {
        const auto c = g.coords(n);
        lo[n] = 0.01 * std::sin(2 * std::numbers::pi * g.u(c[2]));
        hi[n] = lo[n] + 0.5;
    }
    auto [sl, rl] = run_flow(fib, cfg, &lo);
    auto [sh, rh] = run_flow(fib, cfg, &hi);
    CHECK(rl.converged);
    CHECK(rh.converged);
    CHECK(rl.stationary_residual < 1e-6);
    CHECK(rl.ke_residual < 1e-5);
    const std::size_t rows = std::min(sl.history.size(), sh.history.size());
    for (std::size_t i = 0; i < rows; ++i) {
        CHECK(sh.history[i].inf_phi >= sl.history[i].inf_phi);
        CHECK(sh.history[i].min_eig > 0.0);
    }
    for (std::size_t i = 1; i < sl.history.size(); ++i) CHECK(sl.history[i].t > sl.history[i - 1].t);
    // unflowed data is far from relative KE
    CHECK(ke_residual(fib.omega0, fib, 1.0, KeMode::relative) > 100.0 * rl.ke_residual);
}

TEST_CASE("relative KE residual of the exact stationary solution") {
    auto fib = ode_family(std::exp(1.0));
    FlowConfig cfg;
    auto ctx = make_flow_context(fib, cfg);
    ScalarField phi(fib.grid, 1.0);
    const double t = 40.0;
    auto w = reference_metric_at(t, fib.omega0, ctx.chi);
    CHECK(ke_residual(w, fib, 1.0, KeMode::relative, t) < 1e-10);
}

TEST_CASE("twisted KE residual of the exact base metrics") {
    auto check = [](ModulusFamily tau, double k) {
        auto spec = strip_spec(tau, 4, 128, 1.0, 3.0);
        auto fib = build_fibration(spec);
        HermitianFormField w(fib.grid);
        for (std::size_t n = 0; n < w.size(); ++n) {
            const double v = fib.grid->v(fib.grid->coords(n)[3]);
            w.set(n, {0.5, k / (v * v), 0.0});
        }
        return ke_residual(w, fib, 1.0, KeMode::song_tian);
    };
    CHECK(check(ModulusFamily::constant(cplx(0, 1)), 0.5) < 1e-5);
    CHECK(check(ModulusFamily::nome_log(), 0.75) < 1e-5);
    CHECK(check(ModulusFamily::nome_log(), 0.5) > 0.01);
}

TEST_CASE("breakdown time") {
    auto fib = ode_family(2.0);  // omega0 = diag(1, 1)
    HermitianFormField chi(fib.grid);
    for (std::size_t n = 0; n < chi.size(); ++n) chi.set(n, {1.0, -1.0, 0.0});
    CHECK(std::abs(breakdown_time(fib.omega0, chi) - std::log(2.0)) < 1e-6);
    HermitianFormField psd(fib.grid);
    for (std::size_t n = 0; n < psd.size(); ++n) psd.set(n, {0.0, 2.0, 0.0});
    CHECK(std::isinf(breakdown_time(fib.omega0, psd)));

    // mixed-sign field: pointwise closed form ln((a + b) / a), minimized over points
    HermitianFormField mixed(fib.grid);
    double expect = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < mixed.size(); ++n) {
        const double a = 0.5 + 0.01 * double(n % 37);
        const double d = (n % 3 == 0) ? 0.3 : -a;
        mixed.set(n, {1.0, d, 0.0});
        if (d < 0) expect = std::min(expect, std::log((a + 1.0) / a));
    }
    CHECK(std::abs(breakdown_time(fib.omega0, mixed) - expect) < 2e-6);
}

TEST_CASE("conical regularization") {
    auto spec = strip_spec(ModulusFamily::constant(cplx(0, 1)), 8, 16, 1.0, 2.0);
    spec.reference.scale = 1.5;
    spec.divisor = DivisorSpec{cplx(0.5, 1.5), 1.0, 0.1, 0.0};
    auto fib = build_fibration(spec);
    FlowConfig cfg;
    cfg.dt = 0.05;
    cfg.max_steps = 100;
    auto [smooth, rs] = run_flow(fib, cfg);
    cfg.conical = ConicalParams{1.0, 0.1, 0.0};
    auto [cone, rc] = run_flow(fib, cfg);
    CHECK(smooth.phi.values() == cone.phi.values());
    REQUIRE(smooth.history.size() == cone.history.size());
    for (std::size_t i = 0; i < smooth.history.size(); ++i) CHECK(smooth.history[i].sup_phi == cone.history[i].sup_phi);

    // divisor outside the domain: the difference solves d' = s - d exactly
    spec.divisor = DivisorSpec{cplx(0.5, -3.0), 0.5, 0.1, 0.01};
    spec.base_metric.scale = 10.0;
    auto far = build_fibration(spec);
    FlowConfig c2;
    c2.dt = 0.01;
    c2.max_steps = 200;
    c2.tolerance = 1e-300;
    auto [base_run, r0] = run_flow(far, c2);
    c2.conical = ConicalParams{0.5, 0.1, 0.01};
    auto [shifted, r1] = run_flow(far, c2);
    const Grid& g = *far.grid;
    double err = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto c = g.coords(n);
        const cplx e = std::exp(cplx(0.0, 2 * std::numbers::pi) * (g.disc(c[2], c[3]) - cplx(0.5, -3.0)));
        const double S = std::norm(e - 1.0) / (4 * std::numbers::pi * std::numbers::pi) + 0.01;
        const double s = 0.5 * std::log(S) - 0.01 * std::sqrt(S);
        const double d = s * (1.0 - std::exp(-shifted.t));
        err = std::max(err, std::abs((shifted.phi[n] - base_run.phi[n]) - d));
    }
    CHECK(r1.stop_reason == "max_steps");
    CHECK(err < 1e-8);
}
