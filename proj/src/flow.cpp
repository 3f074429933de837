#include "fibreflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fibreflow/error.hpp"
#include "fibreflow/operators.hpp"
#include "fibreflow/simd/kernels.hpp"

namespace fibreflow {

namespace {

double min_eigenvalue(const HermitianFormField& w, std::size_t* where) {
    std::vector<double> lo, hi;
    w.eigenvalues(lo, hi);
    const auto it = std::min_element(lo.begin(), lo.end());
    if (where) *where = std::size_t(it - lo.begin());
    return *it;
}

DiagnosticRow diagnose(const FlowState& s, double residual) {
    return {s.t, s.phi.sup(), s.phi.inf(), residual, min_eigenvalue(s.omega, nullptr)};
}

HermitianFormField current_metric(const FlowContext& ctx, double t, const ScalarField& phi) {
    HermitianFormField w = reference_metric_at(t, ctx.fib->omega0, ctx.chi);
    w += complex_hessian(phi, ctx.fib->modulus());
    return w;
}

void stability_guard(const FlowContext& ctx, const FlowConfig& cfg, double t) {
    const Grid& g = *ctx.fib->grid;
    if (!g.full()) return;
    const double gmin = simd::min_value(ctx.target);
    double lam = 0.0;
    for (const auto& m : ctx.fib->tau) {
        const double b = m.tau.imag();
        const double kx = g.nx() / 2, ly = g.ny() / 2;
        const double top = std::max(std::norm(ly - kx * m.tau), std::norm(ly + kx * m.tau));
        lam = std::max(lam, std::exp(t) * std::numbers::pi * std::numbers::pi * top / (b * b * gmin));
    }
    if (cfg.dt * lam > 10.0 * cfg.stability_c)
        throw NumericError("flow: time step " + std::to_string(cfg.dt) + " violates the stability guard at t = " +
                           std::to_string(t) + " (dt * lambda_max = " + std::to_string(cfg.dt * lam) + ")");
}

}  // namespace

void FlowConfig::validate() const {
    if (sign == +1) throw ConfigError("flow.sign: the Fano schedule (sign +1) is out of scope");
    if (sign != -1) throw ConfigError("flow.sign: must be -1");
    if (!(dt > 0.0)) throw ConfigError("flow.dt: must be positive");
    if (max_steps < 0) throw ConfigError("flow.max_steps: must be >= 0");
    if (!(tolerance > 0.0)) throw ConfigError("flow.tolerance: must be positive");
    if (positivity_cadence < 1) throw ConfigError("flow.positivity_cadence: must be >= 1");
    if (record_every < 1) throw ConfigError("flow.record_every: must be >= 1");
    if (!(stability_c > 0.0)) throw ConfigError("flow.stability_c: must be positive");
    if (!std::isfinite(phi_coeff)) throw ConfigError("flow.phi: must be finite");
    if (conical) {
        if (!(conical->beta > 0.0 && conical->beta <= 1.0)) throw ConfigError("conical.beta: must lie in (0,1]");
        if (!(conical->epsilon > 0.0)) throw ConfigError("conical.epsilon: must be positive");
        if (!(conical->delta >= 0.0)) throw ConfigError("conical.delta: must be >= 0");
    }
}

HermitianFormField reference_metric_at(double t, const HermitianFormField& omega0, const HermitianFormField& chi) {
    if (!(t >= 0.0)) throw DomainError("reference_metric_at: t must be >= 0");
    const double e = std::exp(-t);
    return HermitianFormField::lincomb(e, omega0, 1.0 - e, chi);
}

FlowContext make_flow_context(const Fibration& fib, const FlowConfig& cfg) {
    cfg.validate();
    FlowContext ctx;
    ctx.fib = &fib;
    ctx.omega_srf = fiberwise_cy_solve(fib, fib.omega0).omega_srf;
    ctx.target = unit_area_fiber_density(fib, ctx.omega_srf);
    // Reference schedule uses the divisor-free relative canonical density.
    ScalarField stt(fib.grid);
    for (std::size_t n = 0; n < stt.size(); ++n) stt[n] = 1.0 / (2.0 * ctx.target[n]);
    ctx.chi = ricci_of_density(stt, fib.modulus());
    if (cfg.conical) {
        if (!fib.spec.divisor) throw ConfigError("conical flow: divisor data is required");
        const Grid& g = *fib.grid;
        const auto& c = *cfg.conical;
        ctx.cone_factor.resize(g.size());
        ctx.cone_shift.resize(g.size());
        for (std::size_t n = 0; n < g.size(); ++n) {
            const auto q = g.coords(n);
            const double s = fib.section_norm2(q[2], q[3]) + c.epsilon * c.epsilon;
            ctx.cone_factor[n] = std::pow(s, 1.0 - c.beta);
            ctx.cone_shift[n] = c.delta * std::pow(s, c.beta);
        }
    }
    return ctx;
}

namespace {

// log of the (regularized) fiber volume ratio, without the -Phi phi term.
std::vector<double> log_ratio(const FlowContext& ctx, double t, const ScalarField& phi) {
    const Grid& g = phi.grid();
    const auto& w0 = ctx.fib->omega0;
    const double e = std::exp(-t);
    std::vector<double> fiber(g.size());
    if (g.full()) {
        const HermitianFormField h = complex_hessian(phi, ctx.fib->modulus());
        for (std::size_t n = 0; n < fiber.size(); ++n)
            fiber[n] = e * w0.a[n] + (1.0 - e) * ctx.chi.a[n] + h.a[n];
    } else {
        for (std::size_t n = 0; n < fiber.size(); ++n) fiber[n] = e * w0.a[n] + (1.0 - e) * ctx.chi.a[n];
    }
    const double et = std::exp(t);
    std::vector<double> out(g.size());
    const bool cone = !ctx.cone_factor.empty();
    for (std::size_t n = 0; n < out.size(); ++n) {
        double ratio = et * fiber[n] / ctx.target[n];
        if (cone) ratio *= ctx.cone_factor[n];
        if (!(ratio > 0.0))
            throw BreakdownError("flow: fiber volume ratio lost positivity at t = " + std::to_string(t), t, n);
        double r = std::log(ratio);
        if (cone) r -= ctx.cone_shift[n];
        if (!std::isfinite(r)) throw NumericError("flow: non-finite right-hand side at t = " + std::to_string(t));
        out[n] = r;
    }
    return out;
}

}  // namespace

std::vector<double> flow_rhs(const FlowContext& ctx, const FlowConfig& cfg, double t, const ScalarField& phi) {
    std::vector<double> out = log_ratio(ctx, t, phi);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] -= cfg.phi_coeff * phi[n];
    return out;
}

FlowState initial_state(const FlowContext& ctx, const ScalarField* phi0) {
    FlowState s;
    s.t = 0.0;
    s.phi = phi0 ? *phi0 : ScalarField(ctx.fib->grid, 0.0);
    s.omega = current_metric(ctx, 0.0, s.phi);
    return s;
}

FlowState flow_step(const FlowState& state, const FlowContext& ctx, const FlowConfig& cfg) {
    stability_guard(ctx, cfg, state.t + cfg.dt);
    const double dt = cfg.dt;
    const double t = state.t;
    FlowState next;
    next.history = state.history;
    next.phi = state.phi;
    auto& out = next.phi.values();
    if (cfg.scheme == Scheme::euler) {
        const auto L = log_ratio(ctx, t, state.phi);
        simd::relax_step(state.phi.values(), L, cfg.phi_coeff, dt, out);
    } else {
        auto stage = [&](const std::vector<double>& k, double c) {
            ScalarField p = state.phi;
            simd::lincomb(1.0, state.phi.values(), c * dt, k, p.values());
            return p;
        };
        const auto k1 = flow_rhs(ctx, cfg, t, state.phi);
        const auto k2 = flow_rhs(ctx, cfg, t + 0.5 * dt, stage(k1, 0.5));
        const auto k3 = flow_rhs(ctx, cfg, t + 0.5 * dt, stage(k2, 0.5));
        const auto k4 = flow_rhs(ctx, cfg, t + dt, stage(k3, 1.0));
        std::vector<double> sum(k1.size());
        simd::lincomb(1.0, k1, 2.0, k2, sum);
        simd::lincomb(1.0, sum, 2.0, k3, sum);
        simd::lincomb(1.0, sum, 1.0, k4, sum);
        simd::lincomb(1.0, state.phi.values(), dt / 6.0, sum, out);
    }
    if (cfg.pin_boundary) {
        const Grid& g = next.phi.grid();
        const std::size_t plane = g.axis_stride(axis_v);
        const std::size_t last = plane * (g.nv() - 1);
        for (std::size_t q = 0; q < plane; ++q) {
            out[q] = state.phi[q];
            out[last + q] = state.phi[last + q];
        }
    }
    next.phi.check_finite("flow_step");
    next.t = t + dt;
    next.omega = current_metric(ctx, next.t, next.phi);
    return next;
}

namespace {

void check_positive(const FlowState& s) {
    std::size_t where = 0;
    const double m = min_eigenvalue(s.omega, &where);
    if (!(m > 0.0)) {
        const auto c = s.omega.grid().coords(where);
        throw BreakdownError("flow: metric lost positive-definiteness at t = " + std::to_string(s.t) +
                                 " (i,j,k,l)=(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," +
                                 std::to_string(c[2]) + "," + std::to_string(c[3]) + ")",
                             s.t, where);
    }
}

std::pair<FlowState, FlowReport> run_with_context(const FlowContext& ctx, const FlowConfig& cfg,
                                                  const ScalarField* phi0) {
    FlowReport rep;
    FlowState s = initial_state(ctx, phi0);
    auto residual = [&](const FlowState& st) { return simd::max_abs(flow_rhs(ctx, cfg, st.t, st.phi)); };
    double res = 0.0;
    rep.stop_reason = "max_steps";
    try {
        res = residual(s);
        check_positive(s);
        // a zero-step run has no diagnostic records
        if (cfg.max_steps > 0) s.history.push_back(diagnose(s, res));
        for (int step = 1; step <= cfg.max_steps && !(res < cfg.tolerance); ++step) {
            s = flow_step(s, ctx, cfg);
            rep.steps = step;
            if (step % cfg.positivity_cadence == 0) check_positive(s);
            res = residual(s);
            if (step % cfg.record_every == 0 || res < cfg.tolerance || step == cfg.max_steps)
                s.history.push_back(diagnose(s, res));
        }
        if (res < cfg.tolerance) {
            rep.converged = true;
            rep.stop_reason = "converged";
        }
    } catch (const BreakdownError& e) {
        rep.breakdown_time = e.time();
        rep.stop_reason = std::string("breakdown: ") + e.what();
    }
    rep.t_final = s.t;
    rep.stationary_residual = res;
    rep.ke_residual = ke_residual(s.omega, *ctx.fib, cfg.phi_coeff, KeMode::relative, s.t);
    return {std::move(s), rep};
}

}  // namespace

std::pair<FlowState, FlowReport> run_flow(const Fibration& fib, const FlowConfig& cfg, const ScalarField* phi0) {
    const FlowContext ctx = make_flow_context(fib, cfg);
    return run_with_context(ctx, cfg, phi0);
}

std::pair<FlowState, FlowReport> conical_flow_run(const Fibration& fib, const FlowConfig& cfg,
                                                  const std::vector<double>& epsilons) {
    if (!fib.spec.divisor) throw ConfigError("conical-flow: divisor data is required");
    if (epsilons.empty()) throw ConfigError("conical.epsilons: need at least one value");
    std::pair<FlowState, FlowReport> last;
    std::vector<double> sups;
    for (double eps : epsilons) {
        FlowConfig c = cfg;
        ConicalParams p = c.conical.value_or(ConicalParams{});
        if (!c.conical) {
            p.beta = fib.spec.divisor->beta;
            p.delta = fib.spec.divisor->delta;
        }
        p.epsilon = eps;
        c.conical = p;
        last = run_flow(fib, c);
        double sup = last.first.phi.sup();
        for (const auto& row : last.first.history) sup = std::max(sup, row.sup_phi);
        sups.push_back(sup);
    }
    last.second.sup_phi_per_epsilon = sups;
    return last;
}

double ke_residual(const HermitianFormField& omega, const Fibration& fib, double phi_coeff, KeMode mode, double t) {
    const Grid& g = omega.grid();
    ScalarField logd(omega.grid_ptr());
    if (mode == KeMode::relative) {
        const double et = std::exp(t);
        for (std::size_t n = 0; n < logd.size(); ++n) {
            const double a = et * omega.a[n];
            if (!(a > 0.0)) throw NumericError("ke_residual: degenerate fiber metric");
            logd[n] = std::log(a);
        }
        const HermitianFormField h = complex_hessian(logd, fib.modulus());
        double r = 0.0;
        for (std::size_t n = 0; n < logd.size(); ++n) r = std::max(r, std::abs(-h.d[n] + phi_coeff * omega.d[n]));
        return r;
    }
    for (std::size_t n = 0; n < logd.size(); ++n) {
        if (!(omega.d[n] > 0.0)) throw NumericError("ke_residual: degenerate base metric");
        logd[n] = std::log(omega.d[n]);
    }
    const HermitianFormField h = complex_hessian(logd, fib.modulus());
    double r = 0.0;
    for (std::size_t n = 0; n < logd.size(); ++n) {
        const double wp = ks_norm_squared(fib.tau[g.base_of(n)]);
        r = std::max(r, std::abs(-h.d[n] + omega.d[n] - wp));
    }
    return r;
}

double breakdown_time(const HermitianFormField& omega0, const HermitianFormField& chi) {
    auto positive_at = [&](double t) {
        return min_eigenvalue(reference_metric_at(t, omega0, chi), nullptr) > 0.0;
    };
    if (!positive_at(0.0)) return 0.0;
    std::vector<double> lo, hi;
    chi.eigenvalues(lo, hi);
    if (*std::min_element(lo.begin(), lo.end()) >= 0.0) return std::numeric_limits<double>::infinity();
    double a = 0.0, b = 1.0;
    while (positive_at(b)) {
        a = b;
        b *= 2.0;
        if (b > 700.0) return std::numeric_limits<double>::infinity();
    }
    while (b - a > 1e-8) {
        const double m = 0.5 * (a + b);
        (positive_at(m) ? a : b) = m;
    }
    return 0.5 * (a + b);
}

}  // namespace fibreflow
