#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "fibreflow/cli.hpp"
#include "fibreflow/error.hpp"
#include "fibreflow/operators.hpp"

namespace fibreflow {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// ---- config value accessors -------------------------------------------------

double as_double(const std::string& key, const json& v) {
    if (!v.is_number()) throw ConfigError("config " + key + ": expected a number");
    return v.get<double>();
}

int as_int(const std::string& key, const json& v) {
    if (!v.is_number_integer()) throw ConfigError("config " + key + ": expected an integer");
    return v.get<int>();
}

bool as_bool(const std::string& key, const json& v) {
    if (!v.is_boolean()) throw ConfigError("config " + key + ": expected true or false");
    return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
    if (!v.is_string()) throw ConfigError("config " + key + ": expected a string");
    return v.get<std::string>();
}

cplx as_cplx(const std::string& key, const json& v) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError("config " + key + ": expected a number or [re, im]");
}

std::vector<double> as_doubles(const std::string& key, const json& v) {
    if (!v.is_array() || v.empty()) throw ConfigError("config " + key + ": expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_double(key, e));
    return out;
}

template <class E>
E as_enum(const std::string& key, const json& v, std::initializer_list<std::pair<const char*, E>> options) {
    const std::string s = as_string(key, v);
    std::string names;
    for (const auto& [name, e] : options) {
        if (s == name) return e;
        names += std::string(names.empty() ? "" : ", ") + name;
    }
    throw ConfigError("config " + key + ": '" + s + "' is not one of " + names);
}

json cplx_json(cplx z) { return json::array({json_number(z.real()), json_number(z.imag())}); }

json doubles_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
}

// ---- pipelines --------------------------------------------------------------

void add_flow_results(Report& r, const FlowState& state, const FlowReport& rep) {
    json f = json::object();
    f["converged"] = rep.converged;
    f["steps"] = rep.steps;
    f["t_final"] = json_number(rep.t_final);
    f["stop_reason"] = rep.stop_reason;
    f["stationary_residual"] = json_number(rep.stationary_residual);
    f["ke_residual"] = json_number(rep.ke_residual);
    if (rep.breakdown_time) f["breakdown_time"] = json_number(*rep.breakdown_time);
    f["sup_phi"] = json_number(state.phi.sup());
    f["inf_phi"] = json_number(state.phi.inf());
    f["breakdown_criterion"] = "pointwise eigenvalues of the numerical path of forms";
    r.results["flow"] = std::move(f);

    Table t{{"t", "sup_phi", "inf_phi", "residual", "min_eig"}, {}};
    for (const auto& row : state.history) t.rows.push_back({row.t, row.sup_phi, row.inf_phi, row.residual, row.min_eig});
    r.tables["flow_diag"] = std::move(t);
    if (rep.stop_reason.rfind("breakdown", 0) == 0) r.status = "breakdown";
    else r.status = rep.converged ? "converged" : "max_steps";
}

void maybe_snapshot(const RunConfig& c, const std::filesystem::path& dir, const FlowState& s) {
    if (!c.snapshots) return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    write_snapshot(make_snapshot(s.phi, "phi"), dir / "phi.snap");
    write_snapshot(make_snapshot(s.omega, "omega"), dir / "omega.snap");
}

Report flow_pipeline(const RunConfig& c, const std::filesystem::path& dir) {
    const Fibration fib = build_fibration(c.fibration);
    auto [state, rep] = run_flow(fib, c.flow);
    Report r;
    r.command = "flow";
    add_flow_results(r, state, rep);
    maybe_snapshot(c, dir, state);
    return r;
}

Report conical_pipeline(const RunConfig& c, const std::filesystem::path& dir) {
    if (!c.fibration.divisor) throw ConfigError("conical-flow: divisor.* keys are required");
    const Fibration fib = build_fibration(c.fibration);
    auto [state, rep] = conical_flow_run(fib, c.flow, c.epsilons);
    Report r;
    r.command = "conical-flow";
    add_flow_results(r, state, rep);
    const ConicalParams cp = c.flow.conical.value_or(
        ConicalParams{c.fibration.divisor->beta, c.fibration.divisor->epsilon, c.fibration.divisor->delta});
    json k = json::object();
    k["beta"] = cp.beta;
    k["delta"] = cp.delta;
    k["epsilons"] = doubles_json(c.epsilons);
    k["sup_phi_per_epsilon"] = doubles_json(rep.sup_phi_per_epsilon);
    const auto [lo, hi] = std::minmax_element(rep.sup_phi_per_epsilon.begin(), rep.sup_phi_per_epsilon.end());
    if (lo != rep.sup_phi_per_epsilon.end()) {
        const double scale = std::max(std::abs(*lo), std::abs(*hi));
        k["relative_variation"] = json_number(scale > 0 ? (*hi - *lo) / scale : 0.0);
    }
    r.results["conical"] = std::move(k);
    maybe_snapshot(c, dir, state);
    return r;
}

Report wp_pipeline(const RunConfig& c) {
    const Fibration fib = build_fibration(c.fibration);
    const Grid& g = *fib.grid;
    const WpReport hess = wp_form(fib, WpRoute::hessian);
    const WpReport ks = wp_form(fib, WpRoute::ks);
    const WpReport dist = wp_distance(fib);

    Report r;
    r.command = "wp";
    double max_rel = 0.0, max_abs = 0.0, min_g = 0.0;
    Table t{{"u", "v", "g_hessian", "g_ks"}, {}};
    for (int l = 0; l < g.nv(); ++l)
        for (int k = 0; k < g.nu(); ++k) {
            const std::size_t b = g.base_index(k, l);
            const double diff = std::abs(hess.g_wp[b] - ks.g_wp[b]);
            max_abs = std::max(max_abs, diff);
            if (ks.g_wp[b] > 1e-14) max_rel = std::max(max_rel, diff / ks.g_wp[b]);
            min_g = std::min({min_g, hess.g_wp[b], ks.g_wp[b]});
            t.rows.push_back({g.u(k), g.v(l), hess.g_wp[b], ks.g_wp[b]});
        }
    r.tables["wp_samples"] = std::move(t);

    json routes = json::object();
    routes["calibration"] = hess.calibration;
    routes["fitted_calibration"] = json_number(hess.fitted_calibration);
    routes["max_abs_difference"] = json_number(max_abs);
    routes["max_relative_difference"] = json_number(max_rel);
    routes["min_g_wp"] = json_number(min_g);
    r.results["routes"] = std::move(routes);

    json d = json::object();
    d["verdict"] = dist.verdict;
    if (dist.verdict == "finite") d["distance"] = json_number(dist.distance);
    d["truncations"] = doubles_json(dist.truncations);
    d["panels"] = dist.panels;
    d["level_verdicts"] = dist.level_verdicts;
    json partial = json::array();
    for (const auto& level : dist.partial_lengths) partial.push_back(doubles_json(level));
    d["partial_lengths"] = std::move(partial);
    r.results["distance"] = std::move(d);

    if (g.spec().base == BaseKind::annulus) {
        const YoshikawaFit y = yoshikawa_fit(ks, fib);
        r.results["yoshikawa"] = {{"C", json_number(y.C)},
                                  {"r", json_number(y.r)},
                                  {"holds", y.holds},
                                  {"degenerate", y.degenerate},
                                  {"samples", y.samples}};
    }
    return r;
}

// Fiber-averaged potential on the base, evaluated at a disc coordinate with
// periodic cubic interpolation in u and clamped cubic interpolation in v.
class BaseInterpolant {
public:
    BaseInterpolant(const Fibration& fib, const ScalarField& phi) : g_(*fib.grid), avg_(g_.base_size(), 0.0) {
        for (std::size_t n = 0; n < phi.size(); ++n) avg_[g_.base_of(n)] += phi[n];
        for (auto& a : avg_) a /= double(g_.points_per_base());
    }

    cplx to_w(cplx s) const {
        if (g_.spec().base == BaseKind::strip) return s;
        if (s == cplx(0.0, 0.0)) throw DomainError("lelong: the annulus puncture is outside the grid");
        double u = std::arg(s) / two_pi;
        if (u < 0) u += 1.0;
        return {u, -std::log(std::abs(s)) / two_pi};
    }

    double operator()(cplx s) const {
        const cplx w = to_w(s);
        const double fu = w.real() / g_.hu(), fv = (w.imag() - g_.v_min()) / g_.hv();
        if (fv < -1e-12 || fv > g_.nv() - 1 + 1e-12)
            throw DomainError("lelong: sample point leaves the base grid in v");
        const int ku = int(std::floor(fu));
        const int lv = std::clamp(int(std::floor(fv)) - 1, 0, g_.nv() - 4);
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) {
            const int l = lv + a;
            double row = 0.0;
            for (int b = -1; b < 3; ++b) {
                const int k = ((ku + b) % g_.nu() + g_.nu()) % g_.nu();
                row += lagrange(fu - ku, b, -1) * avg_[g_.base_index(k, l)];
            }
            acc += lagrange(fv - lv, a, 0) * row;
        }
        return acc;
    }

    double spacing() const { return std::max(g_.hu(), g_.hv()); }

private:
    // cubic Lagrange weight of node `node` in {first .. first+3} at position x
    static double lagrange(double x, int node, int first) {
        double w = 1.0;
        for (int m = first; m < first + 4; ++m)
            if (m != node) w *= (x - m) / double(node - m);
        return w;
    }

    const Grid& g_;
    std::vector<double> avg_;
};

Report lelong_pipeline(const RunConfig& c) {
    const LelongConfig& lc = c.lelong;
    Report r;
    r.command = "lelong";
    std::function<double(cplx)> u;
    std::optional<Fibration> fib;
    std::optional<BaseInterpolant> interp;
    if (lc.source == "model") {
        u = [&](cplx z) { return lc.lambda * std::log(std::norm(z - lc.center)) + lc.smooth * std::norm(z - lc.center); };
    } else {
        fib.emplace(build_fibration(c.fibration));
        auto [state, rep] = run_flow(*fib, c.flow);
        add_flow_results(r, state, rep);
        r.tables.erase("flow_diag");
        interp.emplace(*fib, state.phi);
        const double r_min = lc.r_max * std::pow(2.0, -double(lc.octaves));
        double w_min = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 16; ++t) {
            const cplx s = lc.center + std::polar(r_min, two_pi * t / 16);
            w_min = std::min(w_min, std::abs(interp->to_w(s) - interp->to_w(lc.center)));
        }
        if (w_min < 2.0 * interp->spacing())
            throw DomainError("lelong: innermost radius " + format_double(r_min) +
                              " underflows the grid resolution; refine the base grid or raise lelong.r_max");
        u = [&](cplx z) { return (*interp)(z); };
    }
    const LelongResult res =
        lelong_estimate(sample_polar(u, lc.center, lc.r_max, lc.octaves, lc.per_octave, lc.n_theta));
    json l = json::object();
    l["source"] = lc.source;
    l["point"] = cplx_json(res.point);
    l["slope_estimate"] = json_number(res.slope_estimate);
    l["mass_limit"] = json_number(res.mass_limit);
    l["estimate"] = json_number(res.estimate());
    l["routes_agree"] = res.routes_agree;
    l["mass_monotone"] = res.mass_monotone;
    r.results["lelong"] = std::move(l);
    Table t{{"r", "mass_ratio"}, {}};
    for (std::size_t i = 0; i < res.radii.size(); ++i) t.rows.push_back({res.radii[i], res.mass_ratio[i]});
    r.tables["lelong_radii"] = std::move(t);
    if (lc.source == "model") r.status = "ok";
    return r;
}

Report models_pipeline(const RunConfig& c) {
    const ModelsConfig& m = c.models;
    if (m.n < 1 || m.n > 3) throw ConfigError("config models.n: expected 1, 2 or 3");
    Report r;
    r.command = "models";
    Table t{{}, {}};
    for (int k = 0; k < m.n; ++k) t.columns.push_back("r" + std::to_string(k + 1));
    t.columns.push_back("min_eig");
    t.columns.push_back("max_eig");
    std::size_t total = 1, singular = 0, pd = 0;
    for (int k = 0; k < m.n; ++k) total *= m.radii.size();
    double min_eig = std::numeric_limits<double>::infinity(), max_eig = -min_eig;
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::vector<cplx> z(m.n);
        std::vector<double> row;
        std::size_t rem = idx;
        for (int k = 0; k < m.n; ++k) {
            const double rad = m.radii[rem % m.radii.size()];
            rem /= m.radii.size();
            z[k] = std::polar(rad, two_pi * 0.1 * (k + 1));
            row.push_back(rad);
        }
        try {
            const Eigen::MatrixXcd M = model_metric_eval(m.kind, z, m.t);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
            const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
            min_eig = std::min(min_eig, lo);
            max_eig = std::max(max_eig, hi);
            if (lo > 0) ++pd;
            row.push_back(lo);
            row.push_back(hi);
            t.rows.push_back(std::move(row));
        } catch (const DomainError&) {
            ++singular;
        }
    }
    r.tables["model_samples"] = std::move(t);
    r.results["models"] = {{"kind", m.kind == ModelKind::poincare ? "poincare" : "conical"},
                           {"n", m.n},
                           {"t", cplx_json(m.t)},
                           {"samples", total},
                           {"singular_samples", singular},
                           {"positive_definite_samples", pd},
                           {"all_positive_definite", pd + singular == total && pd > 0},
                           {"min_eigenvalue", json_number(min_eig)},
                           {"max_eigenvalue", json_number(max_eig)}};
    return r;
}

Report volume_pipeline(const RunConfig& c) {
    const Fibration fib = build_fibration(c.fibration);
    const VolumeProbe p = fiber_volume_probe(fib, c.volume_weighted);
    const SttMeasure stt = stt_measure(fib, fiberwise_cy_solve(fib, fib.omega0).omega_srf);
    Report r;
    r.command = "volume";
    r.results["volume"] = {{"weighted", p.weighted},
                           {"continuous", p.continuous},
                           {"smooth", p.smooth},
                           {"truncations", doubles_json(p.truncations)},
                           {"end_values", doubles_json(p.end_values)},
                           {"divided_diff_max", doubles_json(p.divided_diff_max)}};
    r.results["stt"] = {{"bounded", stt.bounded},
                        {"collar_radius", doubles_json(stt.collar_radius)},
                        {"collar_sup", doubles_json(stt.collar_sup)}};
    Table t{{"rho", "volume"}, {}};
    for (std::size_t i = 0; i < p.rho.size(); ++i) t.rows.push_back({p.rho[i], p.volume[i]});
    r.tables["volume_profile"] = std::move(t);
    return r;
}

Report foliation_pipeline(const RunConfig& c) {
    const Fibration fib = build_fibration(c.fibration);
    const HermitianFormField srf = fiberwise_cy_solve(fib, fib.omega0).omega_srf;
    HermitianFormField form;
    if (c.foliation_form == "srf") form = srf;
    else if (c.foliation_form == "srf_fiber") form = srf - fib.omega_can;
    else form = fib.omega_can;
    const FoliationReport f = foliation_kernel(form, c.foliation_subspace);
    Report r;
    r.command = "foliation";
    const auto [kmin, kmax] = std::minmax_element(f.kernel_dim.begin(), f.kernel_dim.end());
    r.results["foliation"] = {
        {"form", c.foliation_form},
        {"subspace", c.foliation_subspace == KernelSubspace::full ? "full" : "relative"},
        {"rank_profile", f.rank_profile},
        {"constant_rank", f.constant_rank},
        {"threshold", json_number(f.threshold)},
        {"max_abs_det", json_number(f.max_abs_det)},
        {"min_trace", json_number(f.min_trace)},
        {"kernel_dim_min", *kmin},
        {"kernel_dim_max", *kmax},
        {"degeneracy_points", f.degeneracy_locus.size()},
        {"leaf_reconstruction", "not attempted"}};
    return r;
}

Report bmy_pipeline(const RunConfig& c, const std::filesystem::path& dir) {
    const Fibration fib = build_fibration(c.fibration);
    auto [state, rep] = run_flow(fib, c.flow);
    Report r;
    r.command = "bmy";
    add_flow_results(r, state, rep);
    maybe_snapshot(c, dir, state);
    const Region region =
        c.bmy_region == "whole" ? Region::whole()
                                : Region::collar(*fib.grid, c.bmy_l0, c.bmy_l1 < 0 ? fib.grid->nv() - 1 : c.bmy_l1);
    try {
        const BmyResult b = bmy_check(fib, state.omega, region, rep.converged, c.bmy_override);
        r.results["bmy"] = {{"lhs", json_number(b.lhs)},
                            {"c1_squared", json_number(b.c1_squared)},
                            {"c2", json_number(b.c2)},
                            {"prefactor", json_number(b.prefactor)},
                            {"n", b.n},
                            {"m", b.m},
                            {"holds", b.holds},
                            {"region", c.bmy_region},
                            {"convergence_override", c.bmy_override}};
        if (r.status == "max_steps") r.status = "ok";
    } catch (const DomainError& e) {
        r.results["error"] = e.what();
        r.status = "error";
    }
    return r;
}

// ---- config parsing ---------------------------------------------------------

struct PendingModulus {
    std::string kind = "constant";
    cplx tau0{0.0, 1.0};
    cplx c{1.0, 0.0};
};

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"flow",   "conical-flow", "wp",        "lelong",
                                                "models", "volume",       "foliation", "bmy"};
    return names;
}

RunConfig parse_config(const std::string& subcommand, const json& flat) {
    if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end())
        throw ConfigError("unknown subcommand '" + subcommand + "'");
    if (!flat.is_object()) throw ConfigError("config: expected a flat JSON object with dotted keys");
    RunConfig rc;
    rc.subcommand = subcommand;
    rc.effective = flat;
    FibrationSpec& fs = rc.fibration;
    FlowConfig& fc = rc.flow;
    PendingModulus pm;
    std::optional<DivisorSpec> divisor;
    std::optional<ConicalParams> conical;
    auto div = [&]() -> DivisorSpec& { return divisor ? *divisor : divisor.emplace(); };
    auto con = [&]() -> ConicalParams& { return conical ? *conical : conical.emplace(); };

    using Setter = std::function<void(const std::string&, const json&)>;
    const std::map<std::string, Setter> setters{
        {"grid.nx", [&](auto& k, auto& v) { fs.grid.nx = as_int(k, v); }},
        {"grid.ny", [&](auto& k, auto& v) { fs.grid.ny = as_int(k, v); }},
        {"grid.nu", [&](auto& k, auto& v) { fs.grid.nu = as_int(k, v); }},
        {"grid.nv", [&](auto& k, auto& v) { fs.grid.nv = as_int(k, v); }},
        {"grid.base",
         [&](auto& k, auto& v) {
             fs.grid.base = as_enum<BaseKind>(k, v, {{"strip", BaseKind::strip}, {"annulus", BaseKind::annulus}});
         }},
        {"grid.t0", [&](auto& k, auto& v) { fs.grid.t0 = as_double(k, v); }},
        {"grid.t1", [&](auto& k, auto& v) { fs.grid.t1 = as_double(k, v); }},
        {"grid.r0", [&](auto& k, auto& v) { fs.grid.r0 = as_double(k, v); }},
        {"grid.r1", [&](auto& k, auto& v) { fs.grid.r1 = as_double(k, v); }},
        {"grid.mode",
         [&](auto& k, auto& v) {
             fs.grid.mode =
                 as_enum<GridMode>(k, v, {{"symmetric", GridMode::symmetric}, {"full", GridMode::full}});
         }},
        {"modulus.kind", [&](auto& k, auto& v) { pm.kind = as_string(k, v); }},
        {"modulus.tau0", [&](auto& k, auto& v) { pm.tau0 = as_cplx(k, v); }},
        {"modulus.c", [&](auto& k, auto& v) { pm.c = as_cplx(k, v); }},
        {"reference.kind",
         [&](auto& k, auto& v) {
             fs.reference.kind =
                 as_enum<ReferenceKind>(k, v, {{"semiflat", ReferenceKind::semiflat}, {"flat", ReferenceKind::flat}});
         }},
        {"reference.scale", [&](auto& k, auto& v) { fs.reference.scale = as_double(k, v); }},
        {"reference.amplitude", [&](auto& k, auto& v) { fs.reference.amplitude = as_double(k, v); }},
        {"reference.modes",
         [&](auto& k, auto& v) {
             if (!v.is_array()) throw ConfigError("config " + k + ": expected an array of [mx, my, mu, mv]");
             fs.reference.modes.clear();
             for (const auto& m : v) {
                 if (!m.is_array() || m.size() != 4) throw ConfigError("config " + k + ": each mode is [mx, my, mu, mv]");
                 fs.reference.modes.push_back({as_int(k, m[0]), as_int(k, m[1]), as_int(k, m[2]), as_int(k, m[3])});
             }
         }},
        {"base_metric.kind",
         [&](auto& k, auto& v) {
             fs.base_metric.kind = as_enum<BaseMetricKind>(
                 k, v, {{"flat", BaseMetricKind::flat}, {"hyperbolic", BaseMetricKind::hyperbolic}});
         }},
        {"base_metric.scale", [&](auto& k, auto& v) { fs.base_metric.scale = as_double(k, v); }},
        {"divisor.s0", [&](auto& k, auto& v) { div().s0 = as_cplx(k, v); }},
        {"divisor.beta", [&](auto& k, auto& v) { div().beta = as_double(k, v); }},
        {"divisor.epsilon", [&](auto& k, auto& v) { div().epsilon = as_double(k, v); }},
        {"divisor.delta", [&](auto& k, auto& v) { div().delta = as_double(k, v); }},
        {"flow.dt", [&](auto& k, auto& v) { fc.dt = as_double(k, v); }},
        {"flow.max_steps", [&](auto& k, auto& v) { fc.max_steps = as_int(k, v); }},
        {"flow.scheme",
         [&](auto& k, auto& v) { fc.scheme = as_enum<Scheme>(k, v, {{"euler", Scheme::euler}, {"rk4", Scheme::rk4}}); }},
        {"flow.phi", [&](auto& k, auto& v) { fc.phi_coeff = as_double(k, v); }},
        {"flow.tolerance", [&](auto& k, auto& v) { fc.tolerance = as_double(k, v); }},
        {"flow.positivity_cadence", [&](auto& k, auto& v) { fc.positivity_cadence = as_int(k, v); }},
        {"flow.record_every", [&](auto& k, auto& v) { fc.record_every = as_int(k, v); }},
        {"flow.stability_c", [&](auto& k, auto& v) { fc.stability_c = as_double(k, v); }},
        {"flow.pin_boundary", [&](auto& k, auto& v) { fc.pin_boundary = as_bool(k, v); }},
        {"flow.sign", [&](auto& k, auto& v) { fc.sign = as_int(k, v); }},
        {"conical.beta", [&](auto& k, auto& v) { con().beta = as_double(k, v); }},
        {"conical.epsilon", [&](auto& k, auto& v) { con().epsilon = as_double(k, v); }},
        {"conical.delta", [&](auto& k, auto& v) { con().delta = as_double(k, v); }},
        {"conical.epsilons", [&](auto& k, auto& v) { rc.epsilons = as_doubles(k, v); }},
        {"lelong.source",
         [&](auto& k, auto& v) {
             rc.lelong.source = as_string(k, v);
             if (rc.lelong.source != "model" && rc.lelong.source != "flow")
                 throw ConfigError("config " + k + ": expected model or flow");
         }},
        {"lelong.lambda", [&](auto& k, auto& v) { rc.lelong.lambda = as_double(k, v); }},
        {"lelong.smooth", [&](auto& k, auto& v) { rc.lelong.smooth = as_double(k, v); }},
        {"lelong.center", [&](auto& k, auto& v) { rc.lelong.center = as_cplx(k, v); }},
        {"lelong.r_max", [&](auto& k, auto& v) { rc.lelong.r_max = as_double(k, v); }},
        {"lelong.octaves", [&](auto& k, auto& v) { rc.lelong.octaves = as_int(k, v); }},
        {"lelong.per_octave", [&](auto& k, auto& v) { rc.lelong.per_octave = as_int(k, v); }},
        {"lelong.n_theta", [&](auto& k, auto& v) { rc.lelong.n_theta = as_int(k, v); }},
        {"models.kind",
         [&](auto& k, auto& v) {
             rc.models.kind =
                 as_enum<ModelKind>(k, v, {{"poincare", ModelKind::poincare}, {"conical", ModelKind::conical}});
         }},
        {"models.n", [&](auto& k, auto& v) { rc.models.n = as_int(k, v); }},
        {"models.t", [&](auto& k, auto& v) { rc.models.t = as_cplx(k, v); }},
        {"models.radii", [&](auto& k, auto& v) { rc.models.radii = as_doubles(k, v); }},
        {"volume.weighted", [&](auto& k, auto& v) { rc.volume_weighted = as_bool(k, v); }},
        {"foliation.form",
         [&](auto& k, auto& v) {
             rc.foliation_form = as_string(k, v);
             if (rc.foliation_form != "srf" && rc.foliation_form != "srf_fiber" && rc.foliation_form != "base")
                 throw ConfigError("config " + k + ": expected srf, srf_fiber or base");
         }},
        {"foliation.subspace",
         [&](auto& k, auto& v) {
             rc.foliation_subspace = as_enum<KernelSubspace>(
                 k, v, {{"relative", KernelSubspace::relative}, {"full", KernelSubspace::full}});
         }},
        {"bmy.override", [&](auto& k, auto& v) { rc.bmy_override = as_bool(k, v); }},
        {"bmy.region",
         [&](auto& k, auto& v) {
             rc.bmy_region = as_string(k, v);
             if (rc.bmy_region != "whole" && rc.bmy_region != "collar")
                 throw ConfigError("config " + k + ": expected whole or collar");
         }},
        {"bmy.l0", [&](auto& k, auto& v) { rc.bmy_l0 = as_int(k, v); }},
        {"bmy.l1", [&](auto& k, auto& v) { rc.bmy_l1 = as_int(k, v); }},
        {"output.snapshots", [&](auto& k, auto& v) { rc.snapshots = as_bool(k, v); }},
    };

    for (const auto& [key, value] : flat.items()) {
        auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("config: unknown key '" + key + "'");
        it->second(key, value);
    }

    if (pm.kind == "constant") fs.modulus = ModulusFamily::constant(pm.tau0);
    else if (pm.kind == "affine") fs.modulus = ModulusFamily::affine(pm.tau0, pm.c);
    else if (pm.kind == "nome_log") fs.modulus = ModulusFamily::nome_log();
    else throw ConfigError("config modulus.kind: '" + pm.kind + "' is not one of constant, affine, nome_log");
    fs.divisor = divisor;
    fc.conical = conical;
    if (subcommand == "conical-flow" && !fs.divisor && !fc.conical)
        throw ConfigError("conical-flow: divisor data (divisor.* keys) is required");
    if (subcommand == "conical-flow" && !fs.divisor)
        throw ConfigError("conical-flow: divisor.s0 is required to place the cone");
    if (subcommand == "volume" && rc.volume_weighted && !fs.divisor)
        throw ConfigError("volume: the weighted probe needs divisor data (divisor.* keys)");
    for (double e : rc.epsilons)
        if (!(e > 0)) throw ConfigError("config conical.epsilons: every epsilon must be > 0");
    fs.validate();
    fc.validate();
    return rc;
}

Report run_pipeline(const RunConfig& c, const std::filesystem::path& dir) {
    const std::string& s = c.subcommand;
    if (s == "flow") return flow_pipeline(c, dir);
    if (s == "conical-flow") return conical_pipeline(c, dir);
    if (s == "wp") return wp_pipeline(c);
    if (s == "lelong") return lelong_pipeline(c);
    if (s == "models") return models_pipeline(c);
    if (s == "volume") return volume_pipeline(c);
    if (s == "foliation") return foliation_pipeline(c);
    if (s == "bmy") return bmy_pipeline(c, dir);
    throw ConfigError("unknown subcommand '" + s + "'");
}

json make_manifest(const RunConfig& cfg, bool deterministic, ReportFormat fmt) {
    json m = json::object();
    m["artifact"] = "fibreflow";
    m["version"] = FIBREFLOW_VERSION;
    m["command"] = cfg.subcommand;
    m["config"] = cfg.effective;
    m["config_hash"] = config_hash(cfg.effective);
    m["deterministic"] = deterministic;
    m["format"] = fmt == ReportFormat::csv ? "csv" : fmt == ReportFormat::json ? "json" : "both";
    m["conventions"] = {
        {"ddc", "dd^c = (i / 2 pi) d dbar, so dd^c log|z|^2 has Lelong number 1"},
        {"wp_ks", "g_WP = |tau'|^2 / (2 Im tau)^2 against unit-area fibers"},
        {"wp_sign", "hessian route calibration -1: Ric_{X/Y}(omega_SRF) = -omega_WP"},
        {"flow_normalization", "fiber block renormalized by e^t against the unit-area omega_SRF"},
        {"breakdown", "pointwise eigenvalue positivity of the numerical path of forms"},
        {"kahler_form", "omega = i (a dz^dzbar + b dz^dwbar + conj(b) dw^dzbar + d dw^dwbar)"}};
    return m;
}

namespace {

json read_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path + " is not valid JSON (" + e.what() + ")");
    }
}

void apply_grid_override(json& cfg, const std::string& spec) {
    std::vector<int> dims;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            dims.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("--grid: expected NX,NY,NU,NV integers (got '" + spec + "')");
        }
    }
    if (dims.size() != 4) throw ConfigError("--grid: expected NX,NY,NU,NV integers (got '" + spec + "')");
    cfg["grid.nx"] = dims[0];
    cfg["grid.ny"] = dims[1];
    cfg["grid.nu"] = dims[2];
    cfg["grid.nv"] = dims[3];
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical lab for semi-Ricci-flat metrics and relative Kahler-Ricci flow on model torus fibrations",
                 "fibreflow"};
    std::string config_path, out_dir = ".", format = "both", grid, mode;
    bool deterministic = false;
    app.add_option("--config", config_path, "flat dotted-key JSON config");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--deterministic", deterministic, "omit wall-clock fields so reports are byte-identical");
    app.add_option("--format", format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
    app.add_option("--grid", grid, "NX,NY,NU,NV override");
    app.add_option("--mode", mode, "symmetric or full")->check(CLI::IsMember({"symmetric", "full"}));
    const std::map<std::string, std::string> help{
        {"flow", "relative Kahler-Ricci flow to the stationary limit"},
        {"conical-flow", "regularized conical flow over a list of epsilons"},
        {"wp", "Weil-Petersson routes, distance verdict and Yoshikawa fit"},
        {"lelong", "Lelong number of a model or converged potential"},
        {"models", "fibrewise Poincare and conical model metrics"},
        {"volume", "fiber volume continuity probe and STT boundedness"},
        {"foliation", "kernel of the semi-Ricci-flat form"},
        {"bmy", "Chern-Weil evaluation of the BMY inequality"}};
    for (const auto& s : subcommands()) app.add_subcommand(s, help.at(s))->fallthrough();
    app.require_subcommand(1);

    if (!args.empty() && !args.front().empty() && args.front()[0] != '-' &&
        std::find(subcommands().begin(), subcommands().end(), args.front()) == subcommands().end()) {
        err << "fibreflow: unknown subcommand '" << args.front() << "'\n" << app.help();
        return 2;
    }
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "fibreflow: " << e.what() << "\n" << app.help();
        return 2;
    }
    const std::string sub = app.get_subcommands().front()->get_name();

    RunConfig rc;
    ReportFormat fmt = ReportFormat::both;
    try {
        json cfg = read_config_file(config_path);
        if (!cfg.is_object()) throw ConfigError("config: expected a flat JSON object with dotted keys");
        if (!grid.empty()) apply_grid_override(cfg, grid);
        if (!mode.empty()) cfg["grid.mode"] = mode;
        rc = parse_config(sub, cfg);
        fmt = parse_report_format(format);
    } catch (const ConfigError& e) {
        err << "fibreflow: " << e.what() << "\n";
        return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    Report report;
    int code = 0;
    try {
        report = run_pipeline(rc, out_dir);
    } catch (const ConfigError& e) {
        err << "fibreflow: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        report = Report{};
        report.command = sub;
        report.status = "error";
        report.results["error"] = e.what();
        err << "fibreflow: " << e.what() << "\n";
    }
    if (report.status == "error" || report.status == "breakdown") code = 1;
    if (!deterministic) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.results["timing"] = {{"wall_seconds", secs}};
    }
    try {
        for (const auto& p : emit_report(report, out_dir, fmt, make_manifest(rc, deterministic, fmt)))
            out << p.string() << "\n";
    } catch (const ConfigError& e) {
        err << "fibreflow: " << e.what() << "\n";
        return 2;
    }
    out << "status: " << report.status << "\n";
    return code;
}

}  // namespace fibreflow
