#pragma once
// Relative Kahler-Ricci flow as a parabolic Monge-Ampere time stepper.

#include <limits>
#include <optional>
#include <vector>

#include "fibreflow/cy_fiberwise.hpp"
#include "fibreflow/fibration.hpp"

namespace fibreflow {

enum class Scheme { euler, rk4 };

struct ConicalParams {
    double beta = 1.0;
    double epsilon = 0.1;
    double delta = 0.0;
};

struct FlowConfig {
    double dt = 0.01;
    int max_steps = 1000;
    Scheme scheme = Scheme::rk4;
    double phi_coeff = 1.0;          // Phi
    double tolerance = 1e-8;         // on sup |d phi / dt|
    int positivity_cadence = 1;
    int record_every = 1;
    double stability_c = 0.2;
    bool pin_boundary = false;
    int sign = -1;                   // +1 (Fano schedule) is out of scope
    std::optional<ConicalParams> conical;

    void validate() const;  // throws ConfigError
};

struct DiagnosticRow {
    double t, sup_phi, inf_phi, residual, min_eig;
};

struct FlowState {
    double t = 0.0;
    ScalarField phi;
    HermitianFormField omega;  // reference_metric_at(t) + i ddbar phi
    std::vector<DiagnosticRow> history;
};

/// Static data shared by every step of a run.
struct FlowContext {
    const Fibration* fib = nullptr;
    HermitianFormField omega_srf;
    HermitianFormField chi;            // ricci_of_density(STT density)
    std::vector<double> target;        // unit-area fiber density of omega_SRF
    std::vector<double> cone_factor;   // (|S|^2 + eps^2)^(1 - beta), empty if smooth
    std::vector<double> cone_shift;    // delta (|S|^2 + eps^2)^beta
};

FlowContext make_flow_context(const Fibration& fib, const FlowConfig& cfg);

HermitianFormField reference_metric_at(double t, const HermitianFormField& omega0, const HermitianFormField& chi);

/// d phi / dt at (t, phi).
std::vector<double> flow_rhs(const FlowContext& ctx, const FlowConfig& cfg, double t, const ScalarField& phi);

/// One step; throws BreakdownError on positivity loss, NumericError on
/// non-finite values or a violated stability guard.
FlowState flow_step(const FlowState& state, const FlowContext& ctx, const FlowConfig& cfg);

struct FlowReport {
    bool converged = false;
    int steps = 0;
    double t_final = 0.0;
    double stationary_residual = 0.0;
    double ke_residual = 0.0;
    std::optional<double> breakdown_time;
    std::string stop_reason;
    std::vector<double> sup_phi_per_epsilon;  // conical runs
};

FlowState initial_state(const FlowContext& ctx, const ScalarField* phi0);

std::pair<FlowState, FlowReport> run_flow(const Fibration& fib, const FlowConfig& cfg,
                                          const ScalarField* phi0 = nullptr);

/// Runs the regularized conical flow once per epsilon (the last run is
/// returned) and records sup_t sup_x phi_eps for each.
std::pair<FlowState, FlowReport> conical_flow_run(const Fibration& fib, const FlowConfig& cfg,
                                                  const std::vector<double>& epsilons);

enum class KeMode { relative, song_tian };

/// Relative mode: sup of the horizontal block of Ric_{X/Y}(omega) + Phi omega,
/// with the fiber entry of omega renormalized by e^t. Song-Tian mode: sup of
/// Ric(omega_B) + omega_B - omega_WP on the base block.
double ke_residual(const HermitianFormField& omega, const Fibration& fib, double phi_coeff, KeMode mode,
                   double t = 0.0);

/// First t at which e^-t omega0 + (1 - e^-t) chi stops being positive
/// definite (bisection to 1e-7); +infinity if it never does.
double breakdown_time(const HermitianFormField& omega0, const HermitianFormField& chi);

}  // namespace fibreflow
