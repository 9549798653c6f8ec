#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace evoflow {

// ---------------------------------------------------------------------------
// Problem data.
// ---------------------------------------------------------------------------

struct SmoothObjective {
    Eigen::Index dimension = 0;
    std::function<double(const Eigen::VectorXd&)> f;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;  // empty -> finite differences

    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
};

struct ConstraintMap {
    Eigen::Index dimension = 0;  // n
    Eigen::Index count = 0;      // m components of H
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> H;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> JH;  // empty -> finite differences

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
};

/// Central finite differences used both as fallbacks and as test oracles.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h = 1e-6);
Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F,
                            const Eigen::VectorXd& x, double h = 1e-6);
Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x, double h = 1e-4);

// ---------------------------------------------------------------------------
// Integrators.
// ---------------------------------------------------------------------------

struct IntegratorConfig {
    enum class Method { rk4_fixed, rk45_adaptive };
    Method method = Method::rk45_adaptive;
    double h = 1e-2;        // fixed step (rk4) or initial step guess (rk45)
    double abs_tol = 1e-9;  // rk45 only
    double rel_tol = 1e-7;  // rk45 only
    double max_time = 100.0;
    std::size_t max_steps = 2000000;

    void validate() const;
};

using OdeRhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
using OdeStop = std::function<bool(double, const Eigen::VectorXd&)>;
using OdePostStep = std::function<void(double, Eigen::VectorXd&)>;

struct OdeSample {
    double t = 0.0;
    Eigen::VectorXd y;
};

struct OdeResult {
    std::vector<OdeSample> samples;  // every accepted step, including t=0
    bool stopped_by_event = false;
};

/// Integrates y' = rhs(t, y) from y0 until max_time, the step budget, or
/// the stop predicate (checked after each accepted step). post_step may
/// repair the accepted state in place (re-projection, re-symmetrization)
/// before it is recorded. Throws NumericError on non-finite states or
/// max-norm blow-up past 1e9.
OdeResult integrate_ode(const OdeRhs& rhs, Eigen::VectorXd y0, const IntegratorConfig& cfg,
                        const OdeStop& stop = {}, const OdePostStep& post_step = {});

// ---------------------------------------------------------------------------
// Flow results.
// ---------------------------------------------------------------------------

struct FlowTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    bool converged = false;  // the flow's stationarity test fired

    const Eigen::VectorXd& terminal() const { return states.back(); }
    double terminal_time() const { return times.back(); }
};

enum class CriticalKind { minimum, maximum, saddle, degenerate };
const char* critical_kind_name(CriticalKind k);

struct GradientFlowResult {
    FlowTrajectory trajectory;
    CriticalKind classification = CriticalKind::degenerate;
    Eigen::VectorXd hessian_eigenvalues;  // at the terminal point
    double max_objective_increase = 0.0;  // over consecutive accepted steps
};

/// x' = -grad f, stopping when ||grad f||_inf < 1e-8. The terminal point
/// is classified by the signs of the finite-difference Hessian spectrum.
GradientFlowResult gradient_flow(const SmoothObjective& obj, const Eigen::VectorXd& x0,
                                 const IntegratorConfig& cfg);

struct QuotientFlowResult {
    FlowTrajectory trajectory;
    double max_halfsq_increase = 0.0;  // max increase of (1/2)||H||^2 per accepted step
};

/// x' = -JH(x)^T H(x), stopping when ||JH^T H||_inf < 1e-8; drives x
/// toward the constraint set H = 0.
QuotientFlowResult quotient_gradient_flow(const ConstraintMap& con, const Eigen::VectorXd& x0,
                                          const IntegratorConfig& cfg);

/// Orthogonal projector onto the tangent space of {H = 0} at x:
/// P = I - JH^T (JH JH^T)^+ JH, pseudo-inverted with rank tolerance 1e-10
/// (a warning is printed when JH is rank-deficient). m = 0 gives the
/// identity.
Eigen::MatrixXd tangent_projector(const ConstraintMap& con, const Eigen::VectorXd& x);

struct ProjectedFlowResult {
    FlowTrajectory trajectory;
    double max_infeasibility = 0.0;  // max ||H||_inf over recorded states
};

/// x' = -P_H(x) grad f(x) from a feasible start (||H(x0)||_inf < 1e-8
/// required); after each accepted step one feasibility Newton step pulls
/// the state back when ||H||_inf exceeds 1e-9. Stops at constrained
/// stationarity ||P grad f||_inf < 1e-8.
ProjectedFlowResult projected_gradient_flow(const SmoothObjective& obj, const ConstraintMap& con,
                                            const Eigen::VectorXd& x0,
                                            const IntegratorConfig& cfg);

// ---------------------------------------------------------------------------
// Exit points.
// ---------------------------------------------------------------------------

struct ExitReport {
    bool found = false;
    Eigen::VectorXd x_exit;
    double f_exit = 0.0;
    double t_exit = 0.0;   // arc parameter along the marched ray
    std::string note;      // "none within horizon" when not found
};

/// Marches from x_s along direction (projected onto the tangent space and
/// re-retracted onto {H = 0} when a constraint is given) with step cfg.h
/// up to cfg.max_time, and returns the first point where f switches from
/// increasing to decreasing, refined to an interval below 1e-6.
ExitReport exit_point_search(const SmoothObjective& obj, const ConstraintMap* con,
                             const Eigen::VectorXd& x_s, const Eigen::VectorXd& direction,
                             const IntegratorConfig& cfg);

// ---------------------------------------------------------------------------
// Double-bracket matrix flow.
// ---------------------------------------------------------------------------

struct MatrixFlowProblem {
    Eigen::MatrixXd A;  // symmetric within 1e-12
    Eigen::MatrixXd N;  // diagonal, distinct entries
    IntegratorConfig integrator;

    void validate() const;
};

struct DoubleBracketResult {
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> states;  // symmetric at every sample
    bool converged = false;               // off-diagonal dropped below target
    double max_spectrum_drift = 0.0;      // vs eigenvalues of A, over all samples
    double terminal_offdiag = 0.0;        // max |off-diagonal| at the end

    const Eigen::MatrixXd& terminal() const { return states.back(); }
};

/// H' = [H, [H, N]] from H(0) = A: an isospectral flow on the symmetric
/// orbit of A that diagonalizes it, the diagonal ordered like N's. States
/// are re-symmetrized after every accepted step. Eigenvalues drift less
/// than 1e-8 from A's across the whole trajectory; to keep that promise
/// the flow clamps the integrator tolerances to at most abs 1e-12 /
/// rel 1e-11 (and the fixed step to at most 1e-3) — tighter requests are
/// honored as given.
DoubleBracketResult double_bracket_flow(const MatrixFlowProblem& problem);

} // namespace evoflow
