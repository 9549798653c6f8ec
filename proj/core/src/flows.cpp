#include "evoflow/flows.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include <Eigen/Dense>

#include "evoflow/errors.hpp"

namespace evoflow {

// ---------------------------------------------------------------------------
// Derivative fallbacks and oracles.
// ---------------------------------------------------------------------------

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + h;
        const double up = f(probe);
        probe(i) = x(i) - h;
        const double down = f(probe);
        probe(i) = x(i);
        g(i) = (up - down) / (2.0 * h);
    }
    return g;
}

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F,
                            const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd probe = x;
    probe(0) = x(0) + h;
    Eigen::VectorXd up = F(probe);
    probe(0) = x(0) - h;
    Eigen::VectorXd down = F(probe);
    probe(0) = x(0);
    Eigen::MatrixXd jac(up.size(), x.size());
    jac.col(0) = (up - down) / (2.0 * h);
    for (Eigen::Index i = 1; i < x.size(); ++i) {
        probe(i) = x(i) + h;
        up = F(probe);
        probe(i) = x(i) - h;
        down = F(probe);
        probe(i) = x(i);
        jac.col(i) = (up - down) / (2.0 * h);
    }
    return jac;
}

Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x, double h) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd hess(n, n);
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            probe(i) += h; probe(j) += h;
            const double pp = f(probe);
            probe(j) -= 2.0 * h;
            const double pm = f(probe);
            probe(i) -= 2.0 * h;
            const double mm = f(probe);
            probe(j) += 2.0 * h;
            const double mp = f(probe);
            probe(i) = x(i); probe(j) = x(j);
            hess(i, j) = hess(j, i) = (pp - pm - mp + mm) / (4.0 * h * h);
        }
    }
    return hess;
}

Eigen::VectorXd SmoothObjective::gradient(const Eigen::VectorXd& x) const {
    if (grad) return grad(x);
    return fd_gradient(f, x);
}

Eigen::MatrixXd ConstraintMap::jacobian(const Eigen::VectorXd& x) const {
    if (JH) return JH(x);
    return fd_jacobian(H, x);
}

// ---------------------------------------------------------------------------
// Integrators.
// ---------------------------------------------------------------------------

void IntegratorConfig::validate() const {
    if (!(h > 0.0)) throw UsageError("integrator step h must be positive");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw UsageError("integrator tolerances must be positive");
    if (!(max_time > 0.0)) throw UsageError("integrator max_time must be positive");
    if (max_steps == 0) throw UsageError("integrator max_steps must be positive");
}

namespace {

void guard_state(const Eigen::VectorXd& y, double t) {
    if (!y.allFinite())
        throw NumericError("flow state became non-finite at t = " + std::to_string(t));
    if (y.lpNorm<Eigen::Infinity>() > 1e9)
        throw NumericError("flow diverged (|state| > 1e9) at t = " + std::to_string(t));
}

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = B1 - 5179.0 / 57600, E3 = B3 - 7571.0 / 16695, E4 = B4 - 393.0 / 640,
                 E5 = B5 + 92097.0 / 339200, E6 = B6 - 187.0 / 2100, E7 = -1.0 / 40;
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;

} // namespace

OdeResult integrate_ode(const OdeRhs& rhs, Eigen::VectorXd y0, const IntegratorConfig& cfg,
                        const OdeStop& stop, const OdePostStep& post_step) {
    cfg.validate();
    guard_state(y0, 0.0);

    OdeResult result;
    double t = 0.0;
    Eigen::VectorXd y = std::move(y0);
    if (post_step) post_step(t, y);
    result.samples.push_back({t, y});
    if (stop && stop(t, y)) {
        result.stopped_by_event = true;
        return result;
    }

    auto accept = [&](double t_new, Eigen::VectorXd y_new) {
        guard_state(y_new, t_new);
        t = t_new;
        y = std::move(y_new);
        if (post_step) post_step(t, y);
        result.samples.push_back({t, y});
        if (stop && stop(t, y)) {
            result.stopped_by_event = true;
            return true;
        }
        return false;
    };

    if (cfg.method == IntegratorConfig::Method::rk4_fixed) {
        for (std::size_t step = 0; step < cfg.max_steps && t < cfg.max_time; ++step) {
            const double h = std::min(cfg.h, cfg.max_time - t);
            const Eigen::VectorXd k1 = rhs(t, y);
            const Eigen::VectorXd k2 = rhs(t + h / 2, y + (h / 2) * k1);
            const Eigen::VectorXd k3 = rhs(t + h / 2, y + (h / 2) * k2);
            const Eigen::VectorXd k4 = rhs(t + h, y + h * k3);
            if (accept(t + h, y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))) return result;
        }
        return result;
    }

    // rk45 adaptive with the standard per-component mixed error norm.
    double h = std::min(cfg.h, cfg.max_time);
    for (std::size_t attempt = 0; attempt < cfg.max_steps && t < cfg.max_time; ++attempt) {
        h = std::min(h, cfg.max_time - t);
        const Eigen::VectorXd k1 = rhs(t, y);
        const Eigen::VectorXd k2 = rhs(t + C2 * h, y + h * (A21 * k1));
        const Eigen::VectorXd k3 = rhs(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
        const Eigen::VectorXd k4 = rhs(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        const Eigen::VectorXd k5 =
            rhs(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        const Eigen::VectorXd k6 =
            rhs(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        const Eigen::VectorXd y5 = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        const Eigen::VectorXd k7 = rhs(t + h, y5);
        const Eigen::VectorXd err =
            h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);

        double err_norm = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double scale =
                cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
            err_norm = std::max(err_norm, std::abs(err(i)) / scale);
        }

        const double floor_h = 1e-14 * std::max(1.0, std::abs(t));
        if (err_norm <= 1.0 || h <= floor_h) {
            if (accept(t + h, y5)) return result;
        }
        const double factor =
            err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Gradient flow.
// ---------------------------------------------------------------------------

const char* critical_kind_name(CriticalKind k) {
    switch (k) {
    case CriticalKind::minimum: return "minimum";
    case CriticalKind::maximum: return "maximum";
    case CriticalKind::saddle: return "saddle";
    case CriticalKind::degenerate: return "degenerate";
    }
    return "unknown";
}

namespace {

FlowTrajectory to_flow_trajectory(OdeResult&& ode) {
    FlowTrajectory traj;
    traj.times.reserve(ode.samples.size());
    traj.states.reserve(ode.samples.size());
    for (auto& s : ode.samples) {
        traj.times.push_back(s.t);
        traj.states.push_back(std::move(s.y));
    }
    traj.converged = ode.stopped_by_event;
    return traj;
}

CriticalKind classify_critical(const Eigen::VectorXd& eigenvalues) {
    const double scale = std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
    const double tol = 1e-5 * scale;
    bool any_pos = false, any_neg = false;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (std::abs(eigenvalues(i)) <= tol) return CriticalKind::degenerate;
        (eigenvalues(i) > 0 ? any_pos : any_neg) = true;
    }
    if (any_pos && any_neg) return CriticalKind::saddle;
    return any_pos ? CriticalKind::minimum : CriticalKind::maximum;
}

} // namespace

GradientFlowResult gradient_flow(const SmoothObjective& obj, const Eigen::VectorXd& x0,
                                 const IntegratorConfig& cfg) {
    if (!obj.f) throw UsageError("objective has no function");
    if (x0.size() != obj.dimension)
        throw UsageError("start point dimension does not match the objective");

    const OdeRhs rhs = [&](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return -obj.gradient(x);
    };
    const OdeStop stop = [&](double, const Eigen::VectorXd& x) {
        return obj.gradient(x).lpNorm<Eigen::Infinity>() < 1e-8;
    };

    GradientFlowResult out;
    out.trajectory = to_flow_trajectory(integrate_ode(rhs, x0, cfg, stop));

    double prev = obj.f(out.trajectory.states.front());
    for (std::size_t i = 1; i < out.trajectory.states.size(); ++i) {
        const double cur = obj.f(out.trajectory.states[i]);
        out.max_objective_increase = std::max(out.max_objective_increase, cur - prev);
        prev = cur;
    }

    const Eigen::MatrixXd hess = fd_hessian(obj.f, out.trajectory.terminal());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    out.hessian_eigenvalues = es.eigenvalues();
    out.classification = classify_critical(out.hessian_eigenvalues);
    return out;
}

// ---------------------------------------------------------------------------
// Quotient gradient flow.
// ---------------------------------------------------------------------------

QuotientFlowResult quotient_gradient_flow(const ConstraintMap& con, const Eigen::VectorXd& x0,
                                          const IntegratorConfig& cfg) {
    if (!con.H) throw UsageError("constraint map has no H");
    if (x0.size() != con.dimension)
        throw UsageError("start point dimension does not match the constraint map");

    const auto residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return con.jacobian(x).transpose() * con.H(x);
    };
    const OdeRhs rhs = [&](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return -residual(x);
    };
    const OdeStop stop = [&](double, const Eigen::VectorXd& x) {
        return residual(x).lpNorm<Eigen::Infinity>() < 1e-8;
    };

    QuotientFlowResult out;
    out.trajectory = to_flow_trajectory(integrate_ode(rhs, x0, cfg, stop));

    double prev = 0.5 * con.H(out.trajectory.states.front()).squaredNorm();
    for (std::size_t i = 1; i < out.trajectory.states.size(); ++i) {
        const double cur = 0.5 * con.H(out.trajectory.states[i]).squaredNorm();
        out.max_halfsq_increase = std::max(out.max_halfsq_increase, cur - prev);
        prev = cur;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tangent projector and projected flow.
// ---------------------------------------------------------------------------

Eigen::MatrixXd tangent_projector(const ConstraintMap& con, const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    if (con.count == 0 || !con.H) return Eigen::MatrixXd::Identity(n, n);

    const Eigen::MatrixXd jh = con.jacobian(x);
    Eigen::MatrixXd gram = jh * jh.transpose();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
    cod.setThreshold(1e-10);
    if (cod.rank() < gram.rows())
        std::cerr << "warning: constraint Jacobian is rank-deficient (rank " << cod.rank()
                  << " of " << gram.rows() << "); using the pseudo-inverse\n";
    const Eigen::MatrixXd p =
        Eigen::MatrixXd::Identity(n, n) - jh.transpose() * cod.pseudoInverse() * jh;
    return 0.5 * (p + p.transpose());
}

namespace {

/// One Newton step toward {H = 0}: x <- x - JH^T (JH JH^T)^+ H(x).
void feasibility_newton_step(const ConstraintMap& con, Eigen::VectorXd& x) {
    const Eigen::VectorXd h = con.H(x);
    const Eigen::MatrixXd jh = con.jacobian(x);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jh * jh.transpose());
    cod.setThreshold(1e-10);
    x -= jh.transpose() * cod.pseudoInverse() * h;
}

} // namespace

ProjectedFlowResult projected_gradient_flow(const SmoothObjective& obj, const ConstraintMap& con,
                                            const Eigen::VectorXd& x0,
                                            const IntegratorConfig& cfg) {
    if (!obj.f) throw UsageError("objective has no function");
    if (!con.H) throw UsageError("constraint map has no H");
    if (x0.size() != obj.dimension || x0.size() != con.dimension)
        throw UsageError("start point dimension does not match the problem");
    if (con.H(x0).lpNorm<Eigen::Infinity>() >= 1e-8)
        throw UsageError("projected flow start is infeasible (||H(x0)|| >= 1e-8)");

    const auto projected_grad = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return tangent_projector(con, x) * obj.gradient(x);
    };
    const OdeRhs rhs = [&](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return -projected_grad(x);
    };
    const OdeStop stop = [&](double, const Eigen::VectorXd& x) {
        return projected_grad(x).lpNorm<Eigen::Infinity>() < 1e-8;
    };
    const OdePostStep post = [&](double, Eigen::VectorXd& x) {
        if (con.H(x).lpNorm<Eigen::Infinity>() > 1e-9) feasibility_newton_step(con, x);
    };

    ProjectedFlowResult out;
    out.trajectory = to_flow_trajectory(integrate_ode(rhs, x0, cfg, stop, post));
    for (const Eigen::VectorXd& x : out.trajectory.states)
        out.max_infeasibility =
            std::max(out.max_infeasibility, con.H(x).lpNorm<Eigen::Infinity>());
    return out;
}

// ---------------------------------------------------------------------------
// Exit points.
// ---------------------------------------------------------------------------

ExitReport exit_point_search(const SmoothObjective& obj, const ConstraintMap* con,
                             const Eigen::VectorXd& x_s, const Eigen::VectorXd& direction,
                             const IntegratorConfig& cfg) {
    if (!obj.f) throw UsageError("objective has no function");
    cfg.validate();

    Eigen::VectorXd dir = direction;
    if (con) dir = tangent_projector(*con, x_s) * dir;
    const double norm = dir.norm();
    if (norm < 1e-12)
        throw UsageError("search direction vanishes (or is normal to the constraint set)");
    dir /= norm;

    const auto path = [&](double t) -> Eigen::VectorXd {
        Eigen::VectorXd x = x_s + t * dir;
        if (con) {
            for (int k = 0; k < 50 && con->H(x).lpNorm<Eigen::Infinity>() > 1e-10; ++k)
                feasibility_newton_step(*con, x);
            if (con->H(x).lpNorm<Eigen::Infinity>() > 1e-6)
                throw NumericError("exit search left the feasible set and could not re-project "
                                   "at arc parameter " + std::to_string(t));
        }
        return x;
    };

    ExitReport report;
    const double h = cfg.h;
    double t_prev = 0.0;
    double f_prev = obj.f(path(0.0));
    bool increasing = false;
    double t_before_peak = 0.0;

    for (double t = h; t <= cfg.max_time + 1e-12; t += h) {
        const double f_cur = obj.f(path(t));
        if (increasing && f_cur < f_prev) {
            // Bracket [t_before_peak, t] contains the maximum; shrink it
            // until the exit location is pinned below 1e-6.
            double lo = t_before_peak, hi = t;
            constexpr double inv_phi = 0.6180339887498949;
            double m1 = hi - inv_phi * (hi - lo), m2 = lo + inv_phi * (hi - lo);
            double f1 = obj.f(path(m1)), f2 = obj.f(path(m2));
            while (hi - lo > 1e-6) {
                if (f1 < f2) {
                    lo = m1; m1 = m2; f1 = f2;
                    m2 = lo + inv_phi * (hi - lo);
                    f2 = obj.f(path(m2));
                } else {
                    hi = m2; m2 = m1; f2 = f1;
                    m1 = hi - inv_phi * (hi - lo);
                    f1 = obj.f(path(m1));
                }
            }
            report.found = true;
            report.t_exit = 0.5 * (lo + hi);
            report.x_exit = path(report.t_exit);
            report.f_exit = obj.f(report.x_exit);
            return report;
        }
        if (f_cur > f_prev) {
            increasing = true;
            t_before_peak = t_prev;  // last sample before the running peak
        }
        t_prev = t;
        f_prev = f_cur;
    }
    report.note = "none within horizon";
    return report;
}

// ---------------------------------------------------------------------------
// Double-bracket flow.
// ---------------------------------------------------------------------------

void MatrixFlowProblem::validate() const {
    if (A.rows() != A.cols() || A.rows() == 0) throw UsageError("A must be square");
    if ((A - A.transpose()).lpNorm<Eigen::Infinity>() > 1e-12)
        throw UsageError("A must be symmetric within 1e-12");
    if (N.rows() != A.rows() || N.cols() != A.cols())
        throw UsageError("N must match A's shape");
    for (Eigen::Index i = 0; i < N.rows(); ++i)
        for (Eigen::Index j = 0; j < N.cols(); ++j)
            if (i != j && N(i, j) != 0.0) throw UsageError("N must be diagonal");
    for (Eigen::Index i = 0; i < N.rows(); ++i)
        for (Eigen::Index j = i + 1; j < N.rows(); ++j)
            if (N(i, i) == N(j, j)) throw UsageError("N's diagonal entries must be distinct");
    integrator.validate();
}

DoubleBracketResult double_bracket_flow(const MatrixFlowProblem& problem) {
    problem.validate();
    const Eigen::Index k = problem.A.rows();

    const auto unflatten = [k](const Eigen::VectorXd& y) {
        return Eigen::Map<const Eigen::MatrixXd>(y.data(), k, k);
    };
    const auto max_offdiag = [](const Eigen::MatrixXd& m) {
        double v = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                if (i != j) v = std::max(v, std::abs(m(i, j)));
        return v;
    };

    const OdeRhs rhs = [&](double, const Eigen::VectorXd& y) -> Eigen::VectorXd {
        const Eigen::MatrixXd h = unflatten(y);
        const Eigen::MatrixXd c = h * problem.N - problem.N * h;  // [H, N]
        const Eigen::MatrixXd dh = h * c - c * h;                 // [H, C]
        return Eigen::Map<const Eigen::VectorXd>(dh.data(), k * k);
    };
    const OdeStop stop = [&](double, const Eigen::VectorXd& y) {
        return max_offdiag(unflatten(y)) < 5e-7;
    };
    const OdePostStep post = [&](double t, Eigen::VectorXd& y) {
        Eigen::MatrixXd h = unflatten(y);
        if ((h - h.transpose()).lpNorm<Eigen::Infinity>() > 1e-8)
            throw NumericError("double-bracket state lost symmetry at t = " + std::to_string(t));
        h = 0.5 * (h + h.transpose()).eval();
        y = Eigen::Map<const Eigen::VectorXd>(h.data(), k * k);
    };

    // The isospectrality contract (eigenvalue drift <= 1e-8 across the
    // whole trajectory) outruns the general-purpose default tolerances,
    // so the flow never integrates looser than this floor; requests
    // tighter than the floor are honored as given.
    IntegratorConfig cfg = problem.integrator;
    cfg.abs_tol = std::min(cfg.abs_tol, 1e-12);
    cfg.rel_tol = std::min(cfg.rel_tol, 1e-11);
    if (cfg.method == IntegratorConfig::Method::rk4_fixed) cfg.h = std::min(cfg.h, 1e-3);

    const Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(problem.A.data(), k * k);
    OdeResult ode = integrate_ode(rhs, y0, cfg, stop, post);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> base(problem.A);
    const Eigen::VectorXd reference = base.eigenvalues();  // ascending

    DoubleBracketResult out;
    out.converged = ode.stopped_by_event;
    out.times.reserve(ode.samples.size());
    out.states.reserve(ode.samples.size());
    for (const auto& s : ode.samples) {
        const Eigen::MatrixXd h = unflatten(s.y);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        out.max_spectrum_drift = std::max(
            out.max_spectrum_drift,
            (es.eigenvalues() - reference).lpNorm<Eigen::Infinity>());
        out.times.push_back(s.t);
        out.states.push_back(h);
    }
    out.terminal_offdiag = max_offdiag(out.states.back());
    return out;
}

} // namespace evoflow
