#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "evoflow/errors.hpp"
#include "evoflow/flows.hpp"

using namespace evoflow;

namespace {

SmoothObjective double_well() {
    SmoothObjective obj;
    obj.dimension = 1;
    obj.f = [](const Eigen::VectorXd& x) {
        const double s = x(0) * x(0) - 1.0;
        return s * s;
    };
    obj.grad = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(1);
        g(0) = 4.0 * x(0) * (x(0) * x(0) - 1.0);
        return g;
    };
    return obj;
}

ConstraintMap circle() {
    ConstraintMap con;
    con.dimension = 2;
    con.count = 1;
    con.H = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd h(1);
        h(0) = x.squaredNorm() - 1.0;
        return h;
    };
    con.JH = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd { return 2.0 * x.transpose(); };
    return con;
}

ConstraintMap unit_sphere3() {
    ConstraintMap con;
    con.dimension = 3;
    con.count = 1;
    con.H = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd h(1);
        h(0) = x.squaredNorm() - 1.0;
        return h;
    };
    con.JH = [](const Eigen::VectorXd& x) -> Eigen::MatrixXd { return 2.0 * x.transpose(); };
    return con;
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (const double x : values) v(i++) = x;
    return v;
}

} // namespace

TEST_CASE("finite differences match hand-derived derivatives") {
    const auto f = [](const Eigen::VectorXd& x) {
        return x(0) * x(0) + 3.0 * x(0) * x(1) + 2.0 * x(1) * x(1);
    };
    const Eigen::VectorXd x = vec({1.0, -2.0});

    const Eigen::VectorXd g = fd_gradient(f, x);
    CHECK(g(0) == doctest::Approx(2.0 * 1.0 + 3.0 * -2.0).epsilon(1e-8));  // -4
    CHECK(g(1) == doctest::Approx(3.0 * 1.0 + 4.0 * -2.0).epsilon(1e-8));  // -5

    const Eigen::MatrixXd h = fd_hessian(f, x);
    CHECK(h(0, 0) == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(h(0, 1) == doctest::Approx(3.0).epsilon(1e-5));
    CHECK(h(1, 1) == doctest::Approx(4.0).epsilon(1e-5));

    const auto F = [](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        Eigen::VectorXd out(2);
        out << v(0) * v(1), std::sin(v(0));
        return out;
    };
    const Eigen::MatrixXd j = fd_jacobian(F, x);
    CHECK(j(0, 0) == doctest::Approx(-2.0).epsilon(1e-8));
    CHECK(j(0, 1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(j(1, 0) == doctest::Approx(std::cos(1.0)).epsilon(1e-8));
    CHECK(j(1, 1) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("objective gradient falls back to finite differences") {
    SmoothObjective obj;
    obj.dimension = 2;
    obj.f = [](const Eigen::VectorXd& x) { return x(0) * x(0) + 2.0 * x(1); };
    const Eigen::VectorXd g = obj.gradient(vec({3.0, 1.0}));
    CHECK(g(0) == doctest::Approx(6.0).epsilon(1e-8));
    CHECK(g(1) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("both integrators solve exponential decay accurately") {
    const OdeRhs rhs = [](double, const Eigen::VectorXd& x) -> Eigen::VectorXd { return -x; };
    const Eigen::VectorXd x0 = vec({1.0});

    for (const auto method : {IntegratorConfig::Method::rk4_fixed,
                              IntegratorConfig::Method::rk45_adaptive}) {
        IntegratorConfig cfg;
        cfg.method = method;
        cfg.h = 1e-2;
        cfg.max_time = 5.0;
        const OdeResult result = integrate_ode(rhs, x0, cfg);
        REQUIRE_FALSE(result.samples.empty());
        const auto& last = result.samples.back();
        CHECK(last.t == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(last.y(0) == doctest::Approx(std::exp(-5.0)).epsilon(1e-6));
    }
}

TEST_CASE("the adaptive integrator tracks a forced oscillation") {
    // x'(t) = cos t from 0: x(t) = sin t; exercises step-size control.
    const OdeRhs rhs = [](double t, const Eigen::VectorXd&) -> Eigen::VectorXd {
        Eigen::VectorXd out(1);
        out(0) = std::cos(t);
        return out;
    };
    IntegratorConfig cfg;
    cfg.max_time = 10.0;
    const OdeResult result = integrate_ode(rhs, vec({0.0}), cfg);
    CHECK(result.samples.back().y(0) == doctest::Approx(std::sin(10.0)).epsilon(1e-6));
}

TEST_CASE("integrator configs are validated") {
    IntegratorConfig bad;
    bad.h = 0.0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad.h = 1e-2;
    bad.max_time = -1.0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("divergent dynamics raise a numeric error") {
    const OdeRhs rhs = [](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return x.array().square().matrix();  // finite-time blow-up from x0 > 0
    };
    IntegratorConfig cfg;
    cfg.method = IntegratorConfig::Method::rk4_fixed;
    cfg.h = 0.5;
    cfg.max_time = 50.0;
    CHECK_THROWS_AS(integrate_ode(rhs, vec({1.0}), cfg), NumericError);
}

TEST_CASE("gradient flow finds the signed double-well minimum") {
    const SmoothObjective obj = double_well();
    // Tolerances a couple of decades below the 1e-8 gradient stop
    // threshold, so the stationarity event actually fires.
    IntegratorConfig cfg;
    cfg.max_time = 60.0;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-10;

    const GradientFlowResult plus = gradient_flow(obj, vec({0.3}), cfg);
    CHECK(plus.trajectory.converged);
    CHECK(std::abs(plus.trajectory.terminal()(0) - 1.0) < 1e-6);
    CHECK(plus.classification == CriticalKind::minimum);
    CHECK(plus.hessian_eigenvalues.minCoeff() > 0.0);
    // Nonincreasing within 10x the integrator tolerance (float wobble at
    // the flat bottom of the well is not a descent violation).
    CHECK(plus.max_objective_increase <= 10.0 * (cfg.abs_tol + cfg.rel_tol));

    const GradientFlowResult minus = gradient_flow(obj, vec({-0.3}), cfg);
    CHECK(std::abs(minus.trajectory.terminal()(0) + 1.0) < 1e-6);
}

TEST_CASE("gradient flow classifies a start at the hilltop") {
    // x = 0 is a strict local maximum of the double well; the gradient
    // vanishes there so the flow stops immediately and reports it.
    const GradientFlowResult result = gradient_flow(double_well(), vec({0.0}), {});
    CHECK(result.trajectory.converged);
    CHECK(result.classification == CriticalKind::maximum);
    CHECK(std::string(critical_kind_name(result.classification)) == "maximum");
}

TEST_CASE("quotient gradient flow lands on the constraint set from both sides") {
    const ConstraintMap con = circle();
    // The stop threshold (residual < 1e-8) only becomes reachable once the
    // integration error floor sits well below it, so ask for tolerances a
    // couple of decades tighter than the target.
    IntegratorConfig cfg;
    cfg.max_time = 60.0;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-10;

    for (const auto& x0 : {vec({2.0, 0.5}), vec({0.05, 0.08})}) {
        const QuotientFlowResult result = quotient_gradient_flow(con, x0, cfg);
        CHECK(result.trajectory.converged);
        CHECK(std::abs(result.trajectory.terminal().norm() - 1.0) < 1e-8);
        // Nonincreasing within 10x the integrator tolerance.
        CHECK(result.max_halfsq_increase <= 10.0 * (cfg.abs_tol + cfg.rel_tol));
    }
}

TEST_CASE("tangent projectors annihilate constraint normals") {
    const ConstraintMap con = circle();
    const Eigen::VectorXd x = vec({1.0, 0.0});
    const Eigen::MatrixXd p = tangent_projector(con, x);
    CHECK((p - p * p).lpNorm<Eigen::Infinity>() < 1e-12);       // idempotent
    CHECK((p - p.transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((p * con.jacobian(x).transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(p(1, 1) == doctest::Approx(1.0));  // tangent direction survives

    // Rank-deficient Jacobian (center of the circle): projector is I.
    const Eigen::MatrixXd center = tangent_projector(con, vec({0.0, 0.0}));
    CHECK((center - Eigen::MatrixXd::Identity(2, 2)).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("projected gradient flow stays feasible and finds the light axis") {
    SmoothObjective obj;
    obj.dimension = 3;
    const Eigen::VectorXd w = vec({1.0, 2.0, 3.0});
    obj.f = [w](const Eigen::VectorXd& x) { return 0.5 * x.dot(w.cwiseProduct(x)); };
    obj.grad = [w](const Eigen::VectorXd& x) -> Eigen::VectorXd { return w.cwiseProduct(x); };

    const ConstraintMap con = unit_sphere3();
    IntegratorConfig cfg;
    cfg.max_time = 120.0;

    Eigen::VectorXd x0 = vec({0.5, 0.6, 0.4});
    x0 /= x0.norm();
    const ProjectedFlowResult result = projected_gradient_flow(obj, con, x0, cfg);
    CHECK(result.trajectory.converged);
    CHECK(result.max_infeasibility < 1e-6);
    const Eigen::VectorXd terminal = result.trajectory.terminal();
    CHECK(std::abs(std::abs(terminal(0)) - 1.0) < 1e-6);
    CHECK(std::abs(terminal(1)) < 1e-6);
    CHECK(std::abs(terminal(2)) < 1e-6);

    // Infeasible starts are a usage error.
    CHECK_THROWS_AS(projected_gradient_flow(obj, con, vec({2.0, 0.0, 0.0}), cfg), UsageError);
}

TEST_CASE("exit search locates the double-well ridge") {
    IntegratorConfig cfg;
    cfg.h = 1e-2;
    cfg.max_time = 10.0;

    const ExitReport exit = exit_point_search(double_well(), nullptr, vec({1.0}), vec({-1.0}), cfg);
    REQUIRE(exit.found);
    CHECK(std::abs(exit.x_exit(0)) < 1e-3);
    CHECK(std::abs(exit.f_exit - 1.0) < 1e-3);
    CHECK(exit.t_exit == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("exit search reports when the objective keeps rising") {
    IntegratorConfig cfg;
    cfg.h = 1e-2;
    cfg.max_time = 5.0;
    const ExitReport exit = exit_point_search(double_well(), nullptr, vec({1.0}), vec({1.0}), cfg);
    CHECK_FALSE(exit.found);
    CHECK_FALSE(exit.note.empty());
}

TEST_CASE("constrained exit search finds the peak along the projected ray") {
    // On the circle, the projection of the ray (1, 0) + t(0, 1) is
    // (1, t)/sqrt(1 + t^2), where f = x0*x1 = t/(1 + t^2) peaks at t = 1,
    // the point (1, 1)/sqrt(2) with value 1/2.
    SmoothObjective product;
    product.dimension = 2;
    product.f = [](const Eigen::VectorXd& x) { return x(0) * x(1); };

    const ConstraintMap con = circle();
    IntegratorConfig cfg;
    cfg.h = 1e-2;
    cfg.max_time = 10.0;

    const ExitReport exit =
        exit_point_search(product, &con, vec({1.0, 0.0}), vec({0.0, 1.0}), cfg);
    REQUIRE(exit.found);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(exit.t_exit == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(exit.x_exit(0) - inv_sqrt2) < 1e-4);
    CHECK(std::abs(exit.x_exit(1) - inv_sqrt2) < 1e-4);
    CHECK(std::abs(exit.f_exit - 0.5) < 1e-6);
    CHECK(std::abs(exit.x_exit.norm() - 1.0) < 1e-6);  // stays on the constraint set
}

TEST_CASE("double-bracket flow diagonalizes while preserving the spectrum") {
    MatrixFlowProblem problem;
    problem.A = Eigen::MatrixXd{{0.0, 1.0}, {1.0, 0.0}};
    problem.N = Eigen::MatrixXd{{1.0, 0.0}, {0.0, 2.0}};
    problem.integrator.max_time = 40.0;

    const DoubleBracketResult result = double_bracket_flow(problem);
    CHECK(result.converged);
    CHECK(result.terminal_offdiag < 1e-6);
    CHECK(result.max_spectrum_drift < 1e-8);
    // Ascending N sorts the limit diagonal ascending: diag(-1, 1).
    CHECK(result.terminal()(0, 0) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(result.terminal()(1, 1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("matrix flow problems validate their inputs") {
    MatrixFlowProblem bad;
    bad.A = Eigen::MatrixXd{{0.0, 1.0}, {0.0, 0.0}};  // not symmetric
    bad.N = Eigen::MatrixXd{{1.0, 0.0}, {0.0, 2.0}};
    CHECK_THROWS_AS(bad.validate(), UsageError);

    bad.A = Eigen::MatrixXd{{0.0, 1.0}, {1.0, 0.0}};
    bad.N = Eigen::MatrixXd{{1.0, 0.5}, {0.0, 2.0}};  // not diagonal
    CHECK_THROWS_AS(bad.validate(), UsageError);

    bad.N = Eigen::MatrixXd{{2.0, 0.0}, {0.0, 2.0}};  // repeated diagonal
    CHECK_THROWS_AS(bad.validate(), UsageError);
}
