#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "evoflow/dynamics.hpp"
#include "evoflow/errors.hpp"
#include "evoflow/mixing.hpp"

using namespace evoflow;

namespace {

GenerationMap mutation_only_map(const GenomeSpace& space, double q) {
    return GenerationMap(space, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(space.size())),
                         {CrossoverKind::none}, MutationSpec{q});
}

GenerationMap selection_only_map(const GenomeSpace& space, const Eigen::VectorXd& phi) {
    return GenerationMap(space, phi, {CrossoverKind::none}, MutationSpec{0.0});
}

GenerationMap onemax_map(const GenomeSpace& space, double q) {
    return GenerationMap(space, fitness_vector(FitnessPipeline::onemax_plus_one(), space),
                         {CrossoverKind::uniform}, MutationSpec{q});
}

} // namespace

TEST_CASE("iterate records states and stops on convergence") {
    const GenomeSpace space(2, 2);
    const GenerationMap map = mutation_only_map(space, 0.2);
    const Eigen::VectorXd p0 = Eigen::VectorXd::Unit(4, 0);

    const Trajectory traj = iterate(map, p0, 2000, 1e-12);
    CHECK(traj.stop == StopReason::converged);
    CHECK(traj.steps() < 2000);
    CHECK(traj.states.front() == p0);
    // Mutation-only fixed point is uniform.
    CHECK((traj.states.back() - Eigen::VectorXd::Constant(4, 0.25)).lpNorm<Eigen::Infinity>() <
          1e-10);

    const Trajectory capped = iterate(map, p0, 3, 0.0);
    CHECK(capped.stop == StopReason::max_steps);
    CHECK(capped.states.size() == 4);
}

TEST_CASE("tangent chart embeds and restricts consistently") {
    Eigen::VectorXd p(3);
    p << 0.2, 0.3, 0.5;
    const Eigen::VectorXd y = to_tangent(p);
    REQUIRE(y.size() == 2);
    const Eigen::VectorXd back = embed_tangent(y);
    CHECK((back - p).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("finite-difference and analytic Jacobians agree") {
    const GenomeSpace space(2, 3);
    const GenerationMap map = onemax_map(space, 0.02);
    Eigen::VectorXd p = Eigen::VectorXd::Constant(8, 0.125);
    p(0) += 0.03;
    p(7) -= 0.03;

    const Eigen::MatrixXd fd = jacobian_at(map, p);
    const Eigen::MatrixXd an = jacobian_at_analytic(map, p);
    REQUIRE(fd.rows() == 7);
    REQUIRE(fd.cols() == 7);
    const double scale = std::max(1.0, an.lpNorm<Eigen::Infinity>());
    CHECK((fd - an).lpNorm<Eigen::Infinity>() / scale < 1e-5);
}

TEST_CASE("stability classification covers all four classes") {
    using cd = std::complex<double>;
    Eigen::VectorXcd stable(2);
    stable << cd(0.5, 0.1), cd(-0.3, 0.0);
    CHECK(classify_stability(stable) == Stability::stable);

    Eigen::VectorXcd unstable(2);
    unstable << cd(1.5, 0.0), cd(0.0, 1.2);
    CHECK(classify_stability(unstable) == Stability::unstable);

    Eigen::VectorXcd saddle(2);
    saddle << cd(0.5, 0.0), cd(1.5, 0.0);
    CHECK(classify_stability(saddle) == Stability::saddle);

    Eigen::VectorXcd marginal(2);
    marginal << cd(1.0, 0.0), cd(0.5, 0.0);
    CHECK(classify_stability(marginal) == Stability::non_hyperbolic);

    CHECK(stability_name(Stability::stable) == std::string("stable"));
}

TEST_CASE("mutation-only dynamics settle at the uniform fixed point") {
    const GenomeSpace space(2, 3);
    const GenerationMap map = mutation_only_map(space, 0.05);
    const auto starts = random_simplex_starts(space.size(), 3, 17);

    for (const auto& p0 : starts) {
        const FixedPointReport report = find_fixed_point(map, p0);
        CHECK(report.converged);
        CHECK(report.residual < 1e-10);
        CHECK((report.p_star - Eigen::VectorXd::Constant(8, 0.125)).lpNorm<Eigen::Infinity>() <
              1e-9);
        CHECK(report.classification == Stability::stable);
        REQUIRE(report.eigenvalues.size() == 7);
        // Tangent eigenvalues are (1-2q)^{#u} for nonzero u: here max 0.9.
        double max_mod = 0.0;
        for (Eigen::Index i = 0; i < 7; ++i)
            max_mod = std::max(max_mod, std::abs(report.eigenvalues(i)));
        CHECK(max_mod == doctest::Approx(0.9).epsilon(1e-7));
    }
}

TEST_CASE("selection-only dynamics reach the fittest vertex") {
    const GenomeSpace space(2, 2);
    Eigen::VectorXd phi(4);
    phi << 1.0, 2.0, 2.0, 4.0;
    const GenerationMap map = selection_only_map(space, phi);

    Eigen::VectorXd p0 = Eigen::VectorXd::Constant(4, 0.25);
    const Trajectory traj = iterate(map, p0, 400, 1e-14);
    CHECK((traj.states.back() - Eigen::VectorXd::Unit(4, 3)).lpNorm<Eigen::Infinity>() < 1e-8);

    // Vertex Jacobian moduli are the fitness ratios {1/4, 2/4, 2/4}.
    const FixedPointReport report = find_fixed_point(map, traj.states.back());
    CHECK(report.converged);
    std::vector<double> moduli;
    for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i)
        moduli.push_back(std::abs(report.eigenvalues(i)));
    std::sort(moduli.begin(), moduli.end());
    REQUIRE(moduli.size() == 3);
    CHECK(moduli[0] == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(moduli[1] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(moduli[2] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(report.classification == Stability::stable);
}

TEST_CASE("basin sampling separates two selection attractors") {
    const GenomeSpace space(2, 2);
    Eigen::VectorXd phi(4);
    phi << 4.0, 1.0, 1.0, 4.0;  // two equally fit vertices: 0 and 3
    const GenerationMap map = selection_only_map(space, phi);

    std::vector<Eigen::VectorXd> starts;
    Eigen::VectorXd near0(4), near3(4);
    near0 << 0.7, 0.1, 0.1, 0.1;
    near3 << 0.1, 0.1, 0.1, 0.7;
    starts.push_back(near0);
    starts.push_back(near3);

    const BasinResult basins = basin_sample(map, starts, 600);
    REQUIRE(basins.labels.size() == 2);
    CHECK(basins.labels[0] != basins.labels[1]);
    CHECK(basins.fixed_points.size() >= 2);
}

TEST_CASE("random simplex starts are deterministic simplex points") {
    const auto a = random_simplex_starts(5, 4, 99);
    const auto b = random_simplex_starts(5, 4, 99);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK((a[i] - b[i]).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK(a[i].sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(a[i].minCoeff() > 0.0);
    }
    const auto c = random_simplex_starts(5, 4, 100);
    CHECK((a[0] - c[0]).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("finite populations track the infinite model more closely as mu grows") {
    const GenomeSpace space(2, 2);
    const GenerationMap map = onemax_map(space, 0.01);
    const Eigen::VectorXd p0 = Eigen::VectorXd::Constant(4, 0.25);
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};

    const ModelVsSample small = model_vs_sample(map, p0, 100, 1, seeds);
    const ModelVsSample large = model_vs_sample(map, p0, 100000, 1, seeds);
    REQUIRE(small.median_linf.size() == 1);
    CHECK(small.median_linf[0] > large.median_linf[0]);
    CHECK(large.median_linf[0] < 0.01);
    CHECK(small.max_linf[0] >= small.median_linf[0]);
}
