#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "evoflow/mixing.hpp"

namespace evoflow {

// ---------------------------------------------------------------------------
// Trajectories of the generation map.
// ---------------------------------------------------------------------------

enum class StopReason { max_steps, converged };

struct Trajectory {
    std::vector<Eigen::VectorXd> states;  // states[0] = p0, states[t+1] = G(states[t])
    StopReason stop = StopReason::max_steps;
    std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
};

/// Applies G up to max_steps times, stopping early once consecutive states
/// agree within tol in the max norm. Tiny negative entries are clamped
/// after every step. Throws NumericError naming the step on non-finite
/// intermediates.
Trajectory iterate(const GenerationMap& map, const Eigen::VectorXd& p0, std::size_t max_steps,
                   double tol = 1e-10);

// ---------------------------------------------------------------------------
// Jacobians in simplex-tangent coordinates.
// ---------------------------------------------------------------------------

/// The tangent chart drops the last coordinate: y in R^{n-1} embeds as
/// p = (y, 1 - sum y). The embedding is left unclamped so the chart map
/// stays differentiable for finite differencing.
Eigen::VectorXd embed_tangent(const Eigen::VectorXd& y);
Eigen::VectorXd to_tangent(const Eigen::VectorXd& p);

/// (n-1)x(n-1) Jacobian of G in tangent coordinates by central finite
/// differences with the given step.
Eigen::MatrixXd jacobian_at(const GenerationMap& map, const Eigen::VectorXd& p,
                            double step = 1e-6);

/// Same Jacobian assembled analytically as dM(F(p)) . dF(p), restricted to
/// the tangent chart. Agrees with jacobian_at within 1e-5 relative.
Eigen::MatrixXd jacobian_at_analytic(const GenerationMap& map, const Eigen::VectorXd& p);

// ---------------------------------------------------------------------------
// Fixed points and stability.
// ---------------------------------------------------------------------------

enum class Stability { stable, unstable, saddle, non_hyperbolic };

const char* stability_name(Stability s);

/// stable: all |lambda| < 1-tol. unstable: all > 1+tol. saddle: mixed.
/// non_hyperbolic: any modulus within tol of 1.
Stability classify_stability(const Eigen::VectorXcd& eigenvalues, double tol = 1e-6);

struct FixedPointReport {
    Eigen::VectorXd p_star;
    double residual = 0.0;            // ||G(p*) - p*||_inf
    Eigen::VectorXcd eigenvalues;     // n-1 tangent eigenvalues
    Stability classification = Stability::non_hyperbolic;
    bool converged = false;           // residual < tol reached
    std::size_t iterations = 0;       // power iterations + Newton steps
};

/// Iterates to near-convergence, then Newton-refines G(p) - p in tangent
/// coordinates (Tikhonov damping 1e-10 guards near-singular systems).
/// Reports the best candidate even when the residual target is missed.
FixedPointReport find_fixed_point(const GenerationMap& map, const Eigen::VectorXd& p0,
                                  std::size_t max_iterations = 20000, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Basins of attraction.
// ---------------------------------------------------------------------------

struct BasinResult {
    std::vector<Eigen::VectorXd> fixed_points;  // registry, in discovery order
    std::vector<int> labels;                    // per start; -1 = not attached
};

/// Runs each start for up to T steps and labels it by the registry fixed
/// point its tail stays within 1e-6 of for 10 consecutive steps.
BasinResult basin_sample(const GenerationMap& map, const std::vector<Eigen::VectorXd>& starts,
                         std::size_t T);

/// count points drawn uniformly from the (n-1)-simplex (normalized
/// exponentials), deterministic in the seed.
std::vector<Eigen::VectorXd> random_simplex_starts(Eigen::Index n, std::size_t count,
                                                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// Infinite model vs finite-population sampling.
// ---------------------------------------------------------------------------

struct ModelVsSample {
    std::vector<double> median_linf;  // per generation 1..T, median over seeds
    std::vector<double> max_linf;     // per generation 1..T, max over seeds
};

/// For each seed, evolves a finite population of size mu (each generation
/// resampled from G of the current empirical state) alongside the exact
/// iteration from the same start, and reports per-generation max-norm
/// distances between the two.
ModelVsSample model_vs_sample(const GenerationMap& map, const Eigen::VectorXd& p0,
                              std::uint64_t mu, std::size_t T,
                              const std::vector<std::uint64_t>& seeds);

} // namespace evoflow
