#include "evoflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "evoflow/errors.hpp"

namespace evoflow {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

/// G in tangent coordinates: y -> first n-1 coordinates of G(embed(y)).
Eigen::VectorXd tangent_step(const GenerationMap& map, const Eigen::VectorXd& y) {
    const Eigen::VectorXd next = map.step(embed_tangent(y));
    return next.head(y.size());
}

} // namespace

// ---------------------------------------------------------------------------
// Trajectories.
// ---------------------------------------------------------------------------

Trajectory iterate(const GenerationMap& map, const Eigen::VectorXd& p0, std::size_t max_steps,
                   double tol) {
    require_simplex(p0);
    Trajectory traj;
    traj.states.reserve(std::min<std::size_t>(max_steps + 1, 1 << 20));

    Eigen::VectorXd p = p0;
    clamp_simplex(p);
    traj.states.push_back(p);
    for (std::size_t t = 0; t < max_steps; ++t) {
        Eigen::VectorXd next = map.step(p);
        if (!all_finite(next))
            throw NumericError("trajectory became non-finite at step " + std::to_string(t + 1));
        clamp_simplex(next);
        const double delta = (next - p).lpNorm<Eigen::Infinity>();
        p = next;
        traj.states.push_back(p);
        if (delta < tol) {
            traj.stop = StopReason::converged;
            return traj;
        }
    }
    traj.stop = StopReason::max_steps;
    return traj;
}

// ---------------------------------------------------------------------------
// Tangent chart and Jacobians.
// ---------------------------------------------------------------------------

Eigen::VectorXd embed_tangent(const Eigen::VectorXd& y) {
    Eigen::VectorXd p(y.size() + 1);
    p.head(y.size()) = y;
    p(y.size()) = 1.0 - y.sum();
    return p;
}

Eigen::VectorXd to_tangent(const Eigen::VectorXd& p) { return p.head(p.size() - 1); }

Eigen::MatrixXd jacobian_at(const GenerationMap& map, const Eigen::VectorXd& p, double step) {
    const Eigen::Index m = p.size() - 1;
    const Eigen::VectorXd y0 = to_tangent(p);
    Eigen::MatrixXd jac(m, m);
    Eigen::VectorXd y = y0;
    for (Eigen::Index j = 0; j < m; ++j) {
        y(j) = y0(j) + step;
        const Eigen::VectorXd up = tangent_step(map, y);
        y(j) = y0(j) - step;
        const Eigen::VectorXd down = tangent_step(map, y);
        y(j) = y0(j);
        jac.col(j) = (up - down) / (2.0 * step);
    }
    return jac;
}

Eigen::MatrixXd jacobian_at_analytic(const GenerationMap& map, const Eigen::VectorXd& p) {
    const GenomeSpace& space = map.space();
    const auto n = static_cast<Eigen::Index>(space.size());
    const Eigen::VectorXd& phi = map.fitness();

    // dF at p: dF_ij = (delta_ij phi_i (phi.p) - phi_i p_i phi_j) / (phi.p)^2.
    const double mean = phi.dot(p);
    if (!(mean > 0.0)) throw NumericError("population mean fitness is not positive");
    Eigen::MatrixXd df(n, n);
    const Eigen::VectorXd fp = phi.cwiseProduct(p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            df(i, j) = ((i == j ? phi(i) * mean : 0.0) - fp(i) * phi(j)) / (mean * mean);

    // dM at x = F(p): dM_{w,j} = 2 sum_v MM(j - w, v) x(v + w), using the
    // symmetry of the mixing matrix.
    const Eigen::VectorXd x = map.select(p);
    const Eigen::MatrixXd& mm = map.mixing().entries;
    Eigen::MatrixXd dm(n, n);
    Eigen::VectorXd shifted(n);
    for (Eigen::Index w = 0; w < n; ++w) {
        for (Eigen::Index v = 0; v < n; ++v) {
            const Genome gv(space, static_cast<std::uint64_t>(v));
            const Genome gw(space, static_cast<std::uint64_t>(w));
            shifted(v) = x(static_cast<Eigen::Index>(ring_add(gv, gw).value()));
        }
        const Eigen::VectorXd row = mm * shifted;  // row(u') = sum_v MM(u',v) x(v+w)
        for (Eigen::Index j = 0; j < n; ++j) {
            const Genome gj(space, static_cast<std::uint64_t>(j));
            const Genome gw(space, static_cast<std::uint64_t>(w));
            dm(w, j) = 2.0 * row(static_cast<Eigen::Index>(ring_sub(gj, gw).value()));
        }
    }

    // Full-space chain rule, then restrict to the tangent chart: columns
    // combine as d/dy_j = d/dp_j - d/dp_{n-1}, rows keep the first n-1.
    const Eigen::MatrixXd dg = dm * df;
    Eigen::MatrixXd jac(n - 1, n - 1);
    for (Eigen::Index j = 0; j < n - 1; ++j)
        jac.col(j) = (dg.col(j) - dg.col(n - 1)).head(n - 1);
    return jac;
}

// ---------------------------------------------------------------------------
// Stability.
// ---------------------------------------------------------------------------

const char* stability_name(Stability s) {
    switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::saddle: return "saddle";
    case Stability::non_hyperbolic: return "non-hyperbolic";
    }
    return "unknown";
}

Stability classify_stability(const Eigen::VectorXcd& eigenvalues, double tol) {
    bool any_inside = false, any_outside = false;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        const double mod = std::abs(eigenvalues(i));
        if (std::abs(mod - 1.0) <= tol) return Stability::non_hyperbolic;
        (mod < 1.0 ? any_inside : any_outside) = true;
    }
    if (any_inside && any_outside) return Stability::saddle;
    if (any_outside) return Stability::unstable;
    return Stability::stable;
}

// ---------------------------------------------------------------------------
// Fixed points.
// ---------------------------------------------------------------------------

FixedPointReport find_fixed_point(const GenerationMap& map, const Eigen::VectorXd& p0,
                                  std::size_t max_iterations, double tol) {
    require_simplex(p0);
    const Eigen::Index n = p0.size();

    auto residual_of = [&](const Eigen::VectorXd& p) {
        return (map.step(p) - p).lpNorm<Eigen::Infinity>();
    };

    FixedPointReport report;
    Eigen::VectorXd p = p0;
    clamp_simplex(p);
    report.p_star = p;
    report.residual = residual_of(p);

    // Power iteration until the Newton basin is plausibly reached.
    std::size_t used = 0;
    const std::size_t newton_budget = 64;
    const std::size_t power_budget =
        max_iterations > newton_budget ? max_iterations - newton_budget : 0;
    while (used < power_budget) {
        Eigen::VectorXd next = map.step(p);
        if (!all_finite(next))
            throw NumericError("fixed-point iteration became non-finite at step " +
                               std::to_string(used + 1));
        clamp_simplex(next);
        const double delta = (next - p).lpNorm<Eigen::Infinity>();
        p = next;
        ++used;
        const double res = residual_of(p);
        if (res < report.residual) {
            report.residual = res;
            report.p_star = p;
        }
        if (delta < 1e-7 || res < 1e-7) break;
    }

    // Newton refinement of r(y) = G(embed(y)) - embed(y) in tangent
    // coordinates, damped so near-singular (non-hyperbolic) systems stay
    // bounded.
    Eigen::VectorXd y = to_tangent(report.p_star);
    for (std::size_t k = 0; k < newton_budget && report.residual > tol; ++k) {
        const Eigen::VectorXd p_cur = embed_tangent(y);
        const Eigen::VectorXd r = tangent_step(map, y) - y;
        Eigen::MatrixXd a = jacobian_at(map, p_cur) - Eigen::MatrixXd::Identity(n - 1, n - 1);
        const Eigen::MatrixXd ata =
            a.transpose() * a + 1e-10 * Eigen::MatrixXd::Identity(n - 1, n - 1);
        const Eigen::VectorXd delta = ata.ldlt().solve(a.transpose() * r);
        if (!delta.allFinite()) break;
        y -= delta;
        ++used;
        const Eigen::VectorXd candidate = embed_tangent(y);
        if (!all_finite(candidate)) break;
        const double res = residual_of(candidate);
        if (res < report.residual) {
            report.residual = res;
            report.p_star = candidate;
        }
        if (delta.lpNorm<Eigen::Infinity>() < 1e-15) break;
    }

    report.iterations = used;
    report.converged = report.residual < tol;

    const Eigen::MatrixXd jac = jacobian_at(map, report.p_star);
    report.eigenvalues = Eigen::EigenSolver<Eigen::MatrixXd>(jac, false).eigenvalues();
    report.classification = classify_stability(report.eigenvalues);
    return report;
}

// ---------------------------------------------------------------------------
// Basins.
// ---------------------------------------------------------------------------

BasinResult basin_sample(const GenerationMap& map, const std::vector<Eigen::VectorXd>& starts,
                         std::size_t T) {
    constexpr double attach_tol = 1e-6;
    constexpr std::size_t attach_run = 10;

    BasinResult result;
    result.labels.reserve(starts.size());

    auto registry_id = [&](const Eigen::VectorXd& p) -> int {
        for (std::size_t i = 0; i < result.fixed_points.size(); ++i)
            if ((result.fixed_points[i] - p).lpNorm<Eigen::Infinity>() < attach_tol)
                return static_cast<int>(i);
        return -1;
    };

    for (const Eigen::VectorXd& start : starts) {
        const Trajectory traj = iterate(map, start, T);
        const FixedPointReport fp = find_fixed_point(map, traj.states.back(), 2000);

        int label = -1;
        if (fp.converged) {
            int id = registry_id(fp.p_star);
            if (id < 0) {
                result.fixed_points.push_back(fp.p_star);
                id = static_cast<int>(result.fixed_points.size()) - 1;
            }
            // Attachment requires the trajectory tail to sit within the
            // attach tolerance for attach_run consecutive recorded states
            // (a converged-early trajectory holds its final state).
            const auto& states = traj.states;
            std::size_t run = traj.stop == StopReason::converged ? attach_run : 0;
            for (auto it = states.rbegin(); it != states.rend() && run < attach_run; ++it) {
                if ((*it - fp.p_star).lpNorm<Eigen::Infinity>() < attach_tol)
                    ++run;
                else
                    break;
            }
            if (run >= attach_run) label = id;
        }
        result.labels.push_back(label);
    }
    return result;
}

std::vector<Eigen::VectorXd> random_simplex_starts(Eigen::Index n, std::size_t count,
                                                   std::uint64_t seed) {
    RandomSource rng(seed);
    std::vector<Eigen::VectorXd> starts;
    starts.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Eigen::VectorXd p(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double u = rng.uniform01();
            while (u >= 1.0) u = rng.uniform01();
            p(i) = -std::log1p(-u);
        }
        p /= p.sum();
        starts.push_back(std::move(p));
    }
    return starts;
}

// ---------------------------------------------------------------------------
// Model vs sample.
// ---------------------------------------------------------------------------

ModelVsSample model_vs_sample(const GenerationMap& map, const Eigen::VectorXd& p0,
                              std::uint64_t mu, std::size_t T,
                              const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw UsageError("model_vs_sample needs at least one seed");
    require_simplex(p0);

    // distances[t][s]: max-norm gap at generation t+1 under seed s.
    std::vector<std::vector<double>> distances(T, std::vector<double>(seeds.size()));
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        RandomSource rng(seeds[s]);
        Eigen::VectorXd exact = p0, empirical = p0;
        for (std::size_t t = 0; t < T; ++t) {
            exact = map.step(exact);
            clamp_simplex(exact);
            const SampledGeneration gen = sample_generation(map, empirical, mu, rng);
            empirical = gen.empirical;
            distances[t][s] = (empirical - exact).lpNorm<Eigen::Infinity>();
        }
    }

    ModelVsSample out;
    out.median_linf.resize(T);
    out.max_linf.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<double> row = distances[t];
        std::sort(row.begin(), row.end());
        const std::size_t m = row.size();
        out.median_linf[t] = m % 2 == 1 ? row[m / 2] : 0.5 * (row[m / 2 - 1] + row[m / 2]);
        out.max_linf[t] = row.back();
    }
    return out;
}

} // namespace evoflow
