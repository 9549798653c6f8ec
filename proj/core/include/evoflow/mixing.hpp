#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "evoflow/genome_ring.hpp"
#include "evoflow/group_action.hpp"

namespace evoflow {

// ---------------------------------------------------------------------------
// Fitness pipeline: scaled objective of the decoded genome.
// ---------------------------------------------------------------------------

struct ScalingSpec {
    enum class Kind { identity, power, exponential, linear_offset };
    Kind kind = Kind::identity;
    double param = 0.0;  // alpha for power, beta for exponential, c for linear_offset

    double apply(double raw) const;
};

struct FitnessPipeline {
    std::function<Eigen::VectorXd(const Genome&)> decoder;
    std::function<double(const Eigen::VectorXd&)> objective;
    ScalingSpec scaling;

    /// Count of nonzero digits plus one, identity scaling.
    static FitnessPipeline onemax_plus_one();
    /// Raw fitness looked up from a table indexed by genome value.
    static FitnessPipeline from_table(std::vector<double> table);
};

/// Evaluates the pipeline on every genome; throws UsageError naming the
/// genome if any value is non-finite or not strictly positive.
Eigen::VectorXd fitness_vector(const FitnessPipeline& pipeline, const GenomeSpace& space);

// ---------------------------------------------------------------------------
// Operator specs.
// ---------------------------------------------------------------------------

struct MutationSpec {
    /// Per-digit replacement rate; the replacement digit is uniform over
    /// the d-1 other values.
    double q = 0.0;
};

enum class CrossoverKind { uniform, one_point, none };

struct CrossoverSpec {
    CrossoverKind kind = CrossoverKind::uniform;
};

/// Order the two mixing stages compose in. For independent-per-digit
/// mutation with binary-mask crossover the two orders induce the same
/// child distribution (each child digit is an independently mutated copy
/// of one parent digit either way); the flag is kept for configs that
/// want to state the order explicitly.
enum class OperatorOrder { crossover_first, mutation_first };

/// The crossover mask distribution chi for a spec on a given space:
/// (mask value, weight) pairs over binary masks.
std::vector<std::pair<std::uint64_t, double>> crossover_masks(const GenomeSpace& space,
                                                              const CrossoverSpec& spec);

// ---------------------------------------------------------------------------
// Child kernel b(u, v, w) and its symmetrization a(u, v, w).
// ---------------------------------------------------------------------------

/// Per-digit mutation transition probability a -> b.
template <typename S>
S digit_mutation_prob(const S& q, int d, int a, int b) {
    if (a == b) return S(1) - q;
    return q / S(d - 1);
}

/// Probability that parents (u, v) produce child w under mask crossover
/// followed by independent-digit mutation. Templated so the same
/// arithmetic runs in double or exact rational mode.
template <typename S>
class ChildKernel {
public:
    ChildKernel(const GenomeSpace& space, CrossoverSpec cx, S mutation_rate,
                OperatorOrder order = OperatorOrder::crossover_first);

    const GenomeSpace& space() const { return space_; }
    const CrossoverSpec& crossover() const { return cx_; }
    const S& mutation_rate() const { return q_; }
    OperatorOrder order() const { return order_; }

    S b(std::uint64_t u, std::uint64_t v, std::uint64_t w) const;
    S a(std::uint64_t u, std::uint64_t v, std::uint64_t w) const {
        return (b(u, v, w) + b(v, u, w)) / S(2);
    }

private:
    int digit(std::uint64_t x, int i) const {
        return digits_[static_cast<std::size_t>(x) * static_cast<std::size_t>(space_.l()) +
                       static_cast<std::size_t>(i)];
    }

    GenomeSpace space_;
    CrossoverSpec cx_;
    S q_;
    OperatorOrder order_;
    std::vector<std::pair<std::uint64_t, S>> masks_;  // empty when factorized path is used
    bool factorized_uniform_ = false;
    std::vector<int> digits_;  // n x l digit table, row-major
};

using ChildKernelD = ChildKernel<double>;

// ---------------------------------------------------------------------------
// Mixing matrix and the mixing transform.
// ---------------------------------------------------------------------------

struct MixingMatrix {
    Eigen::MatrixXd entries;  // n x n, entries(u, v) = a(u, v, 0)
    CrossoverSpec crossover;
    MutationSpec mutation;
    OperatorOrder order = OperatorOrder::crossover_first;
};

MixingMatrix mixing_matrix(const ChildKernelD& kernel);

/// Row-stochastic independent-digit mutation kernel: U(u, w) = product
/// over digits of the per-digit transition u_i -> w_i.
Eigen::MatrixXd mutation_kernel_matrix(const GenomeSpace& space, double q);

/// M(p)_w as the quadratic form of the population translated by w against
/// the mixing matrix; equals the direct triple sum over a(u, v, w).
Eigen::VectorXd mix(const GenomeSpace& space, const MixingMatrix& mm, const Eigen::VectorXd& p);

// ---------------------------------------------------------------------------
// Selection.
// ---------------------------------------------------------------------------

/// Fitness-proportional selection F(p)_i = phi_i p_i / (phi . p).
Eigen::VectorXd proportional_select(const Eigen::VectorXd& p, const Eigen::VectorXd& phi);

/// Throws UsageError unless p is on the simplex within tolerance.
void require_simplex(const Eigen::VectorXd& p, double tol = 1e-9);

/// Clamps tiny negative entries to zero; entries at or below -1e-12 are
/// clamped with a warning on stderr.
void clamp_simplex(Eigen::VectorXd& p);

// ---------------------------------------------------------------------------
// Deterministic randomness and finite-population sampling.
// ---------------------------------------------------------------------------

/// Deterministic 64-bit-seeded stream; the same seed yields the same
/// sample sequence on every platform.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Index drawn from the normalized weight vector.
    std::uint64_t categorical(const Eigen::VectorXd& weights);

private:
    std::mt19937_64 engine_;
};

/// mu independent categorical draws from p; returns per-genome counts.
std::vector<std::uint64_t> multinomial_sample(const Eigen::VectorXd& p, std::uint64_t mu,
                                              RandomSource& rng);

// ---------------------------------------------------------------------------
// Commutation with a permutation action.
// ---------------------------------------------------------------------------

struct CommutationCounterexample {
    std::size_t element_index = 0;  // label of the group element
    std::uint64_t u = 0, v = 0, w = 0;
    double lhs = 0.0, rhs = 0.0;
};

struct CommutationCheck {
    bool commutes = false;
    double max_deviation = 0.0;
    std::optional<CommutationCounterexample> counterexample;
};

/// Exhaustive check of a(pi(u), pi(v), pi(w)) == a(u, v, w) over the
/// group and all triples, within tol.
CommutationCheck commutes_with_action(
    const PermutationGroup& group,
    const std::function<double(std::uint64_t, std::uint64_t, std::uint64_t)>& a,
    double tol = 1e-12);

// ---------------------------------------------------------------------------
// The generation map G = M . F.
// ---------------------------------------------------------------------------

class GenerationMap {
public:
    GenerationMap(const GenomeSpace& space, Eigen::VectorXd fitness, CrossoverSpec cx,
                  MutationSpec mu, OperatorOrder order = OperatorOrder::crossover_first);

    const GenomeSpace& space() const { return space_; }
    const Eigen::VectorXd& fitness() const { return fitness_; }
    const MixingMatrix& mixing() const { return mm_; }
    const ChildKernelD& kernel() const { return kernel_; }

    Eigen::VectorXd select(const Eigen::VectorXd& p) const;
    Eigen::VectorXd mix(const Eigen::VectorXd& p) const;
    Eigen::VectorXd step(const Eigen::VectorXd& p) const;

private:
    GenomeSpace space_;
    Eigen::VectorXd fitness_;
    ChildKernelD kernel_;
    MixingMatrix mm_;
};

/// One finite-population generation: mu children drawn i.i.d. from
/// G(p). Returns the counts multiset and the empirical frequency vector.
struct SampledGeneration {
    std::vector<std::uint64_t> counts;
    Eigen::VectorXd empirical;
};

SampledGeneration sample_generation(const GenerationMap& map, const Eigen::VectorXd& p,
                                    std::uint64_t mu, RandomSource& rng);

// ---------------------------------------------------------------------------
// Operator classification report.
// ---------------------------------------------------------------------------

/// Triple showing the child law changes when one parent does:
/// b(u, v, .) != b(u, v_alt, .), differing at child w.
struct ParentDependenceWitness {
    std::uint64_t u = 0, v = 0, v_alt = 0, w = 0;
};

struct OperatorClassification {
    bool mutation_per_digit = false;       // kernel factorizes across digit positions
    bool crossover_multi_parent = false;   // child law depends on the second parent
    std::optional<ParentDependenceWitness> crossover_witness;
    bool selection_subset = false;         // sampled selection stays inside the parent set
    std::string summary() const;
};

OperatorClassification classify_operator_properties(const GenomeSpace& space,
                                                    const CrossoverSpec& cx,
                                                    const MutationSpec& mu, RandomSource& rng);

// ---------------------------------------------------------------------------
// ChildKernel definitions.
// ---------------------------------------------------------------------------

template <typename S>
ChildKernel<S>::ChildKernel(const GenomeSpace& space, CrossoverSpec cx, S mutation_rate,
                            OperatorOrder order)
    : space_(space), cx_(cx), q_(std::move(mutation_rate)), order_(order) {
    if (q_ < S(0) || q_ > S(1)) throw UsageError("mutation rate must lie in [0, 1]");
    const int l = space_.l();
    const int d = space_.d();
    const std::uint64_t n = space_.size();

    digits_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(l));
    for (std::uint64_t x = 0; x < n; ++x) {
        std::uint64_t rest = x;
        for (int i = 0; i < l; ++i) {
            digits_[static_cast<std::size_t>(x) * l + i] = static_cast<int>(rest % d);
            rest /= d;
        }
    }

    // All-ones mask value.
    std::uint64_t ones = 0;
    {
        std::uint64_t pw = 1;
        for (int i = 0; i < l; ++i) { ones += pw; pw *= static_cast<std::uint64_t>(d); }
    }

    switch (cx_.kind) {
    case CrossoverKind::uniform:
        // Equal weight on all 2^l binary masks factorizes per digit:
        // each child digit is u's or v's with probability 1/2, then
        // mutates. Evaluated in product form instead of a 2^l mask sum.
        factorized_uniform_ = true;
        break;
    case CrossoverKind::one_point:
        if (l == 1) {
            masks_.emplace_back(ones, S(1));  // no interior cut point: copy u
        } else {
            S weight = S(1) / S(l - 1);
            std::uint64_t prefix = 0, pw = 1;
            for (int c = 1; c < l; ++c) {
                prefix += pw;  // digits 0..c-1 set to one
                pw *= static_cast<std::uint64_t>(d);
                masks_.emplace_back(prefix, weight);
            }
        }
        break;
    case CrossoverKind::none:
        masks_.emplace_back(ones, S(1));
        break;
    }
}

template <typename S>
S ChildKernel<S>::b(std::uint64_t u, std::uint64_t v, std::uint64_t w) const {
    const int l = space_.l();
    const int d = space_.d();
    if (factorized_uniform_) {
        S prob(1);
        for (int i = 0; i < l; ++i) {
            const int wi = digit(w, i);
            S from_u = digit_mutation_prob(q_, d, digit(u, i), wi);
            S from_v = digit_mutation_prob(q_, d, digit(v, i), wi);
            prob *= (from_u + from_v) / S(2);
        }
        return prob;
    }
    S total(0);
    for (const auto& [mask, weight] : masks_) {
        S prob = weight;
        for (int i = 0; i < l; ++i) {
            const int ci = digit(mask, i) != 0 ? digit(u, i) : digit(v, i);
            prob *= digit_mutation_prob(q_, d, ci, digit(w, i));
        }
        total += prob;
    }
    return total;
}

} // namespace evoflow
