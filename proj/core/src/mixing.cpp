#include "evoflow/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>

#include "evoflow/errors.hpp"

namespace evoflow {

namespace {

// Digit-wise ring arithmetic on raw values, avoiding Genome allocation in
// inner loops.
std::uint64_t value_add(const GenomeSpace& s, std::uint64_t a, std::uint64_t b) {
    const auto d = static_cast<std::uint64_t>(s.d());
    std::uint64_t out = 0, pw = 1;
    for (int i = 0; i < s.l(); ++i) {
        out += ((a % d + b % d) % d) * pw;
        a /= d;
        b /= d;
        pw *= d;
    }
    return out;
}

std::uint64_t value_sub(const GenomeSpace& s, std::uint64_t a, std::uint64_t b) {
    const auto d = static_cast<std::uint64_t>(s.d());
    std::uint64_t out = 0, pw = 1;
    for (int i = 0; i < s.l(); ++i) {
        out += ((a % d + d - b % d) % d) * pw;
        a /= d;
        b /= d;
        pw *= d;
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Fitness.
// ---------------------------------------------------------------------------

double ScalingSpec::apply(double raw) const {
    switch (kind) {
    case Kind::identity: return raw;
    case Kind::power: return std::pow(raw, param);
    case Kind::exponential: return std::exp(param * raw);
    case Kind::linear_offset: return raw + param;
    }
    throw UsageError("unknown scaling kind");
}

FitnessPipeline FitnessPipeline::onemax_plus_one() {
    FitnessPipeline p;
    p.decoder = [](const Genome& g) {
        Eigen::VectorXd x(g.space().l());
        for (int i = 0; i < g.space().l(); ++i) x(i) = g.digit(i);
        return x;
    };
    p.objective = [](const Eigen::VectorXd& x) {
        double count = 0;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x(i) != 0.0) count += 1;
        return count + 1;
    };
    return p;
}

FitnessPipeline FitnessPipeline::from_table(std::vector<double> table) {
    FitnessPipeline p;
    p.decoder = [](const Genome& g) {
        Eigen::VectorXd x(1);
        x(0) = static_cast<double>(g.value());
        return x;
    };
    p.objective = [table = std::move(table)](const Eigen::VectorXd& x) {
        const auto idx = static_cast<std::uint64_t>(std::llround(x(0)));
        if (idx >= table.size())
            throw UsageError("fitness table has " + std::to_string(table.size()) +
                             " entries but genome value " + std::to_string(idx) + " was decoded");
        return table[idx];
    };
    return p;
}

Eigen::VectorXd fitness_vector(const FitnessPipeline& pipeline, const GenomeSpace& space) {
    if (!pipeline.decoder || !pipeline.objective)
        throw UsageError("fitness pipeline is missing a decoder or objective");
    const std::uint64_t n = space.size();
    Eigen::VectorXd phi(static_cast<Eigen::Index>(n));
    for (std::uint64_t v = 0; v < n; ++v) {
        const Genome g(space, v);
        const double value = pipeline.scaling.apply(pipeline.objective(pipeline.decoder(g)));
        if (!std::isfinite(value) || value <= 0.0)
            throw UsageError("scaled fitness of genome " + std::to_string(v) +
                             " is not finite and positive: " + std::to_string(value));
        phi(static_cast<Eigen::Index>(v)) = value;
    }
    return phi;
}

// ---------------------------------------------------------------------------
// Crossover mask distribution (reporting/oracle form).
// ---------------------------------------------------------------------------

std::vector<std::pair<std::uint64_t, double>> crossover_masks(const GenomeSpace& space,
                                                              const CrossoverSpec& spec) {
    const int l = space.l();
    const auto d = static_cast<std::uint64_t>(space.d());

    std::uint64_t ones = 0;
    {
        std::uint64_t pw = 1;
        for (int i = 0; i < l; ++i) { ones += pw; pw *= d; }
    }

    std::vector<std::pair<std::uint64_t, double>> masks;
    switch (spec.kind) {
    case CrossoverKind::uniform: {
        if (l > 20) throw ResourceError("uniform mask enumeration is limited to l <= 20");
        const std::uint64_t count = std::uint64_t{1} << l;
        const double weight = 1.0 / static_cast<double>(count);
        for (std::uint64_t bits = 0; bits < count; ++bits) {
            std::uint64_t value = 0, pw = 1;
            for (int i = 0; i < l; ++i) {
                if (bits >> i & 1) value += pw;
                pw *= d;
            }
            masks.emplace_back(value, weight);
        }
        break;
    }
    case CrossoverKind::one_point: {
        if (l == 1) {
            masks.emplace_back(ones, 1.0);
        } else {
            std::uint64_t prefix = 0, pw = 1;
            for (int c = 1; c < l; ++c) {
                prefix += pw;
                pw *= d;
                masks.emplace_back(prefix, 1.0 / static_cast<double>(l - 1));
            }
        }
        break;
    }
    case CrossoverKind::none:
        masks.emplace_back(ones, 1.0);
        break;
    }
    return masks;
}

// ---------------------------------------------------------------------------
// Mixing matrix and mix.
// ---------------------------------------------------------------------------

MixingMatrix mixing_matrix(const ChildKernelD& kernel) {
    const GenomeSpace& space = kernel.space();
    space.require_matrix_ok("mixing matrix");
    const auto n = static_cast<Eigen::Index>(space.size());

    MixingMatrix mm;
    mm.crossover = kernel.crossover();
    mm.mutation = MutationSpec{kernel.mutation_rate()};
    mm.order = kernel.order();
    mm.entries.resize(n, n);
    for (Eigen::Index u = 0; u < n; ++u) {
        for (Eigen::Index v = u; v < n; ++v) {
            const double value = kernel.a(static_cast<std::uint64_t>(u),
                                          static_cast<std::uint64_t>(v), 0);
            mm.entries(u, v) = value;
            mm.entries(v, u) = value;
        }
    }
    return mm;
}

Eigen::MatrixXd mutation_kernel_matrix(const GenomeSpace& space, double q) {
    space.require_matrix_ok("mutation kernel");
    const ChildKernelD copy_kernel(space, CrossoverSpec{CrossoverKind::none}, q);
    const auto n = static_cast<Eigen::Index>(space.size());
    Eigen::MatrixXd u(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index w = 0; w < n; ++w)
            u(a, w) = copy_kernel.b(static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(a),
                                    static_cast<std::uint64_t>(w));
    return u;
}

Eigen::VectorXd mix(const GenomeSpace& space, const MixingMatrix& mm, const Eigen::VectorXd& p) {
    const auto n = static_cast<Eigen::Index>(space.size());
    if (p.size() != n)
        throw UsageError("population vector has " + std::to_string(p.size()) +
                         " entries; the space has " + std::to_string(n) + " genomes");
    if (mm.entries.rows() != n || mm.entries.cols() != n)
        throw UsageError("mixing matrix shape does not match the space");

    Eigen::VectorXd result(n);
    Eigen::VectorXd shifted(n);
    for (Eigen::Index w = 0; w < n; ++w) {
        for (Eigen::Index x = 0; x < n; ++x)
            shifted(x) = p(static_cast<Eigen::Index>(
                value_add(space, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(w))));
        result(w) = shifted.dot(mm.entries * shifted);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Selection and simplex hygiene.
// ---------------------------------------------------------------------------

Eigen::VectorXd proportional_select(const Eigen::VectorXd& p, const Eigen::VectorXd& phi) {
    if (p.size() != phi.size())
        throw UsageError("population and fitness vectors have different lengths");
    const double mean = phi.dot(p);
    if (!std::isfinite(mean) || mean <= 0.0)
        throw NumericError("population mean fitness is not positive: " + std::to_string(mean));
    return p.cwiseProduct(phi) / mean;
}

void require_simplex(const Eigen::VectorXd& p, double tol) {
    if (p.size() == 0) throw UsageError("population vector is empty");
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (!(p(i) >= -tol))
            throw UsageError("population entry " + std::to_string(i) + " is negative: " +
                             std::to_string(p(i)));
    const double sum = p.sum();
    if (std::abs(sum - 1.0) > tol)
        throw UsageError("population entries sum to " + std::to_string(sum) + ", expected 1");
}

void clamp_simplex(Eigen::VectorXd& p) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) < 0.0) {
            if (p(i) <= -1e-12)
                std::cerr << "warning: clamping population entry " << i << " = " << p(i)
                          << " to zero\n";
            p(i) = 0.0;
        }
    }
}

// ---------------------------------------------------------------------------
// Deterministic sampling.
// ---------------------------------------------------------------------------

std::uint64_t RandomSource::categorical(const Eigen::VectorXd& weights) {
    const double total = weights.sum();
    if (!(total > 0.0)) throw NumericError("categorical weights sum to a non-positive value");
    double x = uniform01() * total;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        const double w = weights(i) > 0.0 ? weights(i) : 0.0;
        if (x < w) return static_cast<std::uint64_t>(i);
        x -= w;
    }
    // Rounding can exhaust x on the last positive weight.
    for (Eigen::Index i = weights.size(); i-- > 0;)
        if (weights(i) > 0.0) return static_cast<std::uint64_t>(i);
    throw NumericError("categorical weights are all zero");
}

std::vector<std::uint64_t> multinomial_sample(const Eigen::VectorXd& p, std::uint64_t mu,
                                              RandomSource& rng) {
    const auto n = static_cast<std::size_t>(p.size());
    std::vector<double> cumulative(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += p(static_cast<Eigen::Index>(i)) > 0.0 ? p(static_cast<Eigen::Index>(i)) : 0.0;
        cumulative[i] = acc;
    }
    if (!(acc > 0.0)) throw NumericError("sampling weights sum to a non-positive value");

    std::vector<std::uint64_t> counts(n, 0);
    for (std::uint64_t k = 0; k < mu; ++k) {
        const double x = rng.uniform01() * acc;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
        std::size_t idx = it == cumulative.end() ? n - 1
                                                 : static_cast<std::size_t>(it - cumulative.begin());
        ++counts[idx];
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Commutation with a permutation action.
// ---------------------------------------------------------------------------

CommutationCheck commutes_with_action(
    const PermutationGroup& group,
    const std::function<double(std::uint64_t, std::uint64_t, std::uint64_t)>& a, double tol) {
    const auto n = static_cast<std::uint64_t>(group.degree());
    CommutationCheck check;
    check.commutes = true;
    for (std::size_t e = 0; e < group.order(); ++e) {
        const Permutation& pi = group.elements()[e];
        if (pi.is_identity()) continue;
        for (std::uint64_t u = 0; u < n; ++u)
            for (std::uint64_t v = 0; v < n; ++v)
                for (std::uint64_t w = 0; w < n; ++w) {
                    const double lhs = a(pi(u), pi(v), pi(w));
                    const double rhs = a(u, v, w);
                    const double dev = std::abs(lhs - rhs);
                    if (dev > check.max_deviation) check.max_deviation = dev;
                    if (dev > tol && !check.counterexample) {
                        check.commutes = false;
                        check.counterexample = CommutationCounterexample{e, u, v, w, lhs, rhs};
                    }
                }
    }
    return check;
}

// ---------------------------------------------------------------------------
// Generation map.
// ---------------------------------------------------------------------------

GenerationMap::GenerationMap(const GenomeSpace& space, Eigen::VectorXd fitness, CrossoverSpec cx,
                             MutationSpec mu, OperatorOrder order)
    : space_(space),
      fitness_(std::move(fitness)),
      kernel_(space, cx, mu.q, order),
      mm_(mixing_matrix(kernel_)) {
    const auto n = static_cast<Eigen::Index>(space_.size());
    if (fitness_.size() != n)
        throw UsageError("fitness vector has " + std::to_string(fitness_.size()) +
                         " entries; the space has " + std::to_string(n) + " genomes");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!std::isfinite(fitness_(i)) || fitness_(i) <= 0.0)
            throw UsageError("fitness of genome " + std::to_string(i) +
                             " is not finite and positive");

    // The MM-based mix is valid exactly when the kernel commutes with
    // translations: a(u, v, w) == MM(u - w, v - w). Checked once per
    // configuration, exhaustively for small spaces and on a fixed-seed
    // triple sample otherwise.
    auto check_triple = [&](std::uint64_t u, std::uint64_t v, std::uint64_t w) {
        const double direct = kernel_.a(u, v, w);
        const double translated =
            mm_.entries(static_cast<Eigen::Index>(value_sub(space_, u, w)),
                        static_cast<Eigen::Index>(value_sub(space_, v, w)));
        if (std::abs(direct - translated) > 1e-12)
            throw NumericError("child kernel does not commute with translations at (u, v, w) = (" +
                               std::to_string(u) + ", " + std::to_string(v) + ", " +
                               std::to_string(w) + ")");
    };
    const auto un = static_cast<std::uint64_t>(n);
    if (un <= 64) {
        for (std::uint64_t u = 0; u < un; ++u)
            for (std::uint64_t v = 0; v < un; ++v)
                for (std::uint64_t w = 0; w < un; ++w) check_triple(u, v, w);
    } else {
        RandomSource rng(0x5eedu);
        for (int k = 0; k < 2048; ++k)
            check_triple(rng.raw() % un, rng.raw() % un, rng.raw() % un);
    }
}

Eigen::VectorXd GenerationMap::select(const Eigen::VectorXd& p) const {
    return proportional_select(p, fitness_);
}

Eigen::VectorXd GenerationMap::mix(const Eigen::VectorXd& p) const {
    return evoflow::mix(space_, mm_, p);
}

Eigen::VectorXd GenerationMap::step(const Eigen::VectorXd& p) const {
    return mix(select(p));
}

SampledGeneration sample_generation(const GenerationMap& map, const Eigen::VectorXd& p,
                                    std::uint64_t mu, RandomSource& rng) {
    if (mu == 0) throw UsageError("population size must be positive");
    const Eigen::VectorXd next = map.step(p);
    SampledGeneration out;
    out.counts = multinomial_sample(next, mu, rng);
    out.empirical.resize(next.size());
    for (Eigen::Index i = 0; i < next.size(); ++i)
        out.empirical(i) =
            static_cast<double>(out.counts[static_cast<std::size_t>(i)]) / static_cast<double>(mu);
    return out;
}

// ---------------------------------------------------------------------------
// Operator classification.
// ---------------------------------------------------------------------------

std::string OperatorClassification::summary() const {
    std::ostringstream os;
    os << "mutation: " << (mutation_per_digit ? "independent per digit" : "NOT per-digit") << '\n';
    if (crossover_multi_parent && crossover_witness) {
        os << "crossover: multi-parent (child law at w=" << crossover_witness->w
           << " changes when parent v=" << crossover_witness->v << " becomes "
           << crossover_witness->v_alt << " beside u=" << crossover_witness->u << ")\n";
    } else {
        os << "crossover: single-parent (child copies the first parent before mutation)\n";
    }
    os << "selection: " << (selection_subset ? "samples stay inside the parent population"
                                             : "sample ESCAPED the parent population");
    return os.str();
}

OperatorClassification classify_operator_properties(const GenomeSpace& space,
                                                    const CrossoverSpec& cx,
                                                    const MutationSpec& mu, RandomSource& rng) {
    OperatorClassification out;

    // Mutation factorizes across digits: the two-digit copy kernel must be
    // the product of independently built one-digit kernels.
    {
        const GenomeSpace s1(space.d(), 1, space.caps());
        const GenomeSpace s2(space.d(), 2, space.caps());
        const ChildKernelD k1(s1, CrossoverSpec{CrossoverKind::none}, mu.q);
        const ChildKernelD k2(s2, CrossoverSpec{CrossoverKind::none}, mu.q);
        const auto d = static_cast<std::uint64_t>(space.d());
        out.mutation_per_digit = true;
        for (std::uint64_t u = 0; u < d * d && out.mutation_per_digit; ++u)
            for (std::uint64_t w = 0; w < d * d; ++w) {
                const double joint = k2.b(u, u, w);
                const double split = k1.b(u % d, u % d, w % d) * k1.b(u / d, u / d, w / d);
                if (std::abs(joint - split) > 1e-14) {
                    out.mutation_per_digit = false;
                    break;
                }
            }
    }

    // Crossover multi-parent dependence: find parents u, v, v_alt whose
    // child law differs somewhere.
    {
        const std::uint64_t n = std::min<std::uint64_t>(space.size(), 64);
        const ChildKernelD k(space, cx, mu.q);
        for (std::uint64_t u = 0; u < n && !out.crossover_multi_parent; ++u)
            for (std::uint64_t v = 0; v < n && !out.crossover_multi_parent; ++v)
                for (std::uint64_t v2 = v + 1; v2 < n && !out.crossover_multi_parent; ++v2)
                    for (std::uint64_t w = 0; w < n; ++w)
                        if (std::abs(k.b(u, v, w) - k.b(u, v2, w)) > 1e-9) {
                            out.crossover_multi_parent = true;
                            out.crossover_witness = ParentDependenceWitness{u, v, v2, w};
                            break;
                        }
    }

    // Sampled proportional selection only ever returns members of the
    // parent population.
    {
        const auto n = static_cast<Eigen::Index>(space.size());
        Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
        std::vector<std::uint64_t> support{0};
        if (n > 1) support.push_back(static_cast<std::uint64_t>(n - 1));
        if (n > 2) support.push_back(static_cast<std::uint64_t>(n / 2));
        for (std::uint64_t s : support) p(static_cast<Eigen::Index>(s)) = 1.0;
        p /= p.sum();
        Eigen::VectorXd phi = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
        const Eigen::VectorXd selected = proportional_select(p, phi);
        out.selection_subset = true;
        for (int draw = 0; draw < 64; ++draw) {
            const std::uint64_t idx = rng.categorical(selected);
            if (std::find(support.begin(), support.end(), idx) == support.end()) {
                out.selection_subset = false;
                break;
            }
        }
    }

    return out;
}

} // namespace evoflow
