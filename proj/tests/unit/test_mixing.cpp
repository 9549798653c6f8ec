#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "evoflow/errors.hpp"
#include "evoflow/group_action.hpp"
#include "evoflow/mixing.hpp"
#include "support/oracles.hpp"

using namespace evoflow;

namespace {

PermutationGroup full_translation_group(const GenomeSpace& space) {
    std::vector<Permutation> gens;
    for (std::uint64_t v = 0; v < space.size(); ++v)
        gens.push_back(translation_permutation(space, Genome(space, v)));
    return close_group(gens, space.size());
}

} // namespace

TEST_CASE("scaling specs transform raw fitness") {
    ScalingSpec identity;
    CHECK(identity.apply(3.5) == 3.5);
    ScalingSpec power{ScalingSpec::Kind::power, 2.0};
    CHECK(power.apply(3.0) == doctest::Approx(9.0));
    ScalingSpec expo{ScalingSpec::Kind::exponential, 0.5};
    CHECK(expo.apply(2.0) == doctest::Approx(std::exp(1.0)));
    ScalingSpec offset{ScalingSpec::Kind::linear_offset, 1.5};
    CHECK(offset.apply(2.0) == doctest::Approx(3.5));
}

TEST_CASE("fitness pipelines produce positive vectors") {
    const GenomeSpace space(2, 3);
    const Eigen::VectorXd onemax = fitness_vector(FitnessPipeline::onemax_plus_one(), space);
    REQUIRE(onemax.size() == 8);
    CHECK(onemax(0) == 1.0);   // 000
    CHECK(onemax(7) == 4.0);   // 111
    CHECK(onemax(5) == 3.0);   // 101

    const Eigen::VectorXd table =
        fitness_vector(FitnessPipeline::from_table({1, 2, 3, 4}), GenomeSpace(2, 2));
    CHECK(table(2) == 3.0);

    // Nonpositive fitness is rejected, naming the genome.
    CHECK_THROWS_AS(fitness_vector(FitnessPipeline::from_table({1, 0, 3, 4}), GenomeSpace(2, 2)),
                    UsageError);
}

TEST_CASE("crossover mask distributions") {
    const GenomeSpace space(2, 3);
    const auto uniform = crossover_masks(space, {CrossoverKind::uniform});
    CHECK(uniform.size() == 8);
    for (const auto& [mask, weight] : uniform) CHECK(weight == doctest::Approx(0.125));

    const auto one_point = crossover_masks(space, {CrossoverKind::one_point});
    REQUIRE(one_point.size() == 2);  // cuts after position 0 and 1
    CHECK(one_point[0].first == 1);  // 001
    CHECK(one_point[1].first == 3);  // 011
    CHECK(one_point[0].second == doctest::Approx(0.5));

    const auto none = crossover_masks(space, {CrossoverKind::none});
    REQUIRE(none.size() == 1);
    CHECK(none[0].first == 7);  // all-ones: child copies the first parent
    CHECK(none[0].second == doctest::Approx(1.0));

    // Single-digit spaces collapse one-point to the copy mask.
    const auto tiny = crossover_masks(GenomeSpace(2, 1), {CrossoverKind::one_point});
    REQUIRE(tiny.size() == 1);
    CHECK(tiny[0].first == 1);
}

TEST_CASE("child kernel matches the mask-enumeration oracle") {
    for (const auto [d, l, q] : {std::tuple{2, 3, 0.01}, {3, 2, 0.1}, {2, 2, 0.25}}) {
        const GenomeSpace space(d, l);
        const ChildKernelD uniform(space, {CrossoverKind::uniform}, q);
        const auto uniform_masks = oracle::uniform_masks(l);
        const ChildKernelD one_point(space, {CrossoverKind::one_point}, q);
        const auto one_point_masks = oracle::one_point_masks(l);
        for (std::uint64_t u = 0; u < space.size(); ++u)
            for (std::uint64_t v = 0; v < space.size(); ++v) {
                double row_sum = 0.0;
                for (std::uint64_t w = 0; w < space.size(); ++w) {
                    CHECK(uniform.b(u, v, w) ==
                          doctest::Approx(oracle::child_kernel(u, v, w, d, l, q, uniform_masks))
                              .epsilon(1e-13));
                    CHECK(one_point.b(u, v, w) ==
                          doctest::Approx(oracle::child_kernel(u, v, w, d, l, q, one_point_masks))
                              .epsilon(1e-13));
                    row_sum += uniform.b(u, v, w);
                }
                CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-12));  // a distribution per pair
            }
    }
}

TEST_CASE("the symmetrized kernel is symmetric in its parents") {
    const GenomeSpace space(3, 2);
    const ChildKernelD kernel(space, {CrossoverKind::one_point}, 0.07);
    for (std::uint64_t u = 0; u < space.size(); ++u)
        for (std::uint64_t v = 0; v < space.size(); ++v)
            for (std::uint64_t w = 0; w < space.size(); ++w)
                CHECK(kernel.a(u, v, w) == doctest::Approx(kernel.a(v, u, w)).epsilon(1e-15));
}

TEST_CASE("operator order does not change the kernel") {
    // With independent per-digit mutation and binary-mask crossover the two
    // compositions induce the same child law; the kernels agree entrywise.
    const GenomeSpace space(2, 2);
    const ChildKernelD cf(space, {CrossoverKind::uniform}, 0.2, OperatorOrder::crossover_first);
    const ChildKernelD mf(space, {CrossoverKind::uniform}, 0.2, OperatorOrder::mutation_first);
    for (std::uint64_t u = 0; u < 4; ++u)
        for (std::uint64_t v = 0; v < 4; ++v)
            for (std::uint64_t w = 0; w < 4; ++w) CHECK(cf.b(u, v, w) == mf.b(u, v, w));
}

TEST_CASE("mixing matrix entries are the child-zero probabilities") {
    const GenomeSpace space(2, 2);
    const ChildKernelD kernel(space, {CrossoverKind::uniform}, 0.1);
    const MixingMatrix mm = mixing_matrix(kernel);
    REQUIRE(mm.entries.rows() == 4);
    for (std::uint64_t u = 0; u < 4; ++u)
        for (std::uint64_t v = 0; v < 4; ++v)
            CHECK(mm.entries(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) ==
                  doctest::Approx(kernel.a(u, v, 0)).epsilon(1e-15));
}

TEST_CASE("mix equals the direct triple sum") {
    const GenomeSpace space(2, 3);
    const double q = 0.03;
    const ChildKernelD kernel(space, {CrossoverKind::uniform}, q);
    const MixingMatrix mm = mixing_matrix(kernel);
    const auto masks = oracle::uniform_masks(3);

    RandomSource rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd p(8);
        for (int i = 0; i < 8; ++i) p(i) = rng.uniform01() + 1e-6;
        p /= p.sum();
        const Eigen::VectorXd fast = mix(space, mm, p);
        const Eigen::VectorXd direct = oracle::mix_triple_sum(p, 2, 3, q, masks);
        CHECK((fast - direct).lpNorm<Eigen::Infinity>() < 1e-12);
        CHECK(fast.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("mutation kernel spectrum and structure") {
    const GenomeSpace space(2, 2);
    const Eigen::MatrixXd u = mutation_kernel_matrix(space, 0.1);
    REQUIRE(u.rows() == 4);
    CHECK((u - u.transpose()).lpNorm<Eigen::Infinity>() < 1e-15);
    for (Eigen::Index c = 0; c < 4; ++c) CHECK(u.col(c).sum() == doctest::Approx(1.0));

    // Eigenvalues are (1 - qd/(d-1))^{#u} over binary masks: {1, .8, .8, .64}.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(u);
    std::vector<double> values(eig.eigenvalues().data(), eig.eigenvalues().data() + 4);
    std::sort(values.begin(), values.end());
    CHECK(values[0] == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(values[1] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(values[2] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(values[3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("proportional selection reweights by fitness") {
    Eigen::VectorXd p(3), phi(3);
    p << 0.5, 0.25, 0.25;
    phi << 1.0, 2.0, 4.0;
    const Eigen::VectorXd next = proportional_select(p, phi);
    // mean = 0.5 + 0.5 + 1 = 2
    CHECK(next(0) == doctest::Approx(0.25));
    CHECK(next(1) == doctest::Approx(0.25));
    CHECK(next(2) == doctest::Approx(0.5));

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(proportional_select(zero, phi), NumericError);
}

TEST_CASE("simplex validation and clamping") {
    Eigen::VectorXd good(2);
    good << 0.5, 0.5;
    CHECK_NOTHROW(require_simplex(good));

    Eigen::VectorXd negative(2);
    negative << 1.1, -0.1;
    CHECK_THROWS_AS(require_simplex(negative), UsageError);

    Eigen::VectorXd off_mass(2);
    off_mass << 0.6, 0.6;
    CHECK_THROWS_AS(require_simplex(off_mass), UsageError);

    Eigen::VectorXd tiny(2);
    tiny << 1.0, -1e-14;
    CHECK_NOTHROW(require_simplex(tiny));
    clamp_simplex(tiny);
    CHECK(tiny(1) == 0.0);
}

TEST_CASE("multinomial sampling is deterministic and concentrates") {
    Eigen::VectorXd p(4);
    p << 0.4, 0.3, 0.2, 0.1;

    RandomSource a(99), b(99);
    const auto ca = multinomial_sample(p, 100000, a);
    const auto cb = multinomial_sample(p, 100000, b);
    CHECK(ca == cb);

    std::uint64_t total = 0;
    for (const auto c : ca) total += c;
    CHECK(total == 100000);
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(static_cast<double>(ca[static_cast<std::size_t>(i)]) / 100000.0 - p(i)) <
              0.01);
}

TEST_CASE("uniform kernel commutes with every translation") {
    const GenomeSpace space(2, 3);
    const ChildKernelD kernel(space, {CrossoverKind::uniform}, 0.05);
    const CommutationCheck check = commutes_with_action(
        full_translation_group(space),
        [&](std::uint64_t u, std::uint64_t v, std::uint64_t w) { return kernel.a(u, v, w); });
    CHECK(check.commutes);
    CHECK(check.max_deviation < 1e-12);
    CHECK_FALSE(check.counterexample.has_value());
}

TEST_CASE("a position-biased kernel fails commutation with a counterexample") {
    const GenomeSpace space(2, 2);
    // "Always child 0" is not translation-equivariant.
    const CommutationCheck check = commutes_with_action(
        full_translation_group(space),
        [](std::uint64_t, std::uint64_t, std::uint64_t w) { return w == 0 ? 1.0 : 0.0; });
    CHECK_FALSE(check.commutes);
    REQUIRE(check.counterexample.has_value());
    const auto& ce = *check.counterexample;
    CHECK(std::abs(ce.lhs - ce.rhs) > 1e-12);
}

TEST_CASE("generation map composes selection then mixing") {
    const GenomeSpace space(2, 2);
    const Eigen::VectorXd phi = fitness_vector(FitnessPipeline::from_table({1, 2, 3, 4}), space);
    const GenerationMap map(space, phi, {CrossoverKind::uniform}, MutationSpec{0.05});

    Eigen::VectorXd p(4);
    p << 0.25, 0.25, 0.25, 0.25;
    const Eigen::VectorXd via_parts = map.mix(map.select(p));
    const Eigen::VectorXd direct = map.step(p);
    CHECK((via_parts - direct).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(direct.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(direct.minCoeff() >= 0.0);
}

TEST_CASE("sampled generations follow the deterministic map in expectation") {
    const GenomeSpace space(2, 2);
    const Eigen::VectorXd phi = fitness_vector(FitnessPipeline::onemax_plus_one(), space);
    const GenerationMap map(space, phi, {CrossoverKind::uniform}, MutationSpec{0.02});

    Eigen::VectorXd p(4);
    p << 0.4, 0.3, 0.2, 0.1;
    RandomSource rng(2024);
    const SampledGeneration gen = sample_generation(map, p, 200000, rng);
    std::uint64_t total = 0;
    for (const auto c : gen.counts) total += c;
    CHECK(total == 200000);
    CHECK((gen.empirical - map.step(p)).lpNorm<Eigen::Infinity>() < 0.01);
}

TEST_CASE("operator classification identifies the canonical properties") {
    const GenomeSpace space(2, 2);
    RandomSource rng(5);
    const OperatorClassification with_crossover =
        classify_operator_properties(space, {CrossoverKind::uniform}, MutationSpec{0.1}, rng);
    CHECK(with_crossover.mutation_per_digit);
    CHECK(with_crossover.crossover_multi_parent);
    REQUIRE(with_crossover.crossover_witness.has_value());
    CHECK(with_crossover.selection_subset);
    CHECK_FALSE(with_crossover.summary().empty());

    RandomSource rng2(5);
    const OperatorClassification copy_only =
        classify_operator_properties(space, {CrossoverKind::none}, MutationSpec{0.1}, rng2);
    CHECK_FALSE(copy_only.crossover_multi_parent);
}
