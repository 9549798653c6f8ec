// Microbenchmarks for the hot paths: kernel/matrix construction, the mixing
// transform, generation steps, group closure, the group DFT, the continuous
// flows, and JSR product enumeration.
#include <benchmark/benchmark.h>

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "evoflow/dynamics.hpp"
#include "evoflow/flows.hpp"
#include "evoflow/genome_ring.hpp"
#include "evoflow/group_action.hpp"
#include "evoflow/mixing.hpp"
#include "evoflow/spectral.hpp"

using namespace evoflow;

namespace {

GenerationMap make_map(int d, int l) {
    const GenomeSpace space(d, l);
    return GenerationMap(space, fitness_vector(FitnessPipeline::onemax_plus_one(), space),
                         {CrossoverKind::uniform}, MutationSpec{0.01});
}

void BM_MixingMatrixBuild(benchmark::State& state) {
    const GenomeSpace space(2, static_cast<int>(state.range(0)));
    const ChildKernelD kernel(space, {CrossoverKind::uniform}, 0.01);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mixing_matrix(kernel));
    }
    state.SetComplexityN(static_cast<std::int64_t>(space.size()));
}

void BM_MixTransform(benchmark::State& state) {
    const GenomeSpace space(2, static_cast<int>(state.range(0)));
    const ChildKernelD kernel(space, {CrossoverKind::uniform}, 0.01);
    const MixingMatrix mm = mixing_matrix(kernel);
    const Eigen::VectorXd p = random_simplex_starts(
        static_cast<Eigen::Index>(space.size()), 1, 42)[0];
    for (auto _ : state) {
        benchmark::DoNotOptimize(mix(space, mm, p));
    }
    state.SetComplexityN(static_cast<std::int64_t>(space.size()));
}

void BM_GenerationStep(benchmark::State& state) {
    const GenerationMap map = make_map(2, static_cast<int>(state.range(0)));
    Eigen::VectorXd p = random_simplex_starts(
        static_cast<Eigen::Index>(map.space().size()), 1, 43)[0];
    for (auto _ : state) {
        p = map.step(p);
        benchmark::DoNotOptimize(p.data());
    }
}

void BM_TranslationGroupClosure(benchmark::State& state) {
    const GenomeSpace space(2, static_cast<int>(state.range(0)));
    std::vector<Permutation> gens;
    for (int i = 0; i < space.l(); ++i) {
        std::vector<int> digits(space.l(), 0);
        digits[i] = 1;
        gens.push_back(translation_permutation(space, genome_from_digits(space, digits)));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(close_group(gens, space.size()));
    }
}

void BM_GroupDft(benchmark::State& state) {
    const GenomeSpace space(2, static_cast<int>(state.range(0)));
    const auto n = static_cast<Eigen::Index>(space.size());
    Eigen::VectorXcd x(n);
    for (Eigen::Index i = 0; i < n; ++i)
        x(i) = std::complex<double>(std::sin(0.1 * static_cast<double>(i)), 0.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(group_dft(space, x));
    }
    state.SetComplexityN(n);
}

void BM_GradientFlowDoubleWell(benchmark::State& state) {
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
    Eigen::VectorXd x0(1);
    x0 << 0.3;
    const IntegratorConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gradient_flow(obj, x0, cfg));
    }
}

void BM_DoubleBracket4x4(benchmark::State& state) {
    RandomSource rng(7);
    Eigen::MatrixXd m(4, 4);
    for (Eigen::Index r = 0; r < 4; ++r)
        for (Eigen::Index c = 0; c < 4; ++c) m(r, c) = 2.0 * rng.uniform01() - 1.0;
    MatrixFlowProblem problem;
    problem.A = 0.5 * (m + m.transpose());
    problem.N = Eigen::Vector4d(1.0, 2.0, 3.0, 4.0).asDiagonal();
    for (auto _ : state) {
        benchmark::DoNotOptimize(double_bracket_flow(problem));
    }
}

void BM_JsrShearPair(benchmark::State& state) {
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 1, 1, 0, 1;
    b << 1, 0, 1, 1;
    const std::vector<Eigen::MatrixXd> set = {a, b};
    const int depth = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(jsr_bounds(set, depth));
    }
}

BENCHMARK(BM_MixingMatrixBuild)->DenseRange(2, 6)->Complexity();
BENCHMARK(BM_MixTransform)->DenseRange(2, 6)->Complexity();
BENCHMARK(BM_GenerationStep)->DenseRange(2, 6);
BENCHMARK(BM_TranslationGroupClosure)->DenseRange(2, 6);
BENCHMARK(BM_GroupDft)->DenseRange(4, 12, 2)->Complexity();
BENCHMARK(BM_GradientFlowDoubleWell);
BENCHMARK(BM_DoubleBracket4x4);
BENCHMARK(BM_JsrShearPair)->DenseRange(4, 10, 2);

}  // namespace

BENCHMARK_MAIN();
