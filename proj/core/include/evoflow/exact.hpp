#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "evoflow/mixing.hpp"

namespace evoflow {

/// Arbitrary-precision rational scalar for the exact kernel mode.
using Rational = boost::rational<boost::multiprecision::cpp_int>;

using ChildKernelQ = ChildKernel<Rational>;

/// Exact kernel over a space with at most 64 genomes (the exact mode's
/// size bound); throws ResourceError above it.
ChildKernelQ exact_child_kernel(const GenomeSpace& space, CrossoverSpec cx,
                                const Rational& q,
                                OperatorOrder order = OperatorOrder::crossover_first);

inline Rational rational_of(std::int64_t num, std::int64_t den) {
    return Rational(boost::multiprecision::cpp_int(num), boost::multiprecision::cpp_int(den));
}

inline double to_double(const Rational& r) {
    return r.numerator().convert_to<double>() / r.denominator().convert_to<double>();
}

/// Exact commutation check: a(pi(u), pi(v), pi(w)) == a(u, v, w) for every
/// group element and triple, with zero tolerance. On failure the optional
/// counterexample carries the violating element and triple.
CommutationCheck commutes_with_action_exact(const PermutationGroup& group,
                                            const ChildKernelQ& kernel);

} // namespace evoflow
