#include "evoflow/exact.hpp"

#include <cmath>
#include <string>

#include "evoflow/errors.hpp"

namespace evoflow {

ChildKernelQ exact_child_kernel(const GenomeSpace& space, CrossoverSpec cx, const Rational& q,
                                OperatorOrder order) {
    if (space.size() > 64)
        throw ResourceError("exact rational mode is limited to spaces with at most 64 genomes; "
                            "this space has " + std::to_string(space.size()));
    return ChildKernelQ(space, cx, q, order);
}

CommutationCheck commutes_with_action_exact(const PermutationGroup& group,
                                            const ChildKernelQ& kernel) {
    const auto n = static_cast<std::uint64_t>(group.degree());
    if (n != kernel.space().size())
        throw UsageError("group degree does not match the kernel's genome space");

    CommutationCheck check;
    check.commutes = true;
    for (std::size_t e = 0; e < group.order(); ++e) {
        const Permutation& pi = group.elements()[e];
        if (pi.is_identity()) continue;
        for (std::uint64_t u = 0; u < n; ++u)
            for (std::uint64_t v = 0; v < n; ++v)
                for (std::uint64_t w = 0; w < n; ++w) {
                    const Rational lhs = kernel.a(pi(u), pi(v), pi(w));
                    const Rational rhs = kernel.a(u, v, w);
                    if (lhs != rhs) {
                        check.commutes = false;
                        check.max_deviation = std::abs(to_double(lhs) - to_double(rhs));
                        check.counterexample = CommutationCounterexample{
                            e, u, v, w, to_double(lhs), to_double(rhs)};
                        return check;
                    }
                }
    }
    return check;
}

} // namespace evoflow
