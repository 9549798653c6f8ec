#include "evoflow/group_action.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_set>

namespace evoflow {

namespace {

struct ImagesHash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto x : v) {
            h ^= x;
            h *= 1099511628211ull;
        }
        return h;
    }
};

} // namespace

Permutation::Permutation(std::vector<std::uint32_t> images) : images_(std::move(images)) {
    std::vector<bool> seen(images_.size(), false);
    for (auto x : images_) {
        if (x >= images_.size() || seen[x]) {
            throw UsageError("Permutation: image array is not a bijection");
        }
        seen[x] = true;
    }
}

Permutation Permutation::identity(std::uint64_t n) {
    std::vector<std::uint32_t> im(n);
    for (std::uint64_t v = 0; v < n; ++v) im[v] = static_cast<std::uint32_t>(v);
    return Permutation(std::move(im));
}

bool Permutation::is_identity() const {
    for (std::uint64_t v = 0; v < images_.size(); ++v) {
        if (images_[v] != v) return false;
    }
    return true;
}

Permutation Permutation::inverse() const {
    std::vector<std::uint32_t> inv(images_.size());
    for (std::uint64_t v = 0; v < images_.size(); ++v) inv[images_[v]] = static_cast<std::uint32_t>(v);
    return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& other) const {
    if (images_.size() != other.images_.size()) {
        throw UsageError("Permutation::compose: degree mismatch");
    }
    std::vector<std::uint32_t> out(images_.size());
    for (std::uint64_t v = 0; v < images_.size(); ++v) out[v] = images_[other.images_[v]];
    return Permutation(std::move(out));
}

Permutation rotation_permutation(const GenomeSpace& space) {
    // Shift digit positions up by one, cyclically: digit i of the image is
    // digit (i - 1 mod l) of the argument.
    const std::uint64_t n = space.size();
    std::vector<std::uint32_t> im(n);
    for (std::uint64_t v = 0; v < n; ++v) {
        const Genome g(space, v);
        auto dg = g.digits();
        std::rotate(dg.rbegin(), dg.rbegin() + 1, dg.rend());
        im[v] = static_cast<std::uint32_t>(genome_from_digits(space, dg).value());
    }
    return Permutation(std::move(im));
}

Permutation translation_permutation(const GenomeSpace& space, const Genome& s) {
    if (s.space() != space) throw UsageError("translation_permutation: mask from another space");
    const std::uint64_t n = space.size();
    std::vector<std::uint32_t> im(n);
    for (std::uint64_t v = 0; v < n; ++v) {
        im[v] = static_cast<std::uint32_t>(ring_add(Genome(space, v), s).value());
    }
    return Permutation(std::move(im));
}

Permutation digit_position_permutation(const GenomeSpace& space, const std::vector<int>& pos) {
    const int l = space.l();
    if (static_cast<int>(pos.size()) != l) {
        throw UsageError("digit_position_permutation: expected " + std::to_string(l) +
                         " positions");
    }
    std::vector<bool> seen(static_cast<std::size_t>(l), false);
    for (int p : pos) {
        if (p < 0 || p >= l || seen[static_cast<std::size_t>(p)]) {
            throw UsageError("digit_position_permutation: positions are not a permutation");
        }
        seen[static_cast<std::size_t>(p)] = true;
    }
    const std::uint64_t n = space.size();
    std::vector<std::uint32_t> im(n);
    std::vector<int> out_digits(static_cast<std::size_t>(l));
    for (std::uint64_t v = 0; v < n; ++v) {
        const auto dg = Genome(space, v).digits();
        for (int i = 0; i < l; ++i) {
            out_digits[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])] =
                dg[static_cast<std::size_t>(i)];
        }
        im[v] = static_cast<std::uint32_t>(genome_from_digits(space, out_digits).value());
    }
    return Permutation(std::move(im));
}

PermutationGroup close_group(const std::vector<Permutation>& generators, std::uint64_t n,
                             std::size_t cap) {
    for (const auto& g : generators) {
        if (g.size() != n) throw UsageError("close_group: generator degree mismatch");
    }

    std::unordered_set<std::vector<std::uint32_t>, ImagesHash> seen;
    std::deque<Permutation> frontier;
    std::vector<Permutation> elements;

    auto push = [&](Permutation p) {
        if (seen.insert(p.images()).second) {
            if (seen.size() > cap) {
                throw ResourceError("close_group: closure exceeds cap " + std::to_string(cap));
            }
            frontier.push_back(p);
            elements.push_back(std::move(p));
        }
    };

    push(Permutation::identity(n));
    for (const auto& g : generators) push(g);

    while (!frontier.empty()) {
        const Permutation p = frontier.front();
        frontier.pop_front();
        for (const auto& g : generators) {
            push(g.compose(p));
            push(p.compose(g));
        }
        push(p.inverse());
    }

    std::sort(elements.begin(), elements.end());
    // Identity is the lexicographic minimum only for degree <= 1; put it
    // first explicitly so labels are predictable.
    const Permutation id = Permutation::identity(n);
    auto it = std::find(elements.begin(), elements.end(), id);
    std::rotate(elements.begin(), it, it + 1);

    PermutationGroup group;
    group.n_ = n;
    group.generators_ = generators;
    group.elements_ = std::move(elements);
    return group;
}

std::vector<std::uint32_t> orbit_of(const PermutationGroup& group, std::uint64_t zeta) {
    if (zeta >= group.degree()) throw UsageError("orbit_of: point outside the space");
    std::vector<std::uint32_t> orbit;
    for (const auto& p : group.elements()) orbit.push_back(p(zeta));
    std::sort(orbit.begin(), orbit.end());
    orbit.erase(std::unique(orbit.begin(), orbit.end()), orbit.end());
    return orbit;
}

PermutationGroup stabilizer_of(const PermutationGroup& group, std::uint64_t zeta) {
    if (zeta >= group.degree()) throw UsageError("stabilizer_of: point outside the space");
    std::vector<Permutation> fixing;
    for (const auto& p : group.elements()) {
        if (p(zeta) == zeta) fixing.push_back(p);
    }
    // A stabilizer is already a subgroup; closing it is cheap and reuses
    // the canonical ordering.
    return close_group(fixing, group.degree(), fixing.size() + 1);
}

OrbitPartition orbit_partition(const PermutationGroup& group) {
    const std::uint64_t n = group.degree();
    constexpr std::uint32_t kUnassigned = 0xffffffffu;
    OrbitPartition part;
    part.class_of.assign(n, kUnassigned);
    for (std::uint64_t v = 0; v < n; ++v) {
        if (part.class_of[v] != kUnassigned) continue;
        auto orbit = orbit_of(group, v);
        const auto idx = static_cast<std::uint32_t>(part.classes.size());
        for (auto member : orbit) part.class_of[member] = idx;
        part.classes.push_back(std::move(orbit));
    }
    return part;
}

OrbitPartition singleton_partition(std::uint64_t n) {
    OrbitPartition part;
    part.class_of.resize(n);
    part.classes.reserve(n);
    for (std::uint64_t v = 0; v < n; ++v) {
        part.class_of[v] = static_cast<std::uint32_t>(v);
        part.classes.push_back({static_cast<std::uint32_t>(v)});
    }
    return part;
}

OrbitPartition universal_partition(std::uint64_t n) {
    OrbitPartition part;
    part.class_of.assign(n, 0);
    part.classes.emplace_back();
    for (std::uint64_t v = 0; v < n; ++v) part.classes[0].push_back(static_cast<std::uint32_t>(v));
    return part;
}

Eigen::MatrixXd permutation_matrix(const GenomeSpace& space, const Permutation& pi) {
    space.require_matrix_ok("permutation_matrix");
    if (pi.size() != space.size()) throw UsageError("permutation_matrix: degree mismatch");
    const auto n = static_cast<Eigen::Index>(space.size());
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index v = 0; v < n; ++v) {
        sigma(pi(static_cast<std::uint64_t>(v)), v) = 1.0;
    }
    return sigma;
}

std::vector<std::uint32_t> invariant_points(const PermutationGroup& group) {
    std::vector<std::uint32_t> fixed;
    for (std::uint64_t v = 0; v < group.degree(); ++v) {
        bool ok = true;
        for (const auto& p : group.elements()) {
            if (p(v) != v) {
                ok = false;
                break;
            }
        }
        if (ok) fixed.push_back(static_cast<std::uint32_t>(v));
    }
    return fixed;
}

bool kernel_is_trivial(const std::vector<Permutation>& labeled_family) {
    std::size_t identity_count = 0;
    for (const auto& p : labeled_family) {
        if (p.is_identity()) ++identity_count;
    }
    return identity_count <= 1;
}

EquivalenceRelation schema_family_from_mask(const Genome& s) {
    if (!s.is_binary()) {
        throw UsageError("schema_family_from_mask: mask " + std::to_string(s.value()) +
                         " is not binary");
    }
    const GenomeSpace& sp = s.space();
    const std::uint64_t n = sp.size();
    // Two genomes are equivalent iff they agree on every position where s
    // is nonzero, i.e. iff x (x) s == y (x) s.
    std::map<std::uint64_t, std::vector<std::uint32_t>> by_key;
    for (std::uint64_t x = 0; x < n; ++x) {
        by_key[ring_mul(Genome(sp, x), s).value()].push_back(static_cast<std::uint32_t>(x));
    }
    OrbitPartition part;
    part.class_of.assign(n, 0);
    std::vector<std::vector<std::uint32_t>> classes;
    classes.reserve(by_key.size());
    for (auto& [key, members] : by_key) classes.push_back(std::move(members));
    std::sort(classes.begin(), classes.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (std::uint32_t idx = 0; idx < classes.size(); ++idx) {
        for (auto member : classes[idx]) part.class_of[member] = idx;
    }
    part.classes = std::move(classes);
    return EquivalenceRelation{std::move(part)};
}

EquivalenceRelation digit_relation(const GenomeSpace& space, int position) {
    if (position < 0 || position >= space.l()) {
        throw UsageError("digit_relation: position " + std::to_string(position) +
                         " outside [0, l)");
    }
    std::vector<int> digits(static_cast<std::size_t>(space.l()), 0);
    digits[static_cast<std::size_t>(position)] = 1;
    return schema_family_from_mask(genome_from_digits(space, digits));
}

std::vector<std::uint32_t> direct_sum_decompose(
    const Genome& omega, const std::vector<std::vector<std::uint32_t>>& subgroups) {
    const GenomeSpace& sp = omega.space();
    const std::uint64_t n = sp.size();

    // Condition 3: each Q_i is a subgroup (0 present, closed under (+)).
    // Normality is automatic in an Abelian group.
    for (std::size_t i = 0; i < subgroups.size(); ++i) {
        const auto& q = subgroups[i];
        std::unordered_set<std::uint32_t> members(q.begin(), q.end());
        if (members.count(0) == 0) {
            throw UsageError("direct_sum_decompose: condition 3 violated, Q_" +
                             std::to_string(i) + " misses 0");
        }
        for (auto a : q) {
            for (auto b : q) {
                const auto sum = static_cast<std::uint32_t>(
                    ring_add(Genome(sp, a), Genome(sp, b)).value());
                if (members.count(sum) == 0) {
                    throw UsageError("direct_sum_decompose: condition 3 violated, Q_" +
                                     std::to_string(i) + " not closed under (+)");
                }
            }
        }
    }

    // Condition 2: pairwise intersections are {0}.
    for (std::size_t i = 0; i < subgroups.size(); ++i) {
        std::unordered_set<std::uint32_t> members(subgroups[i].begin(), subgroups[i].end());
        for (std::size_t j = i + 1; j < subgroups.size(); ++j) {
            for (auto x : subgroups[j]) {
                if (x != 0 && members.count(x) != 0) {
                    throw UsageError("direct_sum_decompose: condition 2 violated, Q_" +
                                     std::to_string(i) + " and Q_" + std::to_string(j) +
                                     " share " + std::to_string(x));
                }
            }
        }
    }

    // Condition 1: the (+)-span covers H with unique component tuples.
    // Enumerate the whole product via a mixed-radix counter.
    std::uint64_t product = 1;
    for (const auto& q : subgroups) {
        product *= q.size();
        if (product > n) break;
    }
    if (product != n) {
        throw UsageError("direct_sum_decompose: condition 1 violated, product of subgroup "
                         "orders is not |H|");
    }
    std::vector<std::vector<std::uint32_t>> tuple_of(n);
    std::vector<std::size_t> counter(subgroups.size(), 0);
    while (true) {
        Genome sum = zero(sp);
        std::vector<std::uint32_t> tuple(subgroups.size());
        for (std::size_t i = 0; i < subgroups.size(); ++i) {
            tuple[i] = subgroups[i][counter[i]];
            sum = ring_add(sum, Genome(sp, tuple[i]));
        }
        if (!tuple_of[sum.value()].empty()) {
            throw UsageError("direct_sum_decompose: condition 1 violated, element " +
                             std::to_string(sum.value()) + " has two representations");
        }
        tuple_of[sum.value()] = std::move(tuple);

        std::size_t i = 0;
        for (; i < counter.size(); ++i) {
            if (++counter[i] < subgroups[i].size()) break;
            counter[i] = 0;
        }
        if (i == counter.size()) break;
    }

    return tuple_of[omega.value()];
}

std::uint32_t rho_partial(const EquivalenceRelation& relation, std::uint64_t x) {
    if (x >= relation.partition.class_of.size()) {
        throw UsageError("rho_partial: point outside the space");
    }
    return relation.partition.class_of[x];
}

std::vector<std::uint32_t> rho_family(const std::vector<EquivalenceRelation>& family,
                                      std::uint64_t x) {
    if (family.empty()) throw UsageError("rho_family: empty relation family");
    std::vector<std::uint32_t> tuple;
    tuple.reserve(family.size());
    for (const auto& rel : family) tuple.push_back(rho_partial(rel, x));
    return tuple;
}

CoverageResult covers(const std::vector<EquivalenceRelation>& family, std::uint64_t n) {
    if (family.empty()) throw UsageError("covers: empty relation family");
    for (std::uint64_t x = 0; x < n; ++x) {
        for (std::uint64_t y = x + 1; y < n; ++y) {
            bool separated = false;
            for (const auto& rel : family) {
                if (!rel.partition.same_class(x, y)) {
                    separated = true;
                    break;
                }
            }
            if (!separated) {
                return CoverageResult{
                    false,
                    std::make_pair(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y))};
            }
        }
    }
    return CoverageResult{true, std::nullopt};
}

RepresentationImage chromosome_image(const std::vector<EquivalenceRelation>& family,
                                     std::uint64_t n) {
    if (family.empty()) throw UsageError("chromosome_image: empty relation family");
    RepresentationImage image;
    image.tuples.reserve(n);
    for (std::uint64_t x = 0; x < n; ++x) image.tuples.push_back(rho_family(family, x));
    image.distinct_tuples = image.tuples;
    std::sort(image.distinct_tuples.begin(), image.distinct_tuples.end());
    image.distinct_tuples.erase(
        std::unique(image.distinct_tuples.begin(), image.distinct_tuples.end()),
        image.distinct_tuples.end());
    return image;
}

} // namespace evoflow
