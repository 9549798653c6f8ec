#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "evoflow/genome_ring.hpp"

namespace evoflow {

/// A permutation of the n genomes, stored by its image array.
class Permutation {
public:
    explicit Permutation(std::vector<std::uint32_t> images);

    static Permutation identity(std::uint64_t n);

    std::uint64_t size() const { return images_.size(); }
    std::uint32_t operator()(std::uint64_t v) const { return images_[v]; }
    const std::vector<std::uint32_t>& images() const { return images_; }

    bool is_identity() const;
    Permutation inverse() const;

    /// (a.compose(b))(v) == a(b(v)).
    Permutation compose(const Permutation& other) const;

    friend bool operator==(const Permutation& a, const Permutation& b) {
        return a.images_ == b.images_;
    }
    friend bool operator<(const Permutation& a, const Permutation& b) {
        return a.images_ < b.images_;
    }

private:
    std::vector<std::uint32_t> images_;
};

/// Common generator constructions on a genome space.
Permutation rotation_permutation(const GenomeSpace& space);
Permutation translation_permutation(const GenomeSpace& space, const Genome& s);
/// new digit at position pos[i] = old digit at position i; pos must be a
/// permutation of 0..l-1.
Permutation digit_position_permutation(const GenomeSpace& space, const std::vector<int>& pos);

/// A closed set of permutations of one genome space. Element labels are
/// their indices in the (lexicographically sorted, hence deterministic)
/// element list; index 0 is always the identity.
class PermutationGroup {
public:
    const std::vector<Permutation>& elements() const { return elements_; }
    const std::vector<Permutation>& generators() const { return generators_; }
    std::size_t order() const { return elements_.size(); }
    std::uint64_t degree() const { return n_; }

    friend PermutationGroup close_group(const std::vector<Permutation>& generators,
                                        std::uint64_t n, std::size_t cap);

private:
    std::uint64_t n_ = 0;
    std::vector<Permutation> generators_;
    std::vector<Permutation> elements_;
};

/// Breadth-first closure of the generators; throws ResourceError when the
/// closure exceeds cap elements. With no generators returns {identity}.
PermutationGroup close_group(const std::vector<Permutation>& generators, std::uint64_t n,
                             std::size_t cap = 100000);

/// {pi(zeta) : pi in group}, sorted ascending.
std::vector<std::uint32_t> orbit_of(const PermutationGroup& group, std::uint64_t zeta);

/// The subgroup fixing zeta.
PermutationGroup stabilizer_of(const PermutationGroup& group, std::uint64_t zeta);

/// A partition of the genome space into disjoint classes covering all of
/// it. Classes are sorted by smallest member; members sorted ascending.
struct OrbitPartition {
    std::vector<std::vector<std::uint32_t>> classes;
    std::vector<std::uint32_t> class_of;  // length n

    std::size_t size() const { return classes.size(); }
    bool same_class(std::uint64_t x, std::uint64_t y) const {
        return class_of[x] == class_of[y];
    }
    friend bool operator==(const OrbitPartition& a, const OrbitPartition& b) {
        return a.classes == b.classes;
    }
};

/// Orbits of the group action as a partition.
OrbitPartition orbit_partition(const PermutationGroup& group);

/// Partition with every genome in its own class.
OrbitPartition singleton_partition(std::uint64_t n);
/// Partition with a single class holding everything.
OrbitPartition universal_partition(std::uint64_t n);

/// The n x n zero-one matrix with entries [u == pi(v)].
Eigen::MatrixXd permutation_matrix(const GenomeSpace& space, const Permutation& pi);

/// Genomes fixed by every element of the group.
std::vector<std::uint32_t> invariant_points(const PermutationGroup& group);

/// True iff at most one member of the labeled family acts as the identity
/// permutation (labels are positions in the list; repeats allowed).
bool kernel_is_trivial(const std::vector<Permutation>& labeled_family);

/// An equivalence relation on the genome space, stored as its partition.
struct EquivalenceRelation {
    OrbitPartition partition;
};

/// Classes fix the digits at every nonzero position of the binary mask s:
/// the cosets u (+) H_s-bar for u in H_s.
EquivalenceRelation schema_family_from_mask(const Genome& s);

/// Relation whose classes fix digit position i.
EquivalenceRelation digit_relation(const GenomeSpace& space, int position);

/// Component list of the internal-direct-sum decomposition of omega over
/// the given subgroups, validated against the direct-sum conditions.
std::vector<std::uint32_t> direct_sum_decompose(
    const Genome& omega, const std::vector<std::vector<std::uint32_t>>& subgroups);

/// Index of the class of x under the relation.
std::uint32_t rho_partial(const EquivalenceRelation& relation, std::uint64_t x);

/// Tuple of class indices of x across the relation family.
std::vector<std::uint32_t> rho_family(const std::vector<EquivalenceRelation>& family,
                                      std::uint64_t x);

struct CoverageResult {
    bool covers = false;
    /// A pair no relation separates, present when covers is false.
    std::optional<std::pair<std::uint32_t, std::uint32_t>> witness;
};

/// True iff every pair of distinct genomes is separated by some relation.
CoverageResult covers(const std::vector<EquivalenceRelation>& family, std::uint64_t n);

/// Image of the representation map: genome -> tuple of class indices.
struct RepresentationImage {
    std::vector<std::vector<std::uint32_t>> tuples;          // indexed by genome
    std::vector<std::vector<std::uint32_t>> distinct_tuples; // the chromosome set C, sorted
    std::size_t image_size() const { return distinct_tuples.size(); }
};

RepresentationImage chromosome_image(const std::vector<EquivalenceRelation>& family,
                                     std::uint64_t n);

} // namespace evoflow
