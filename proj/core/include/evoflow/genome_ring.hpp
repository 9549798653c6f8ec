#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "evoflow/errors.hpp"

namespace evoflow {

/// Caps on derived object sizes, enforced at GenomeSpace construction
/// (vector cap) and at dense-matrix-producing operations (matrix cap).
struct SpaceCaps {
    std::uint64_t vector_cap = 65536;
    std::uint64_t matrix_cap = 4096;
};

/// The product ring of l copies of the integers mod d. Elements are the
/// integers in [0, d^l), identified with length-l digit strings, digit 0
/// least significant.
class GenomeSpace {
public:
    GenomeSpace(int d, int l, SpaceCaps caps = {});

    int d() const { return d_; }
    int l() const { return l_; }
    std::uint64_t size() const { return n_; }
    const SpaceCaps& caps() const { return caps_; }

    /// Spaces are compatible when they agree on d and l.
    friend bool operator==(const GenomeSpace& a, const GenomeSpace& b) {
        return a.d_ == b.d_ && a.l_ == b.l_;
    }
    friend bool operator!=(const GenomeSpace& a, const GenomeSpace& b) { return !(a == b); }

    /// Throws ResourceError if n exceeds the dense-matrix cap.
    void require_matrix_ok(const char* what) const;

private:
    int d_;
    int l_;
    std::uint64_t n_;
    SpaceCaps caps_;
};

/// An element of a GenomeSpace: an integer value in [0, d^l) together
/// with its base-d digit vector. Immutable value type.
class Genome {
public:
    Genome(const GenomeSpace& space, std::uint64_t value);

    std::uint64_t value() const { return value_; }
    const GenomeSpace& space() const { return space_; }

    /// Base-d digits, position 0 least significant, length l.
    std::vector<int> digits() const;
    int digit(int i) const;

    /// Number of nonzero d-ary digits (#s).
    int nonzero_count() const;

    /// True when every digit is 0 or 1 (the paper's "binary", any d).
    bool is_binary() const;

    friend bool operator==(const Genome& a, const Genome& b) {
        return a.space_ == b.space_ && a.value_ == b.value_;
    }
    friend bool operator!=(const Genome& a, const Genome& b) { return !(a == b); }

private:
    GenomeSpace space_;
    std::uint64_t value_;
};

/// Builds a genome from its digit vector (position 0 first).
Genome genome_from_digits(const GenomeSpace& space, const std::vector<int>& digits);

/// Component-wise addition mod d.
Genome ring_add(const Genome& u, const Genome& v);
/// Component-wise multiplication mod d.
Genome ring_mul(const Genome& u, const Genome& v);
/// Component-wise subtraction mod d; ring_add(result, v) == u.
Genome ring_sub(const Genome& u, const Genome& v);
/// 0 - s, component-wise.
Genome negate(const Genome& s);
/// All-ones-string minus s: for d=2 this is bitwise complement.
Genome complement(const Genome& s);
/// #s, the number of nonzero digits.
int nonzero_count(const Genome& s);

/// The all-ones string of a space.
Genome all_ones(const GenomeSpace& space);
/// The zero element of a space.
Genome zero(const GenomeSpace& space);

/// The l x m zero-one matrix S selecting the nonzero digit positions of
/// a mask genome s, columns ordered by ascending position.
struct Injection {
    Genome mask;
    int m;                        // #mask
    std::vector<int> positions;   // i_0 < i_1 < ... < i_{m-1}
    Eigen::MatrixXi matrix;       // l x m, matrix(i, j) = [i == i_j]
};

Injection injection_of(const Genome& s);

/// Places the digits of j (an element of the m-digit space, m = #s) at
/// the nonzero positions of s; other digits zero. Image lies in H_s.
Genome embed(const Genome& s, std::uint64_t j);

/// For binary s, splits i into (u, v) = (i (x) s, i (x) s-bar) with
/// u in H_s, v in H_s-bar and u (+) v == i.
std::pair<Genome, Genome> binary_decompose(const Genome& i, const Genome& s);

} // namespace evoflow
