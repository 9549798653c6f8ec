#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "evoflow/dynamics.hpp"
#include "evoflow/genome_ring.hpp"

namespace evoflow {

// ---------------------------------------------------------------------------
// Characters of the additive group of the genome ring.
// ---------------------------------------------------------------------------

/// chi(u, v) = omega_d^{<u, v>} with <u, v> = sum_i digit_i(u) digit_i(v)
/// mod d; rows are orthogonal and chi(0, .) is identically one.
class CharacterTable {
public:
    explicit CharacterTable(const GenomeSpace& space);

    const GenomeSpace& space() const { return space_; }
    int pairing(std::uint64_t u, std::uint64_t v) const;          // <u, v> mod d
    std::complex<double> chi(std::uint64_t u, std::uint64_t v) const;

private:
    GenomeSpace space_;
    std::vector<std::complex<double>> roots_;  // omega_d^0 .. omega_d^{d-1}
};

// ---------------------------------------------------------------------------
// Group Fourier transform (unitary normalization both ways).
// ---------------------------------------------------------------------------

/// xhat(u) = (1/sqrt n) sum_v chi(u, v) x(v), evaluated one digit axis at
/// a time (O(n l d)); for d = 2 this is the Walsh-Hadamard transform.
Eigen::VectorXcd group_dft(const GenomeSpace& space, const Eigen::VectorXcd& x);

/// Inverse: x(v) = (1/sqrt n) sum_u conj(chi(u, v)) xhat(u).
Eigen::VectorXcd group_dft_inverse(const GenomeSpace& space, const Eigen::VectorXcd& xhat);

// ---------------------------------------------------------------------------
// Spectra.
// ---------------------------------------------------------------------------

/// max |lambda|: full eigensolve for dimension <= 512, Arnoldi Ritz
/// values above.
double spectral_radius(const Eigen::MatrixXd& m);

struct SpectrumReport {
    Eigen::VectorXcd eigenvalues;  // sorted by modulus, descending
    double radius = 0.0;
    double second_modulus = 0.0;
};

/// Full spectrum of a (small) square matrix; second_modulus is the second
/// entry of the modulus-sorted list (= radius for 1x1).
SpectrumReport spectrum_of(const Eigen::MatrixXd& m);

/// Spectrum of the generation map linearized at a fixed point (residual
/// < 1e-10 required), in simplex-tangent coordinates. The full transition
/// map carries a leading unit eigenvalue that the tangent chart removes,
/// so the reported second_modulus — the local convergence rate — is the
/// tangent spectral radius.
SpectrumReport ea_map_spectrum(const GenerationMap& map, const FixedPointReport& at);

// ---------------------------------------------------------------------------
// Joint spectral radius bounds.
// ---------------------------------------------------------------------------

struct JsrBounds {
    double lower = 0.0;  // max over products of length j <= depth of rho^{1/j}
    double upper = 0.0;  // max over products of length exactly depth of ||.||_2^{1/depth}
    std::vector<double> lower_by_depth;  // [j-1]: max rho(length-j product)^{1/j}
    std::vector<double> upper_by_depth;  // [j-1]: max ||length-j product||_2^{1/j}
    bool upper_monotone = true;  // nonincreasing over depth; checked, not assumed
};

/// Brackets the joint spectral radius by exhaustive products up to the
/// given depth (1 <= depth <= 12, |set|^depth <= 10^6).
JsrBounds jsr_bounds(const std::vector<Eigen::MatrixXd>& set, int depth);

} // namespace evoflow
