#include "evoflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "evoflow/errors.hpp"

namespace evoflow {

// ---------------------------------------------------------------------------
// Characters.
// ---------------------------------------------------------------------------

CharacterTable::CharacterTable(const GenomeSpace& space) : space_(space) {
    const int d = space_.d();
    roots_.reserve(static_cast<std::size_t>(d));
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int k = 0; k < d; ++k)
        roots_.push_back(std::polar(1.0, two_pi * k / d));
}

int CharacterTable::pairing(std::uint64_t u, std::uint64_t v) const {
    const auto d = static_cast<std::uint64_t>(space_.d());
    std::uint64_t acc = 0;
    for (int i = 0; i < space_.l(); ++i) {
        acc = (acc + (u % d) * (v % d)) % d;
        u /= d;
        v /= d;
    }
    return static_cast<int>(acc);
}

std::complex<double> CharacterTable::chi(std::uint64_t u, std::uint64_t v) const {
    return roots_[static_cast<std::size_t>(pairing(u, v))];
}

// ---------------------------------------------------------------------------
// Group DFT.
// ---------------------------------------------------------------------------

namespace {

/// Applies the length-d DFT (or its conjugate) along every digit axis,
/// scaling by 1/sqrt(d) per axis.
Eigen::VectorXcd separable_transform(const GenomeSpace& space, const Eigen::VectorXcd& x,
                                     bool inverse) {
    const auto n = static_cast<std::uint64_t>(x.size());
    if (n != space.size())
        throw UsageError("vector length " + std::to_string(n) + " does not match the space (" +
                         std::to_string(space.size()) + ")");
    const auto d = static_cast<std::uint64_t>(space.d());
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));

    Eigen::VectorXcd work = x;
    std::vector<std::complex<double>> gathered(d), transformed(d);

    if (d == 2) {
        // Real +-1 characters: in-place butterflies (Walsh-Hadamard).
        for (int axis = 0; axis < space.l(); ++axis) {
            const std::uint64_t stride = std::uint64_t{1} << axis;
            for (std::uint64_t block = 0; block < n; block += 2 * stride)
                for (std::uint64_t off = 0; off < stride; ++off) {
                    const auto i0 = static_cast<Eigen::Index>(block + off);
                    const auto i1 = static_cast<Eigen::Index>(block + off + stride);
                    const std::complex<double> a = work(i0), b = work(i1);
                    work(i0) = (a + b) * scale;
                    work(i1) = (a - b) * scale;
                }
        }
        return work;
    }

    constexpr double two_pi = 6.283185307179586476925286766559;
    std::vector<std::complex<double>> omega(d);
    for (std::uint64_t k = 0; k < d; ++k)
        omega[k] = std::polar(1.0, (inverse ? -two_pi : two_pi) * static_cast<double>(k) /
                                       static_cast<double>(d));

    std::uint64_t stride = 1;
    for (int axis = 0; axis < space.l(); ++axis, stride *= d) {
        for (std::uint64_t block = 0; block < n; block += d * stride)
            for (std::uint64_t off = 0; off < stride; ++off) {
                for (std::uint64_t a = 0; a < d; ++a)
                    gathered[a] = work(static_cast<Eigen::Index>(block + off + a * stride));
                for (std::uint64_t a = 0; a < d; ++a) {
                    std::complex<double> acc = 0.0;
                    for (std::uint64_t b = 0; b < d; ++b) acc += omega[a * b % d] * gathered[b];
                    transformed[a] = acc * scale;
                }
                for (std::uint64_t a = 0; a < d; ++a)
                    work(static_cast<Eigen::Index>(block + off + a * stride)) = transformed[a];
            }
    }
    return work;
}

} // namespace

Eigen::VectorXcd group_dft(const GenomeSpace& space, const Eigen::VectorXcd& x) {
    return separable_transform(space, x, false);
}

Eigen::VectorXcd group_dft_inverse(const GenomeSpace& space, const Eigen::VectorXcd& xhat) {
    return separable_transform(space, xhat, true);
}

// ---------------------------------------------------------------------------
// Spectra.
// ---------------------------------------------------------------------------

double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw UsageError("matrix must be square");
    if (!m.allFinite()) throw UsageError("matrix has non-finite entries");
    const Eigen::Index k = m.rows();

    if (k <= 512) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }

    // Arnoldi: Ritz values of the Hessenberg restriction on a Krylov
    // subspace approximate the dominant spectrum.
    const Eigen::Index dim = std::min<Eigen::Index>(k, 96);
    Eigen::MatrixXd basis(k, dim + 1);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim + 1, dim);
    basis.col(0) = Eigen::VectorXd::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));

    Eigen::Index built = 0;
    for (Eigen::Index j = 0; j < dim; ++j) {
        Eigen::VectorXd w = m * basis.col(j);
        for (Eigen::Index i = 0; i <= j; ++i) {
            hess(i, j) = basis.col(i).dot(w);
            w -= hess(i, j) * basis.col(i);
        }
        // Re-orthogonalize once; plain Gram-Schmidt drifts.
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double c = basis.col(i).dot(w);
            hess(i, j) += c;
            w -= c * basis.col(i);
        }
        hess(j + 1, j) = w.norm();
        built = j + 1;
        if (hess(j + 1, j) < 1e-12) break;  // invariant subspace found
        basis.col(j + 1) = w / hess(j + 1, j);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(hess.topLeftCorner(built, built), false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

SpectrumReport spectrum_of(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw UsageError("matrix must be square");
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    Eigen::VectorXcd eig = es.eigenvalues();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(eig.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(eig(a)) > std::abs(eig(b));
    });

    SpectrumReport report;
    report.eigenvalues.resize(eig.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        report.eigenvalues(static_cast<Eigen::Index>(i)) = eig(order[i]);
    report.radius = std::abs(report.eigenvalues(0));
    report.second_modulus =
        eig.size() > 1 ? std::abs(report.eigenvalues(1)) : report.radius;
    return report;
}

SpectrumReport ea_map_spectrum(const GenerationMap& map, const FixedPointReport& at) {
    if (!(at.residual < 1e-10))
        throw UsageError("ea_map_spectrum needs a fixed point with residual < 1e-10 (got " +
                         std::to_string(at.residual) + ")");
    SpectrumReport report = spectrum_of(jacobian_at(map, at.p_star));
    // The chart removed the transition map's leading unit eigenvalue, so
    // the local convergence rate is the tangent radius.
    report.second_modulus = report.radius;
    return report;
}

// ---------------------------------------------------------------------------
// Joint spectral radius.
// ---------------------------------------------------------------------------

namespace {

double spectral_norm(const Eigen::MatrixXd& m) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

void jsr_walk(const std::vector<Eigen::MatrixXd>& set, const Eigen::MatrixXd& product, int length,
              int depth, JsrBounds& bounds) {
    const double rho = spectral_radius(product);
    const double norm = spectral_norm(product);
    const double inv = 1.0 / length;
    auto& lower = bounds.lower_by_depth[static_cast<std::size_t>(length - 1)];
    auto& upper = bounds.upper_by_depth[static_cast<std::size_t>(length - 1)];
    lower = std::max(lower, std::pow(rho, inv));
    upper = std::max(upper, std::pow(norm, inv));
    if (length == depth) return;
    for (const Eigen::MatrixXd& a : set) jsr_walk(set, product * a, length + 1, depth, bounds);
}

} // namespace

JsrBounds jsr_bounds(const std::vector<Eigen::MatrixXd>& set, int depth) {
    if (set.empty()) throw UsageError("jsr_bounds needs at least one matrix");
    if (depth < 1 || depth > 12) throw UsageError("jsr depth must lie in [1, 12]");
    const Eigen::Index k = set.front().rows();
    for (const Eigen::MatrixXd& m : set) {
        if (m.rows() != k || m.cols() != k)
            throw UsageError("jsr matrices must be square with one common dimension");
        if (!m.allFinite()) throw UsageError("jsr matrix has non-finite entries");
    }
    double products = 1.0;
    for (int j = 0; j < depth; ++j) {
        products *= static_cast<double>(set.size());
        if (products > 1e6)
            throw ResourceError("jsr product count |set|^depth exceeds 10^6");
    }

    JsrBounds bounds;
    bounds.lower_by_depth.assign(static_cast<std::size_t>(depth), 0.0);
    bounds.upper_by_depth.assign(static_cast<std::size_t>(depth), 0.0);
    for (const Eigen::MatrixXd& a : set) jsr_walk(set, a, 1, depth, bounds);

    bounds.lower = *std::max_element(bounds.lower_by_depth.begin(), bounds.lower_by_depth.end());
    bounds.upper = bounds.upper_by_depth.back();
    for (std::size_t j = 1; j < bounds.upper_by_depth.size(); ++j)
        if (bounds.upper_by_depth[j] > bounds.upper_by_depth[j - 1] + 1e-12)
            bounds.upper_monotone = false;
    return bounds;
}

} // namespace evoflow
