#include "evoflow/genome_ring.hpp"

#include <limits>
#include <string>

namespace evoflow {

namespace {

std::uint64_t checked_pow(int d, int l, std::uint64_t cap) {
    std::uint64_t n = 1;
    for (int i = 0; i < l; ++i) {
        if (n > cap / static_cast<std::uint64_t>(d)) {
            throw ResourceError("GenomeSpace: d^l = " + std::to_string(d) + "^" +
                                std::to_string(l) + " exceeds the vector cap " +
                                std::to_string(cap));
        }
        n *= static_cast<std::uint64_t>(d);
    }
    return n;
}

void require_same_space(const Genome& u, const Genome& v, const char* op) {
    if (u.space() != v.space()) {
        throw UsageError(std::string(op) + ": operands belong to different genome spaces");
    }
}

} // namespace

GenomeSpace::GenomeSpace(int d, int l, SpaceCaps caps) : d_(d), l_(l), caps_(caps) {
    if (d < 2) throw UsageError("GenomeSpace: alphabet cardinality d must be >= 2");
    if (l < 1) throw UsageError("GenomeSpace: string length l must be >= 1");
    n_ = checked_pow(d, l, caps_.vector_cap);
}

void GenomeSpace::require_matrix_ok(const char* what) const {
    if (n_ > caps_.matrix_cap) {
        throw ResourceError(std::string(what) + ": space size " + std::to_string(n_) +
                            " exceeds the dense-matrix cap " + std::to_string(caps_.matrix_cap));
    }
}

Genome::Genome(const GenomeSpace& space, std::uint64_t value) : space_(space), value_(value) {
    if (value >= space.size()) {
        throw UsageError("Genome: value " + std::to_string(value) + " outside [0, " +
                         std::to_string(space.size()) + ")");
    }
}

std::vector<int> Genome::digits() const {
    std::vector<int> out(static_cast<std::size_t>(space_.l()));
    std::uint64_t v = value_;
    const auto d = static_cast<std::uint64_t>(space_.d());
    for (int i = 0; i < space_.l(); ++i) {
        out[static_cast<std::size_t>(i)] = static_cast<int>(v % d);
        v /= d;
    }
    return out;
}

int Genome::digit(int i) const {
    std::uint64_t v = value_;
    const auto d = static_cast<std::uint64_t>(space_.d());
    for (int k = 0; k < i; ++k) v /= d;
    return static_cast<int>(v % d);
}

int Genome::nonzero_count() const {
    int count = 0;
    std::uint64_t v = value_;
    const auto d = static_cast<std::uint64_t>(space_.d());
    while (v != 0) {
        if (v % d != 0) ++count;
        v /= d;
    }
    return count;
}

bool Genome::is_binary() const {
    std::uint64_t v = value_;
    const auto d = static_cast<std::uint64_t>(space_.d());
    while (v != 0) {
        if (v % d > 1) return false;
        v /= d;
    }
    return true;
}

Genome genome_from_digits(const GenomeSpace& space, const std::vector<int>& digits) {
    if (digits.size() != static_cast<std::size_t>(space.l())) {
        throw UsageError("genome_from_digits: expected " + std::to_string(space.l()) +
                         " digits, got " + std::to_string(digits.size()));
    }
    std::uint64_t v = 0;
    for (int i = space.l() - 1; i >= 0; --i) {
        int dig = digits[static_cast<std::size_t>(i)];
        if (dig < 0 || dig >= space.d()) {
            throw UsageError("genome_from_digits: digit " + std::to_string(dig) +
                             " at position " + std::to_string(i) + " outside [0, " +
                             std::to_string(space.d()) + ")");
        }
        v = v * static_cast<std::uint64_t>(space.d()) + static_cast<std::uint64_t>(dig);
    }
    return Genome(space, v);
}

namespace {

// Digit-wise combine of two values in the same space.
template <typename F>
std::uint64_t digitwise(const GenomeSpace& sp, std::uint64_t a, std::uint64_t b, F f) {
    const auto d = static_cast<std::uint64_t>(sp.d());
    std::uint64_t out = 0;
    std::uint64_t place = 1;
    for (int i = 0; i < sp.l(); ++i) {
        const int da = static_cast<int>(a % d);
        const int db = static_cast<int>(b % d);
        out += static_cast<std::uint64_t>(f(da, db)) * place;
        a /= d;
        b /= d;
        place *= d;
    }
    return out;
}

} // namespace

Genome ring_add(const Genome& u, const Genome& v) {
    require_same_space(u, v, "ring_add");
    const int d = u.space().d();
    return Genome(u.space(), digitwise(u.space(), u.value(), v.value(),
                                       [d](int a, int b) { return (a + b) % d; }));
}

Genome ring_mul(const Genome& u, const Genome& v) {
    require_same_space(u, v, "ring_mul");
    const int d = u.space().d();
    return Genome(u.space(), digitwise(u.space(), u.value(), v.value(),
                                       [d](int a, int b) { return (a * b) % d; }));
}

Genome ring_sub(const Genome& u, const Genome& v) {
    require_same_space(u, v, "ring_sub");
    const int d = u.space().d();
    return Genome(u.space(), digitwise(u.space(), u.value(), v.value(),
                                       [d](int a, int b) { return ((a - b) % d + d) % d; }));
}

Genome negate(const Genome& s) { return ring_sub(zero(s.space()), s); }

Genome complement(const Genome& s) { return ring_sub(all_ones(s.space()), s); }

int nonzero_count(const Genome& s) { return s.nonzero_count(); }

Genome all_ones(const GenomeSpace& space) {
    std::uint64_t v = 0;
    std::uint64_t place = 1;
    for (int i = 0; i < space.l(); ++i) {
        v += place;
        place *= static_cast<std::uint64_t>(space.d());
    }
    return Genome(space, v);
}

Genome zero(const GenomeSpace& space) { return Genome(space, 0); }

Injection injection_of(const Genome& s) {
    const int l = s.space().l();
    std::vector<int> positions;
    const auto digits = s.digits();
    for (int i = 0; i < l; ++i) {
        if (digits[static_cast<std::size_t>(i)] != 0) positions.push_back(i);
    }
    const int m = static_cast<int>(positions.size());
    Eigen::MatrixXi mat = Eigen::MatrixXi::Zero(l, m);
    for (int j = 0; j < m; ++j) mat(positions[static_cast<std::size_t>(j)], j) = 1;
    return Injection{s, m, std::move(positions), std::move(mat)};
}

Genome embed(const Genome& s, std::uint64_t j) {
    const Injection inj = injection_of(s);
    const auto d = static_cast<std::uint64_t>(s.space().d());
    std::uint64_t bound = 1;
    for (int k = 0; k < inj.m; ++k) bound *= d;
    if (j >= bound) {
        throw UsageError("embed: j = " + std::to_string(j) + " outside [0, d^m) with m = " +
                         std::to_string(inj.m));
    }
    std::vector<int> digits(static_cast<std::size_t>(s.space().l()), 0);
    for (int k = 0; k < inj.m; ++k) {
        digits[static_cast<std::size_t>(inj.positions[static_cast<std::size_t>(k)])] =
            static_cast<int>(j % d);
        j /= d;
    }
    return genome_from_digits(s.space(), digits);
}

std::pair<Genome, Genome> binary_decompose(const Genome& i, const Genome& s) {
    require_same_space(i, s, "binary_decompose");
    if (!s.is_binary()) {
        throw UsageError("binary_decompose: mask " + std::to_string(s.value()) +
                         " is not binary");
    }
    return {ring_mul(i, s), ring_mul(i, complement(s))};
}

} // namespace evoflow
