#pragma once

// Hand-rolled reference implementations used as independent oracles by the
// unit and acceptance tests. They deliberately avoid the library's code
// paths: digit arithmetic works on explicit digit vectors, the child kernel
// is evaluated by direct mask enumeration, and mixing by the full triple
// sum over parent pairs.

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// --- digit arithmetic -------------------------------------------------------

inline std::vector<int> digits_of(std::uint64_t x, int d, int l) {
    std::vector<int> out(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i) {
        out[static_cast<std::size_t>(i)] = static_cast<int>(x % static_cast<std::uint64_t>(d));
        x /= static_cast<std::uint64_t>(d);
    }
    return out;
}

inline std::uint64_t value_of(const std::vector<int>& digits, int d) {
    std::uint64_t value = 0;
    for (std::size_t i = digits.size(); i-- > 0;)
        value = value * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(digits[i]);
    return value;
}

inline std::uint64_t add(std::uint64_t a, std::uint64_t b, int d, int l) {
    auto x = digits_of(a, d, l), y = digits_of(b, d, l);
    for (int i = 0; i < l; ++i) x[static_cast<std::size_t>(i)] =
        (x[static_cast<std::size_t>(i)] + y[static_cast<std::size_t>(i)]) % d;
    return value_of(x, d);
}

inline std::uint64_t mul(std::uint64_t a, std::uint64_t b, int d, int l) {
    auto x = digits_of(a, d, l), y = digits_of(b, d, l);
    for (int i = 0; i < l; ++i) x[static_cast<std::size_t>(i)] =
        (x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)]) % d;
    return value_of(x, d);
}

inline std::uint64_t sub(std::uint64_t a, std::uint64_t b, int d, int l) {
    auto x = digits_of(a, d, l), y = digits_of(b, d, l);
    for (int i = 0; i < l; ++i) x[static_cast<std::size_t>(i)] =
        (x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)] % d + d) % d;
    return value_of(x, d);
}

// --- crossover mask distributions -------------------------------------------

// All 2^l binary masks, each with weight 2^-l.
inline std::vector<std::pair<std::uint64_t, double>> uniform_masks(int l) {
    const std::uint64_t count = 1ull << l;
    std::vector<std::pair<std::uint64_t, double>> masks;
    for (std::uint64_t s = 0; s < count; ++s)
        masks.emplace_back(s, 1.0 / static_cast<double>(count));
    return masks;
}

// Proper prefix masks (ones in positions 0..c-1 for cut c = 1..l-1), each
// with weight 1/(l-1); the all-ones mask alone when l == 1.
inline std::vector<std::pair<std::uint64_t, double>> one_point_masks(int l) {
    std::vector<std::pair<std::uint64_t, double>> masks;
    if (l == 1) {
        masks.emplace_back(1ull, 1.0);
        return masks;
    }
    for (int cut = 1; cut < l; ++cut)
        masks.emplace_back((1ull << cut) - 1ull, 1.0 / static_cast<double>(l - 1));
    return masks;
}

// --- child kernel by direct mask enumeration --------------------------------

// Probability parents (u, v) produce child w: draw a binary mask s from the
// given distribution, take digit i from u where s_i = 1 and from v where
// s_i = 0, then mutate each digit independently (stay with probability 1-q,
// move to each of the d-1 other values with probability q/(d-1)). The mask
// is over genome *digits*, so masks index positions in base-d strings too.
inline double child_kernel(std::uint64_t u, std::uint64_t v, std::uint64_t w, int d, int l,
                           double q, const std::vector<std::pair<std::uint64_t, double>>& masks) {
    const auto du = digits_of(u, d, l), dv = digits_of(v, d, l), dw = digits_of(w, d, l);
    double total = 0.0;
    for (const auto& [mask, weight] : masks) {
        double prob = weight;
        for (int i = 0; i < l; ++i) {
            const int from = (mask >> i) & 1ull ? du[static_cast<std::size_t>(i)]
                                                : dv[static_cast<std::size_t>(i)];
            prob *= from == dw[static_cast<std::size_t>(i)] ? 1.0 - q
                                                            : q / static_cast<double>(d - 1);
        }
        total += prob;
    }
    return total;
}

inline double sym_kernel(std::uint64_t u, std::uint64_t v, std::uint64_t w, int d, int l, double q,
                         const std::vector<std::pair<std::uint64_t, double>>& masks) {
    return 0.5 * (child_kernel(u, v, w, d, l, q, masks) + child_kernel(v, u, w, d, l, q, masks));
}

// --- mixing by the full triple sum ------------------------------------------

inline Eigen::VectorXd mix_triple_sum(const Eigen::VectorXd& p, int d, int l, double q,
                                      const std::vector<std::pair<std::uint64_t, double>>& masks) {
    const auto n = static_cast<std::uint64_t>(p.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p.size());
    for (std::uint64_t w = 0; w < n; ++w) {
        double acc = 0.0;
        for (std::uint64_t u = 0; u < n; ++u)
            for (std::uint64_t v = 0; v < n; ++v)
                acc += p(static_cast<Eigen::Index>(u)) * p(static_cast<Eigen::Index>(v)) *
                       sym_kernel(u, v, w, d, l, q, masks);
        out(static_cast<Eigen::Index>(w)) = acc;
    }
    return out;
}

} // namespace oracle
