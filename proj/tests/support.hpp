#pragma once

#include <random>
#include <vector>

#include "fibalg/algebra.hpp"
#include "fibalg/linalg.hpp"

namespace testing_support {

using namespace fibalg;

inline Matrix random_matrix(std::mt19937_64& rng, PrimeField f, std::size_t rows, std::size_t cols, double density = 0.5) {
    std::uniform_real_distribution<double> coin(0, 1);
    std::uniform_int_distribution<Residue> val(1, f.prime() - 1);
    std::vector<SparseVec> c(cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::uint32_t i = 0; i < rows; ++i)
            if (coin(rng) < density) c[j].emplace_back(i, val(rng));
    return Matrix::from_columns(f, rows, c);
}

inline Vector random_vector(std::mt19937_64& rng, PrimeField f, std::size_t n) {
    std::uniform_int_distribution<Residue> val(0, f.prime() - 1);
    Vector v(n);
    for (auto& x : v) x = val(rng);
    return v;
}

/// Random homogeneous element of degree n (possibly zero).
inline Element random_element(std::mt19937_64& rng, const FreeCDGA& a, int n, int max_terms = 3) {
    const auto& b = a.basis(n);
    Element e;
    if (b.size() == 0) return e;
    std::uniform_int_distribution<std::size_t> pick(0, b.size() - 1);
    std::uniform_int_distribution<Residue> val(1, a.field().prime() - 1);
    std::uniform_int_distribution<int> count(1, max_terms);
    int k = count(rng);
    for (int i = 0; i < k; ++i) e = a.add(e, Element::of(b.monomials[pick(rng)], val(rng)));
    return e;
}

/// Free model with differentials given as text, e.g. {{"y", "x^3"}}.
inline FreeCDGA make_model(Residue p, std::vector<Generator> gens, int N,
                           std::vector<std::pair<std::string, std::string>> d = {}) {
    GeneratorSet set(std::move(gens));
    FreeCDGA shell(PrimeField(p), set, {}, N);
    std::vector<Element> diff(set.size());
    for (auto& [name, expr] : d) diff[set.index_of(name)] = shell.parse(expr);
    return FreeCDGA(PrimeField(p), set, diff, N);
}

/// Dimensions of the free graded-commutative (or divided-power) algebra on
/// generators of the given degrees, counted by expanding the product of
/// (1 + t^d) for odd d and 1/(1 - t^d) for even d.
inline std::vector<std::size_t> free_dims(const std::vector<int>& degrees, int top) {
    std::vector<std::size_t> c(top + 1, 0);
    c[0] = 1;
    for (int d : degrees) {
        if (d % 2) {
            for (int n = top; n >= d; --n) c[n] += c[n - d];
        } else {
            for (int n = d; n <= top; ++n) c[n] += c[n - d];
        }
    }
    return c;
}

}  // namespace testing_support
