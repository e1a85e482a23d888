#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fibalg {

using Residue = std::uint32_t;

bool is_prime(std::uint64_t n);

/// Arithmetic in F_p. Values are canonical residues 0..p-1.
class PrimeField {
public:
    PrimeField() = default;
    explicit PrimeField(std::uint32_t p);

    std::uint32_t prime() const { return p_; }

    Residue reduce(std::int64_t v) const;
    Residue add(Residue a, Residue b) const {
        std::uint32_t s = a + b;
        return s >= p_ ? s - p_ : s;
    }
    Residue sub(Residue a, Residue b) const { return a >= b ? a - b : a + p_ - b; }
    Residue neg(Residue a) const { return a == 0 ? 0 : p_ - a; }
    Residue mul(Residue a, Residue b) const {
        return static_cast<Residue>(static_cast<std::uint64_t>(a) * b % p_);
    }
    Residue inv(Residue a) const;
    Residue pow(Residue a, std::uint64_t e) const;
    /// (-1)^k as a residue.
    Residue sign(long long k) const { return (k % 2 == 0) ? 1 : p_ - 1; }
    /// Symmetric representative in (-p/2, p/2], for printing.
    long long symmetric(Residue a) const {
        return a > p_ / 2 ? static_cast<long long>(a) - p_ : static_cast<long long>(a);
    }
    /// binom(n, k) mod p by Lucas' theorem.
    Residue binomial(std::uint64_t n, std::uint64_t k) const;

    bool operator==(const PrimeField& o) const { return p_ == o.p_; }

private:
    std::uint32_t p_ = 0;
};

/// Sparse vector over F_p: strictly increasing indices, nonzero values.
using SparseVec = std::vector<std::pair<std::uint32_t, Residue>>;
/// Dense vector over F_p.
using Vector = std::vector<Residue>;

/// y += a * x
void axpy(const PrimeField& f, SparseVec& y, Residue a, const SparseVec& x);
SparseVec scaled(const PrimeField& f, const SparseVec& x, Residue a);
Residue entry(const SparseVec& v, std::uint32_t index);
SparseVec to_sparse(const Vector& v);
Vector to_dense(const SparseVec& v, std::size_t dim);

class MathError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fibalg
