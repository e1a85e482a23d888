#include "fibalg/field.hpp"

#include <algorithm>

namespace fibalg {

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

PrimeField::PrimeField(std::uint32_t p) : p_(p) {
    if (!is_prime(p)) throw std::invalid_argument("modulus " + std::to_string(p) + " is not prime");
    if (p >= (1u << 31)) throw std::invalid_argument("modulus must be below 2^31");
}

Residue PrimeField::reduce(std::int64_t v) const {
    std::int64_t r = v % static_cast<std::int64_t>(p_);
    if (r < 0) r += p_;
    return static_cast<Residue>(r);
}

Residue PrimeField::pow(Residue a, std::uint64_t e) const {
    Residue result = 1 % p_;
    Residue base = a;
    while (e > 0) {
        if (e & 1) result = mul(result, base);
        base = mul(base, base);
        e >>= 1;
    }
    return result;
}

Residue PrimeField::inv(Residue a) const {
    if (a == 0) throw MathError("inverse of zero in F_" + std::to_string(p_));
    return pow(a, p_ - 2);
}

Residue PrimeField::binomial(std::uint64_t n, std::uint64_t k) const {
    if (k > n) return 0;
    Residue result = 1;
    while (n > 0 || k > 0) {
        std::uint64_t ni = n % p_, ki = k % p_;
        if (ki > ni) return 0;
        // small binomial by factorial cancellation
        Residue num = 1, den = 1;
        for (std::uint64_t j = 0; j < ki; ++j) {
            num = mul(num, static_cast<Residue>((ni - j) % p_));
            den = mul(den, static_cast<Residue>((j + 1) % p_));
        }
        result = mul(result, mul(num, inv(den)));
        n /= p_;
        k /= p_;
    }
    return result;
}

void axpy(const PrimeField& f, SparseVec& y, Residue a, const SparseVec& x) {
    if (a == 0 || x.empty()) return;
    SparseVec out;
    out.reserve(y.size() + x.size());
    auto iy = y.begin();
    auto ix = x.begin();
    while (iy != y.end() || ix != x.end()) {
        if (ix == x.end() || (iy != y.end() && iy->first < ix->first)) {
            out.push_back(*iy++);
        } else if (iy == y.end() || ix->first < iy->first) {
            out.emplace_back(ix->first, f.mul(a, ix->second));
            ++ix;
        } else {
            Residue v = f.add(iy->second, f.mul(a, ix->second));
            if (v != 0) out.emplace_back(iy->first, v);
            ++iy;
            ++ix;
        }
    }
    y = std::move(out);
}

SparseVec scaled(const PrimeField& f, const SparseVec& x, Residue a) {
    SparseVec out;
    if (a == 0) return out;
    out.reserve(x.size());
    for (auto [i, v] : x) out.emplace_back(i, f.mul(a, v));
    return out;
}

Residue entry(const SparseVec& v, std::uint32_t index) {
    auto it = std::lower_bound(v.begin(), v.end(), index,
                               [](const auto& e, std::uint32_t i) { return e.first < i; });
    return (it != v.end() && it->first == index) ? it->second : 0;
}

SparseVec to_sparse(const Vector& v) {
    SparseVec out;
    for (std::uint32_t i = 0; i < v.size(); ++i)
        if (v[i] != 0) out.emplace_back(i, v[i]);
    return out;
}

Vector to_dense(const SparseVec& v, std::size_t dim) {
    Vector out(dim, 0);
    for (auto [i, x] : v) out.at(i) = x;
    return out;
}

}  // namespace fibalg
