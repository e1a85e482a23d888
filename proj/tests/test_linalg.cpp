#include <random>

#include "doctest.h"
#include "fibalg/linalg.hpp"
#include "support.hpp"

using namespace fibalg;
using testing_support::random_matrix;
using testing_support::random_vector;

namespace {

// Brute force over all of F_p^n; only for tiny n.
std::vector<Vector> all_vectors(PrimeField f, std::size_t n) {
    std::vector<Vector> out{Vector(n, 0)};
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Vector> next;
        for (const auto& v : out)
            for (Residue c = 0; c < f.prime(); ++c) {
                Vector w = v;
                w[i] = c;
                next.push_back(w);
            }
        out = next;
    }
    return out;
}

}  // namespace

TEST_SUITE("fplinalg") {

TEST_CASE("field arithmetic and binomials") {
    PrimeField f(5);
    CHECK(f.mul(3, 4) == 2);
    CHECK(f.inv(2) == 3);
    CHECK(f.binomial(2, 1) == 2);
    CHECK(f.binomial(5, 2) == 0);
    CHECK(f.binomial(6, 1) == 1);  // Lucas: (1,1) over (0,1)
    CHECK(f.symmetric(4) == -1);
    CHECK_THROWS_AS(PrimeField(9), std::invalid_argument);
    PrimeField g(7);
    // Pascal's rule as an independent check of the Lucas reduction
    for (std::uint64_t n = 1; n < 60; ++n)
        for (std::uint64_t k = 1; k < n; ++k)
            CHECK(g.binomial(n, k) == g.add(g.binomial(n - 1, k - 1), g.binomial(n - 1, k)));
}

TEST_CASE("rank examples") {
    CHECK(rank(Matrix(PrimeField(5), 3, 3)) == 0);
    CHECK(rank(Matrix::identity(PrimeField(3), 4)) == 4);
    CHECK(rank(Matrix::from_rows(PrimeField(5), {{1, 2}, {2, 4}})) == 1);
    CHECK(rank(Matrix::from_rows(PrimeField(7), {{1, 2}, {2, 4}})) == 1);
    CHECK(rank(Matrix::from_rows(PrimeField(3), {{1, 2}, {2, 1}})) == 1);
    CHECK(rank(Matrix::from_rows(PrimeField(5), {{1, 2}, {2, 1}})) == 2);
}

TEST_CASE("solve examples") {
    PrimeField f3(3);
    Vector t{1, 2, 0};
    CHECK(*solve(Matrix::identity(f3, 3), t) == t);
    CHECK_FALSE(solve(Matrix(f3, 2, 2), Vector{1, 0}).has_value());

    Matrix m = Matrix::from_rows(f3, {{1, 1}, {0, 0}});
    auto x = solve(m, Vector{2, 0});
    REQUIRE(x.has_value());
    CHECK(*x == Vector{2, 0});
    // enumerate all 9 candidates: exactly those with x0 + x1 = 2, and the one with x1 = 0 is ours
    int count = 0;
    for (const auto& v : all_vectors(f3, 2)) {
        if (m.apply(v) == Vector{2, 0}) {
            ++count;
            if (v[1] == 0) CHECK(v == *x);
        }
    }
    CHECK(count == 3);
}

TEST_CASE("kernel examples") {
    PrimeField f5(5);
    CHECK(kernel_basis(Matrix::identity(f5, 3)).empty());
    auto z = kernel_basis(Matrix(f5, 2, 2));
    REQUIRE(z.size() == 2);
    CHECK(to_dense(z[0], 2) == Vector{1, 0});
    CHECK(to_dense(z[1], 2) == Vector{0, 1});

    Matrix m = Matrix::from_rows(f5, {{1, 2}});
    auto k = kernel_basis(m);
    REQUIRE(k.size() == 1);
    CHECK(to_dense(k[0], 2) == Vector{3, 1});
    int zeros = 0;
    for (const auto& v : all_vectors(f5, 2))
        if (m.apply(v) == Vector{0}) ++zeros;
    CHECK(zeros == 5);
}

TEST_CASE("homology examples") {
    PrimeField f(5);
    // all-zero differentials
    ComplexSlice before{1, {}, Matrix(f, 3, 2)};
    ComplexSlice at{2, {}, Matrix(f, 4, 3)};
    ComplexSlice after{3, {}, Matrix(f, 0, 4)};
    CHECK(homology(before, at, after).betti() == 3);

    // exact: identity in, zero out
    ComplexSlice in{0, {}, Matrix::identity(f, 2)};
    ComplexSlice mid{1, {}, Matrix(f, 1, 2)};
    ComplexSlice out{2, {}, Matrix(f, 0, 1)};
    CHECK(homology(in, mid, out).betti() == 0);

    // Koszul complex F_p[x] ⊗ Λ(u), |x| = 2, |u| = 3, du = x, chain grading.
    // Degree 2 is spanned by x, degree 3 by u, degree 1 is empty.
    ComplexSlice k3{3, {"u"}, Matrix::from_rows(f, {{1}})};
    ComplexSlice k2{2, {"x"}, Matrix(f, 0, 1)};
    ComplexSlice k1{1, {}, Matrix(f, 0, 0)};
    auto h = homology(k3, k2, k1);
    CHECK(h.betti() == 0);
    CHECK(h.is_boundary({{0, 1}}));

    // d² != 0 is rejected
    ComplexSlice bad_in{0, {}, Matrix::identity(f, 1)};
    ComplexSlice bad_at{1, {}, Matrix::identity(f, 1)};
    ComplexSlice bad_out{2, {}, Matrix(f, 0, 1)};
    CHECK_THROWS_AS(homology(bad_in, bad_at, bad_out), MathError);
}

TEST_CASE("class_of reproduces coordinates") {
    PrimeField f(7);
    // C_1 = F^3 with d_in spanning e0 + e1 and zero outgoing map
    Matrix din = Matrix::from_rows(f, {{1}, {1}, {0}});
    auto h = homology({0, {}, din}, {1, {}, Matrix(f, 0, 3)}, {2, {}, Matrix(f, 0, 0)});
    REQUIRE(h.betti() == 2);
    for (std::size_t i = 0; i < h.betti(); ++i) {
        auto c = h.class_of(h.representatives()[i]);
        CHECK(c == SparseVec{{static_cast<std::uint32_t>(i), 1}});
    }
    // e0 - e1 minus a boundary still has well-defined coordinates
    SparseVec v{{0, 2}, {1, 3}};
    auto c = h.class_of(v);
    SparseVec recon;
    for (auto [i, a] : c) axpy(f, recon, a, h.representatives()[i]);
    axpy(f, recon, f.neg(1), v);
    CHECK(h.is_boundary(recon));
}

TEST_CASE("property: rank plus nullity") {
    std::mt19937_64 rng(11);
    for (Residue p : {3u, 5u, 7u, 11u}) {
        PrimeField f(p);
        for (int trial = 0; trial < 40; ++trial) {
            std::size_t r = rng() % 9, c = rng() % 9;
            Matrix m = random_matrix(rng, f, r, c, 0.4);
            auto k = kernel_basis(m);
            CHECK(rank(m) + k.size() == c);
            for (const auto& v : k) CHECK(m.apply(v).empty());
            CHECK(rank(m) == rank(m.transpose()));
        }
    }
}

TEST_CASE("property: solve inverts apply") {
    std::mt19937_64 rng(12);
    for (Residue p : {3u, 5u, 7u}) {
        PrimeField f(p);
        for (int trial = 0; trial < 40; ++trial) {
            std::size_t r = 1 + rng() % 7, c = 1 + rng() % 7;
            Matrix m = random_matrix(rng, f, r, c, 0.5);
            Vector v = random_vector(rng, f, c);
            Vector t = m.apply(v);
            auto x = solve(m, t);
            REQUIRE(x.has_value());
            CHECK(m.apply(*x) == t);
            Vector u = random_vector(rng, f, r);
            if (auto y = solve(m, u)) CHECK(m.apply(*y) == u);
        }
    }
}

TEST_CASE("property: deterministic solution has zero free variables") {
    std::mt19937_64 rng(13);
    PrimeField f(5);
    for (int trial = 0; trial < 30; ++trial) {
        Matrix m = random_matrix(rng, f, 4, 6, 0.5);
        Vector t = m.apply(random_vector(rng, f, 6));
        auto x = solve(m, t);
        REQUIRE(x.has_value());
        // free columns are those not in the span of the earlier ones
        EchelonBasis e(f, 4);
        for (std::size_t j = 0; j < 6; ++j) {
            bool pivot = e.insert(m.column(j));
            if (!pivot) CHECK((*x)[j] == 0);
        }
    }
}

TEST_CASE("property: zero complexes and cones") {
    std::mt19937_64 rng(14);
    PrimeField f(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::size_t> dims;
        for (int i = 0; i < 5; ++i) dims.push_back(rng() % 4);
        FiniteComplex c(f, Direction::cochain, dims);
        for (int n = 0; n < 4; ++n) c.set_differential(n, Matrix(f, dims[n + 1], dims[n]));
        for (int n = 0; n < 4; ++n) CHECK(c.betti(n) == dims[n]);

        // cone of the identity on a random complex-free space: C^0 = C^1 = F^k, d = id
        std::size_t k = 1 + rng() % 4;
        FiniteComplex cone(f, Direction::cochain, {k, k, 0});
        cone.set_differential(0, Matrix::identity(f, k));
        cone.set_differential(1, Matrix(f, 0, k));
        CHECK(cone.betti(0) == 0);
        CHECK(cone.betti(1) == 0);
    }
}

TEST_CASE("tensor complexes and swap") {
    PrimeField f(5);
    // a: F in degrees 0, 1 with d = id (acyclic); b: F in degree 0 and 2, zero d
    FiniteComplex a(f, Direction::cochain, {1, 1, 0, 0});
    a.set_differential(0, Matrix::identity(f, 1));
    a.set_differential(1, Matrix(f, 0, 1));
    a.set_differential(2, Matrix(f, 0, 0));
    FiniteComplex b(f, Direction::cochain, {1, 0, 1, 0});
    b.set_differential(0, Matrix(f, 0, 1));
    b.set_differential(1, Matrix(f, 1, 0));
    b.set_differential(2, Matrix(f, 0, 1));
    TensorComplex ab(a, b, 3), ba(b, a, 3);
    CHECK_FALSE(ab.complex().d_squared_failure().has_value());
    for (int n = 0; n < 3; ++n) CHECK(ab.complex().betti(n) == 0);
    auto tau = swap_map(ab, ba);
    CHECK_FALSE(chain_map_failure(ab.complex(), ba.complex(), tau).has_value());
    auto back = compose(swap_map(ba, ab), tau);
    for (int n = 0; n <= 3; ++n) CHECK(back.at(n) == Matrix::identity(f, ab.complex().dim(n)));
}

}  // TEST_SUITE
