#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fibalg/field.hpp"

namespace fibalg {

/// Sparse column-stored matrix over F_p. Column j is the image of basis vector j.
class Matrix {
public:
    Matrix() = default;
    Matrix(PrimeField field, std::size_t rows, std::size_t cols);

    static Matrix identity(PrimeField field, std::size_t n);
    /// Entries given row-major; values are reduced mod p.
    static Matrix from_rows(PrimeField field, const std::vector<std::vector<long long>>& rows);
    static Matrix from_columns(PrimeField field, std::size_t rows, std::vector<SparseVec> columns);

    const PrimeField& field() const { return field_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return columns_.size(); }
    const SparseVec& column(std::size_t j) const { return columns_.at(j); }
    const std::vector<SparseVec>& columns() const { return columns_; }

    Residue at(std::size_t i, std::size_t j) const;
    void set_column(std::size_t j, SparseVec v);

    Matrix transpose() const;
    SparseVec apply(const SparseVec& x) const;
    Vector apply(const Vector& x) const;
    bool is_zero() const;

    friend bool operator==(const Matrix& a, const Matrix& b);

private:
    PrimeField field_;
    std::size_t rows_ = 0;
    std::vector<SparseVec> columns_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);

/// Row-echelon basis of a subspace of F_p^dim. Every stored row has leading
/// coefficient 1 at a distinct pivot column.
class EchelonBasis {
public:
    EchelonBasis() = default;
    EchelonBasis(PrimeField field, std::size_t dim);

    /// Inserts v; returns false when v already lies in the span.
    bool insert(SparseVec v);
    /// Canonical representative of v modulo the span (zero on every pivot column).
    SparseVec reduce(SparseVec v) const;
    bool contains(const SparseVec& v) const { return reduce(v).empty(); }

    std::size_t rank() const { return rows_.size(); }
    std::size_t dim() const { return pivot_row_.size(); }
    const PrimeField& field() const { return field_; }
    bool is_pivot(std::uint32_t col) const { return pivot_row_.at(col) >= 0; }
    /// Rows in reduced row-echelon form, sorted by pivot column.
    std::vector<SparseVec> reduced_rows() const;

private:
    PrimeField field_;
    std::vector<SparseVec> rows_;
    std::vector<std::int64_t> pivot_row_;
};

/// Echelon basis that remembers how each row was built from the inserted
/// vectors, so that membership tests return explicit coefficients.
class TrackedEchelon {
public:
    TrackedEchelon(PrimeField field, std::size_t dim);

    /// Inserts the next generator (numbered in insertion order).
    bool insert(const SparseVec& v);
    /// Coefficients c with sum c_i * generator_i == v, or none.
    std::optional<SparseVec> express(const SparseVec& v) const;
    std::size_t generator_count() const { return count_; }
    std::size_t rank() const { return rows_.size(); }

private:
    SparseVec reduce_tracked(SparseVec v, SparseVec& combination) const;

    PrimeField field_;
    std::size_t count_ = 0;
    std::vector<SparseVec> rows_;
    std::vector<SparseVec> combos_;
    std::vector<std::int64_t> pivot_row_;
};

std::size_t rank(const Matrix& m);
/// Solution with every free variable set to zero (least-index pivoting), or none.
std::optional<SparseVec> solve(const Matrix& m, const SparseVec& target);
std::optional<Vector> solve(const Matrix& m, const Vector& target);
/// One vector per non-pivot column of the RREF, that column set to 1.
std::vector<SparseVec> kernel_basis(const Matrix& m);
EchelonBasis column_space(const Matrix& m);

// ---------------------------------------------------------------------------
// Degree-wise finite complexes

enum class Direction : int { chain = -1, cochain = +1 };

inline int step(Direction d) { return static_cast<int>(d); }

struct ComplexSlice {
    int degree = 0;
    std::vector<std::string> basis_labels;
    Matrix d_out;
};

/// Homology at one degree with deterministic representatives.
class HomologyData {
public:
    HomologyData() = default;
    HomologyData(PrimeField field, std::size_t dim, std::vector<SparseVec> cycles, EchelonBasis boundaries);

    std::size_t betti() const { return representatives_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<SparseVec>& representatives() const { return representatives_; }
    const std::vector<SparseVec>& cycles() const { return cycles_; }
    bool is_boundary(const SparseVec& v) const { return boundaries_.contains(v); }
    /// Coordinates of a cycle's class with respect to the representatives.
    SparseVec class_of(const SparseVec& cycle) const;

private:
    PrimeField field_;
    std::size_t dim_ = 0;
    std::vector<SparseVec> cycles_;
    std::vector<SparseVec> representatives_;
    EchelonBasis boundaries_;
    std::optional<TrackedEchelon> reps_;
};

/// `before.d_out` lands in `at`; `at.d_out` lands in `after`.
HomologyData homology(const ComplexSlice& before, const ComplexSlice& at, const ComplexSlice& after);

/// A complex with finite-dimensional pieces in degrees 0..top.
/// differential[n] : C_n -> C_{n+dir}; absent when the target lies above top.
class FiniteComplex {
public:
    FiniteComplex() = default;
    FiniteComplex(PrimeField field, Direction dir, std::vector<std::size_t> dims);

    void set_differential(int n, Matrix d);

    const PrimeField& field() const { return field_; }
    Direction direction() const { return dir_; }
    int top() const { return static_cast<int>(dims_.size()) - 1; }
    std::size_t dim(int n) const { return (n < 0 || n > top()) ? 0 : dims_[n]; }
    bool has_differential(int n) const;
    /// d_n : C_n -> C_{n+dir} (zero map when the target is below degree 0).
    Matrix differential(int n) const;
    /// Incoming differential into degree n.
    Matrix incoming(int n) const;
    bool has_homology(int n) const;
    std::size_t betti(int n) const;
    HomologyData homology(int n) const;
    std::vector<SparseVec> cycles(int n) const;
    EchelonBasis boundaries(int n) const;
    /// Degrees where d∘d is defined and nonzero.
    std::optional<int> d_squared_failure() const;

private:
    PrimeField field_;
    Direction dir_ = Direction::chain;
    std::vector<std::size_t> dims_;
    std::vector<std::optional<Matrix>> d_;
};

/// A family of matrices f_n : S_n -> T_{n+shift}.
struct LinearMapPerDegree {
    int shift = 0;
    std::vector<Matrix> maps;  // indexed by source degree

    int top() const { return static_cast<int>(maps.size()) - 1; }
    const Matrix& at(int n) const { return maps.at(n); }
};

LinearMapPerDegree operator-(const LinearMapPerDegree& a, const LinearMapPerDegree& b);
LinearMapPerDegree compose(const LinearMapPerDegree& outer, const LinearMapPerDegree& inner);

/// Checks d_T f = f d_S in every degree where both sides are defined.
std::optional<int> chain_map_failure(const FiniteComplex& source, const FiniteComplex& target,
                                     const LinearMapPerDegree& f);
/// Whether H_n(f) is an isomorphism (requires homology at n on both sides).
bool induces_isomorphism(const FiniteComplex& source, const FiniteComplex& target,
                         const LinearMapPerDegree& f, int n);

/// Tensor product of two complexes truncated at `top`, with
/// d(x⊗y) = dx⊗y + (-1)^{|x|} x⊗dy.
class TensorComplex {
public:
    TensorComplex(const FiniteComplex& a, const FiniteComplex& b, int top);

    const FiniteComplex& complex() const { return complex_; }
    /// Index of a⊗b with |a| = i, |b| = j inside degree i + j.
    std::uint32_t index(int i, int j, std::size_t a, std::size_t b) const;
    struct Split {
        int left_degree;
        std::size_t left;
        std::size_t right;
    };
    Split split(int n, std::uint32_t idx) const;
    const FiniteComplex& left() const { return a_; }
    const FiniteComplex& right() const { return b_; }

private:
    FiniteComplex a_;
    FiniteComplex b_;
    std::vector<std::vector<std::size_t>> offsets_;  // offsets_[n][i]
    FiniteComplex complex_;
};

/// Sign-twisting swap τ(x⊗y) = (-1)^{|x||y|} y⊗x between A⊗B and B⊗A.
LinearMapPerDegree swap_map(const TensorComplex& ab, const TensorComplex& ba);
/// f ⊗ g for degree-0 maps, from (S1⊗S2) to (T1⊗T2).
LinearMapPerDegree tensor_maps(const TensorComplex& source, const TensorComplex& target,
                               const LinearMapPerDegree& f, const LinearMapPerDegree& g);
LinearMapPerDegree identity_map(const FiniteComplex& c);
/// Reindexing (A⊗B)⊗C -> A⊗(B⊗C).
LinearMapPerDegree associator(const TensorComplex& ab_c, const TensorComplex& ab,
                              const TensorComplex& a_bc, const TensorComplex& bc);

}  // namespace fibalg
