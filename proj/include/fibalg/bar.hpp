#pragma once

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fibalg/algebra.hpp"
#include "fibalg/linalg.hpp"

namespace fibalg {

/// Basis element `index` of the degree-`degree` piece of a graded space.
struct Basis {
    int degree = 0;
    std::uint32_t index = 0;
    auto operator<=>(const Basis&) const = default;
};

/// Finite-dimensional graded space in degrees 0..top with a differential of
/// degree step(direction()).
class GradedSpace {
public:
    virtual ~GradedSpace() = default;
    virtual const PrimeField& field() const = 0;
    virtual Direction direction() const = 0;
    virtual int top() const = 0;
    virtual std::size_t dim(int n) const = 0;
    /// d of a basis element, in degree b.degree + dir; degrees outside 0..top give 0.
    virtual SparseVec differential(Basis b) const = 0;
    virtual std::string label(Basis b) const;

    FiniteComplex complex() const;
};

/// Connected augmented algebra: degree 0 is spanned by the unit (index 0).
class GradedAlgebra : public GradedSpace {
public:
    /// Product of basis elements, a vector in degree a.degree + b.degree.
    virtual SparseVec multiply(Basis a, Basis b) const = 0;
    SparseVec multiply(int i, const SparseVec& a, int j, const SparseVec& b) const;
};

/// Graded module; each concrete module supports the sides it needs.
class GradedModule : public GradedSpace {
public:
    /// m·a
    virtual SparseVec right_act(Basis m, Basis a) const;
    /// a·n
    virtual SparseVec left_act(Basis a, Basis n) const;
};

using AlgebraPtr = std::shared_ptr<const GradedAlgebra>;
using ModulePtr = std::shared_ptr<const GradedModule>;

/// View of a FreeCDGA in monomial bases. Chain orientation reads the same
/// degrees as lower degrees and needs a zero differential.
class FreeAlgebraData : public GradedAlgebra {
public:
    FreeAlgebraData(std::shared_ptr<const FreeCDGA> alg, Direction dir);

    const PrimeField& field() const override { return alg_->field(); }
    Direction direction() const override { return dir_; }
    int top() const override { return alg_->truncation(); }
    std::size_t dim(int n) const override;
    SparseVec differential(Basis b) const override;
    std::string label(Basis b) const override;
    SparseVec multiply(Basis a, Basis b) const override;
    using GradedAlgebra::multiply;
    const FreeCDGA& algebra() const { return *alg_; }

private:
    std::shared_ptr<const FreeCDGA> alg_;
    Direction dir_;
};

/// Indexing of pairs (x, y) with |x| + |y| = n, blocks ordered by |x|.
class PairIndex {
public:
    PairIndex() = default;
    PairIndex(const GradedSpace& a, const GradedSpace& b, int top);
    std::uint32_t index(Basis x, Basis y) const;
    std::pair<Basis, Basis> split(int n, std::uint32_t idx) const;
    std::size_t dim(int n) const { return n < 0 || n > top_ ? 0 : dims_[n]; }
    int top() const { return top_; }

private:
    int top_ = -1;
    std::vector<std::size_t> dims_;
    std::vector<std::vector<std::size_t>> offsets_;
    std::vector<std::size_t> right_dims_;
};

/// A ⊗ B with (a⊗b)(a'⊗b') = (-1)^{|b||a'|} aa'⊗bb'.
class TensorAlgebraData : public GradedAlgebra {
public:
    TensorAlgebraData(AlgebraPtr a, AlgebraPtr b);

    const PrimeField& field() const override { return a_->field(); }
    Direction direction() const override { return a_->direction(); }
    int top() const override { return pairs_.top(); }
    std::size_t dim(int n) const override { return pairs_.dim(n); }
    SparseVec differential(Basis b) const override;
    std::string label(Basis b) const override;
    SparseVec multiply(Basis x, Basis y) const override;
    using GradedAlgebra::multiply;

    std::uint32_t index(Basis a, Basis b) const { return pairs_.index(a, b); }
    std::pair<Basis, Basis> split(Basis x) const { return pairs_.split(x.degree, x.index); }
    const GradedAlgebra& left() const { return *a_; }
    const GradedAlgebra& right() const { return *b_; }

private:
    AlgebraPtr a_, b_;
    PairIndex pairs_;
};

/// An algebra regarded as a module over itself on both sides.
class AlgebraModule : public GradedModule {
public:
    explicit AlgebraModule(AlgebraPtr a) : a_(std::move(a)) {}
    const PrimeField& field() const override { return a_->field(); }
    Direction direction() const override { return a_->direction(); }
    int top() const override { return a_->top(); }
    std::size_t dim(int n) const override { return a_->dim(n); }
    SparseVec differential(Basis b) const override { return a_->differential(b); }
    std::string label(Basis b) const override { return a_->label(b); }
    SparseVec right_act(Basis m, Basis a) const override { return a_->multiply(m, a); }
    SparseVec left_act(Basis a, Basis n) const override { return a_->multiply(a, n); }

private:
    AlgebraPtr a_;
};

/// The ground field in degree 0; positive-degree elements act by zero.
class GroundModule : public GradedModule {
public:
    GroundModule(PrimeField f, Direction dir, int top) : f_(f), dir_(dir), top_(top) {}
    const PrimeField& field() const override { return f_; }
    Direction direction() const override { return dir_; }
    int top() const override { return top_; }
    std::size_t dim(int n) const override { return n == 0 ? 1 : 0; }
    SparseVec differential(Basis) const override { return {}; }
    std::string label(Basis) const override { return "1"; }
    SparseVec right_act(Basis m, Basis a) const override;
    SparseVec left_act(Basis a, Basis n) const override;

private:
    PrimeField f_;
    Direction dir_;
    int top_;
};

/// An algebra M made into an A-module through an algebra map f : A -> M.
class PulledBackModule : public GradedModule {
public:
    PulledBackModule(AlgebraPtr m, AlgebraPtr a, LinearMapPerDegree f);
    const PrimeField& field() const override { return m_->field(); }
    Direction direction() const override { return m_->direction(); }
    int top() const override { return m_->top(); }
    std::size_t dim(int n) const override { return m_->dim(n); }
    SparseVec differential(Basis b) const override { return m_->differential(b); }
    std::string label(Basis b) const override { return m_->label(b); }
    SparseVec right_act(Basis m, Basis a) const override;
    SparseVec left_act(Basis a, Basis n) const override;
    const GradedAlgebra& algebra() const { return *m_; }

private:
    AlgebraPtr m_, a_;
    LinearMapPerDegree f_;
};

/// M ⊗ P over A ⊗ B with (m⊗p)(a⊗b) = (-1)^{|p||a|} ma⊗pb and
/// (a⊗b)(n⊗q) = (-1)^{|b||n|} an⊗bq.
class TensorModule : public GradedModule {
public:
    TensorModule(ModulePtr m, ModulePtr p, std::shared_ptr<const TensorAlgebraData> ab);
    const PrimeField& field() const override { return m_->field(); }
    Direction direction() const override { return m_->direction(); }
    int top() const override { return pairs_.top(); }
    std::size_t dim(int n) const override { return pairs_.dim(n); }
    SparseVec differential(Basis b) const override;
    std::string label(Basis b) const override;
    SparseVec right_act(Basis mp, Basis a) const override;
    SparseVec left_act(Basis a, Basis nq) const override;

    std::uint32_t index(Basis x, Basis y) const { return pairs_.index(x, y); }
    std::pair<Basis, Basis> split(Basis x) const { return pairs_.split(x.degree, x.index); }
    const GradedModule& left() const { return *m_; }
    const GradedModule& right() const { return *p_; }

private:
    ModulePtr m_, p_;
    std::shared_ptr<const TensorAlgebraData> ab_;
    PairIndex pairs_;
};

// ---------------------------------------------------------------------------
// Bar words and the two-sided bar construction

/// m[sa_1|...|sa_k]n; letters record the unsuspended degree |a_i| >= 1.
struct BarWord {
    Basis left;
    std::vector<Basis> letters;
    Basis right;

    auto operator<=>(const BarWord& o) const {
        if (auto c = letters.size() <=> o.letters.size(); c != 0) return c;
        if (auto c = left <=> o.left; c != 0) return c;
        if (auto c = letters <=> o.letters; c != 0) return c;
        return right <=> o.right;
    }
    bool operator==(const BarWord&) const = default;
};

/// B(M;A;N) truncated at total degree top(). Degrees are those of the
/// chosen orientation: |sa| = |a| + 1 for chains, |a| - 1 for cochains.
class BarComplex {
public:
    BarComplex(ModulePtr m, AlgebraPtr a, ModulePtr n, int max_degree = -1);

    const PrimeField& field() const { return a_->field(); }
    Direction direction() const { return a_->direction(); }
    int top() const { return top_; }
    /// Report degree of the suspension of an algebra element of degree d.
    int suspended(int d) const { return d - step(direction()); }
    int degree(const BarWord& w) const;

    std::size_t dim(int n) const { return n < 0 || n > top_ ? 0 : words_[n].size(); }
    const std::vector<BarWord>& words(int n) const { return words_.at(n); }
    std::optional<std::uint32_t> find(const BarWord& w) const;
    std::uint32_t index_of(const BarWord& w) const;

    SparseVec d1(const BarWord& w) const;
    SparseVec d2(const BarWord& w) const;
    SparseVec d(const BarWord& w) const;
    Matrix d1_matrix(int n) const;
    Matrix d2_matrix(int n) const;
    Matrix d_matrix(int n) const;
    /// Complex with d = d1 + d2 in every degree whose target lies within 0..top.
    FiniteComplex complex() const;
    FiniteComplex complex_of(bool with_d1, bool with_d2) const;

    const GradedModule& left_module() const { return *m_; }
    const GradedAlgebra& algebra() const { return *a_; }
    const GradedModule& right_module() const { return *n_; }
    ModulePtr left_ptr() const { return m_; }
    AlgebraPtr algebra_ptr() const { return a_; }
    ModulePtr right_ptr() const { return n_; }

    std::string to_string(const BarWord& w) const;

private:
    ModulePtr m_;
    AlgebraPtr a_;
    ModulePtr n_;
    int top_;
    std::vector<std::vector<BarWord>> words_;
    std::vector<std::map<BarWord, std::uint32_t>> index_;
};

/// B(Ψ;φ;χ): m[sa_1|...]n -> Ψ(m)[sφ(a_1)|...]χ(n) for degree-0 maps.
LinearMapPerDegree bar_map(const BarComplex& source, const BarComplex& target, const LinearMapPerDegree& psi,
                           const LinearMapPerDegree& phi, const LinearMapPerDegree& chi);

/// Alexander–Whitney map B(M⊗P; A⊗B; N⊗Q) -> B(M;A;N) ⊗ B(P;B;Q).
/// `source` must be built over TensorModule / TensorAlgebraData objects.
LinearMapPerDegree alexander_whitney(const BarComplex& source, const BarComplex& left, const BarComplex& right,
                                     const TensorComplex& target);

/// Sign exponent ζ_i of the Alexander–Whitney term splitting after letter i.
long long aw_sign_exponent(std::size_t i, const std::vector<int>& a_degrees, const std::vector<int>& b_degrees,
                           int p_degree, int n_degree);

/// Coalgebra structure on B(M;A;N) from diagonals of A, M, N.
struct BarDiagonal {
    std::shared_ptr<const TensorAlgebraData> aa;
    std::shared_ptr<const TensorModule> mm, nn;
    std::shared_ptr<const BarComplex> doubled;  // B(M⊗M; A⊗A; N⊗N)
    std::shared_ptr<const TensorComplex> product;  // B ⊗ B
    LinearMapPerDegree delta;  // B -> B⊗B
    LinearMapPerDegree counit;  // B -> ground field
};

/// Diagonal maps: delta_a : A -> A⊗A, delta_m : M -> M⊗M, delta_n : N -> N⊗N
/// in the PairIndex bases of the tensor objects; eps_m, eps_n : M, N -> 𝕜.
/// Throws when the supplied diagonals are not counital or of wrong degree.
BarDiagonal bar_diagonal(std::shared_ptr<const BarComplex> bar, const LinearMapPerDegree& delta_a,
                         const LinearMapPerDegree& delta_m, const LinearMapPerDegree& eps_m,
                         const LinearMapPerDegree& delta_n, const LinearMapPerDegree& eps_n);

/// Degree in which (ε⊗1)Δ or (1⊗ε)Δ differs from the identity, if any.
std::optional<int> counit_failure(const BarComplex& bar, const BarDiagonal& diag);

/// Coproduct of a primitively generated free algebra (g ↦ g⊗1 + 1⊗g,
/// γ^k(w) ↦ Σ γ^i(w)⊗γ^{k-i}(w)) in the bases of `aa` = A⊗A.
LinearMapPerDegree primitive_coproduct(const FreeAlgebraData& a, const TensorAlgebraData& aa);
/// Augmentation of a connected graded space (identity in degree 0).
LinearMapPerDegree augmentation(const GradedSpace& s);
/// Ground field as a complex in degree 0 up to `top`.
FiniteComplex ground_complex(PrimeField f, Direction dir, int top);
LinearMapPerDegree identity_map(const GradedSpace& s);
LinearMapPerDegree differential_map(const FiniteComplex& c);

/// M ⊗_A N as the quotient of M ⊗ N by ma⊗n - m⊗an, with the collapse map
/// B(M;A;N) -> M ⊗_A N (length-0 words to m⊗n, the rest to 0).
struct Collapse {
    FiniteComplex quotient;
    LinearMapPerDegree map;
    PairIndex pairs;
    std::vector<EchelonBasis> relations;
    std::vector<std::vector<std::uint32_t>> kept;  // quotient basis as coordinates of M⊗N
};
Collapse collapse(const BarComplex& bar);

/// Checks that a family of matrices is a linear map compatible with products.
std::optional<int> multiplicativity_failure(const GradedAlgebra& a, const GradedAlgebra& b,
                                            const LinearMapPerDegree& f);

/// Extends an algebra homotopy h : f ≈ g given on generators through
/// h(xy) = h(x)g(y) + (-1)^{|x|} f(x)h(y), peeling the first generator.
/// The result lowers (cochain) degree by one.
LinearMapPerDegree extend_algebra_homotopy(const AlgebraMorphism& f, const AlgebraMorphism& g,
                                           const std::vector<Element>& on_generators);

struct ThetaData {
    std::shared_ptr<const BarComplex> source;  // B(M;A;𝕜), M pulled back along f
    std::shared_ptr<const BarComplex> target;  // B(M';A';𝕜), M' pulled back along g
    AlgebraPtr m, m2;                          // the algebras M and M'
    LinearMapPerDegree f, g;                   // A -> M, A' -> M'
    LinearMapPerDegree phi, phi2, h;           // A -> A'
    LinearMapPerDegree psi, psi2, h2;          // M -> M'
};

/// Hypothesis violated by the homotopy data, if any.
std::optional<std::string> theta_hypothesis_failure(const ThetaData& data);
/// The chain homotopy Θ between B(Ψ;φ) and B(Ψ';φ'); throws MathError when
/// the hypotheses fail.
LinearMapPerDegree theta(const ThetaData& data);

/// H with d H + H d = f - g in every degree where the identity is defined,
/// or none. The least-index solution is returned.
std::optional<LinearMapPerDegree> homotopy_solve(const FiniteComplex& source, const FiniteComplex& target,
                                                 const LinearMapPerDegree& f, const LinearMapPerDegree& g);

/// Degree where d H + H d != f - g, if any.
std::optional<int> homotopy_failure(const FiniteComplex& source, const FiniteComplex& target,
                                    const LinearMapPerDegree& f, const LinearMapPerDegree& g,
                                    const LinearMapPerDegree& h);

}  // namespace fibalg
