#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fibalg/field.hpp"
#include "fibalg/linalg.hpp"

namespace fibalg {

enum class Flavor { free, divided };

struct Generator {
    std::string name;
    int degree = 1;
    Flavor flavor = Flavor::free;

    bool is_odd() const { return degree % 2 != 0; }
    bool is_divided() const { return flavor == Flavor::divided; }
    bool operator==(const Generator&) const = default;
};

/// Generators kept sorted by (degree, name). Odd divided generators are
/// stored as free: both square to zero.
class GeneratorSet {
public:
    GeneratorSet() = default;
    explicit GeneratorSet(std::vector<Generator> gens);

    std::size_t size() const { return gens_.size(); }
    const Generator& operator[](std::size_t i) const { return gens_[i]; }
    const std::vector<Generator>& all() const { return gens_; }
    std::optional<std::uint32_t> find(const std::string& name) const;
    std::uint32_t index_of(const std::string& name) const;
    int max_degree() const;
    int min_degree() const;
    bool operator==(const GeneratorSet& o) const { return gens_ == o.gens_; }

private:
    std::vector<Generator> gens_;
    std::unordered_map<std::string, std::uint32_t> by_name_;
};

/// gen is an index into the owning GeneratorSet; index is the exponent of a
/// free generator or k in γ^k of a divided one.
struct Factor {
    std::uint32_t gen = 0;
    std::uint32_t index = 1;
    auto operator<=>(const Factor&) const = default;
};

struct Monomial {
    std::vector<Factor> factors;  // strictly increasing gen
    auto operator<=>(const Monomial&) const = default;
    bool is_unit() const { return factors.empty(); }
    /// Total number of generator occurrences (γ^k(w) counts k).
    std::uint32_t length() const;
    static Monomial unit() { return {}; }
    static Monomial single(std::uint32_t gen, std::uint32_t index = 1) { return {{{gen, index}}}; }
};

struct Element {
    std::map<Monomial, Residue> terms;  // nonzero coefficients only

    bool is_zero() const { return terms.empty(); }
    bool operator==(const Element&) const = default;
    static Element unit() { return Element{{{Monomial::unit(), 1}}}; }
    static Element of(const Monomial& m, Residue c = 1) {
        Element e;
        if (c != 0) e.terms.emplace(m, c);
        return e;
    }
};

struct DegreeBasis {
    std::vector<Monomial> monomials;
    std::map<Monomial, std::uint32_t> index;

    std::size_t size() const { return monomials.size(); }
};

struct SignedMonomial {
    Residue coeff;
    Monomial monomial;
};

class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::invalid_argument(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Free graded-commutative algebra ΛV ⊗ ΓW over F_p with a degree +1
/// (Γ-)derivation, truncated at degree N.
class FreeCDGA {
public:
    FreeCDGA() = default;
    /// differential[i] is d of generator i; pass an empty vector for d = 0.
    FreeCDGA(PrimeField field, GeneratorSet gens, std::vector<Element> differential, int truncation);

    const PrimeField& field() const { return field_; }
    const GeneratorSet& generators() const { return gens_; }
    int truncation() const { return truncation_; }
    const Element& generator_differential(std::uint32_t g) const { return differential_[g]; }
    const std::vector<Element>& differentials() const { return differential_; }
    bool has_zero_differential() const;

    int degree(const Monomial& m) const;
    /// Degree of a homogeneous element; none for zero; throws if inhomogeneous.
    std::optional<int> degree(const Element& e) const;
    bool is_valid(const Monomial& m) const;

    const DegreeBasis& basis(int n) const;
    /// Monomials of degree n involving only generators with mask[g] set.
    std::vector<Monomial> basis(int n, const std::vector<bool>& mask) const;

    std::optional<SignedMonomial> multiply(const Monomial& a, const Monomial& b) const;
    Element multiply(const Element& a, const Element& b) const;
    Element power(const Element& a, unsigned k) const;
    Element add(const Element& a, const Element& b) const;
    Element scale(const Element& a, Residue c) const;
    Element sub(const Element& a, const Element& b) const { return add(a, scale(b, field_.neg(1))); }
    Element generator(std::uint32_t g, std::uint32_t index = 1) const;
    Element generator(const std::string& name) const { return generator(gens_.index_of(name)); }

    Element differential(const Monomial& m) const;
    Element differential(const Element& e) const;
    /// Matrix of d : A^n -> A^{n+1} in the monomial bases (needs n < N).
    Matrix differential_matrix(int n) const;
    /// Cochain complex in degrees 0..N.
    FiniteComplex complex() const;

    SparseVec to_vector(const Element& e, int n) const;
    Element from_vector(const SparseVec& v, int n) const;

    std::string to_string(const Monomial& m) const;
    std::string to_string(const Element& e) const;
    Element parse(const std::string& text) const;

private:
    PrimeField field_;
    GeneratorSet gens_;
    std::vector<Element> differential_;
    int truncation_ = 0;
    std::vector<DegreeBasis> bases_;
};

/// Degree-`shift` derivation determined by its values on generators. On
/// divided generators it is a Γ-derivation: D γ^k(w) = D(w) γ^{k-1}(w).
std::function<Element(const Element&)> extend_derivation(const FreeCDGA& alg, std::vector<Element> values, int shift);
Element apply_derivation(const FreeCDGA& alg, const std::vector<Element>& values, int shift, const Element& e);

/// First generator (by index) with d(d(g)) != 0 within the truncation.
std::optional<std::uint32_t> check_d_squared(const FreeCDGA& alg);

/// Disjoint union of generators; rejects name clashes.
FreeCDGA tensor(const FreeCDGA& a, const FreeCDGA& b);
/// 𝕜 ⊗_{Λ(base)} C: base generators set to zero.
FreeCDGA cofiber(const FreeCDGA& c, const std::vector<std::string>& base_generators);

/// Image of e under the algebra map sending generator g of `from` to
/// images[g] in `to` (no differential involved). Divided factors need a
/// generator-multiple image; see AlgebraMorphism.
Element substitute(const FreeCDGA& from, const FreeCDGA& to, const std::vector<Element>& images, const Element& e);

class AlgebraMorphism {
public:
    AlgebraMorphism() = default;
    AlgebraMorphism(std::shared_ptr<const FreeCDGA> source, std::shared_ptr<const FreeCDGA> target,
                    std::vector<Element> images);

    const FreeCDGA& source() const { return *source_; }
    const FreeCDGA& target() const { return *target_; }
    std::shared_ptr<const FreeCDGA> source_ptr() const { return source_; }
    std::shared_ptr<const FreeCDGA> target_ptr() const { return target_; }
    const std::vector<Element>& images() const { return images_; }
    const Element& image(std::uint32_t g) const { return images_[g]; }

    Element apply(const Element& e) const;
    /// Matrix of the map in degree n.
    Matrix matrix(int n) const;
    LinearMapPerDegree chain_map() const;
    /// First generator where f∘d != d∘f, checked up to the truncation.
    std::optional<std::uint32_t> commutation_failure() const;

private:
    std::shared_ptr<const FreeCDGA> source_;
    std::shared_ptr<const FreeCDGA> target_;
    std::vector<Element> images_;
};

AlgebraMorphism compose(const AlgebraMorphism& outer, const AlgebraMorphism& inner);

}  // namespace fibalg
