#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "fibalg/algebra.hpp"
#include "fibalg/bar.hpp"
#include "fibalg/linalg.hpp"

namespace fibalg {

/// Thrown when a factorization or quasi-isomorphism certificate fails.
class CertificateError : public MathError {
public:
    using MathError::MathError;
};

/// Cohomology of a commutative cochain algebra in degrees 0..computed, with
/// chosen representative cycles and the product table on them.
class HomologyPresentation {
public:
    HomologyPresentation() = default;
    /// `representatives[n]` must be cycles of degree n independent modulo
    /// boundaries and spanning the homology.
    HomologyPresentation(std::shared_ptr<const FreeCDGA> algebra, int computed, int valid,
                         std::vector<std::vector<Element>> representatives);

    const FreeCDGA& algebra() const { return *algebra_; }
    std::shared_ptr<const FreeCDGA> algebra_ptr() const { return algebra_; }
    const PrimeField& field() const { return algebra_->field(); }
    /// Highest degree whose homology is known exactly.
    int computed() const { return computed_; }
    /// Conservative range in which the presentation is certified against its source.
    int valid() const { return valid_; }
    std::size_t betti(int n) const { return n < 0 || n > computed_ ? 0 : betti_[n]; }
    const std::vector<std::size_t>& betti() const { return betti_; }
    const Element& representative(int n, std::uint32_t i) const { return reps_.at(n).at(i); }
    std::string label(int n, std::uint32_t i) const;

    /// Class coordinates of a cycle of degree n.
    SparseVec class_of(int n, const Element& cycle) const;
    /// Product of representative classes.
    const SparseVec& product(int i, std::uint32_t a, int j, std::uint32_t b) const;
    /// Product of classes given by coordinates; needs i + j <= computed.
    SparseVec multiply(int i, const SparseVec& x, int j, const SparseVec& y) const;
    /// x^k by repeated multiplication; none when k·i leaves the computed range.
    std::optional<SparseVec> power(int i, const SparseVec& x, unsigned k) const;

private:
    struct Degree {
        EchelonBasis boundaries;
        std::optional<TrackedEchelon> reps;  // representatives reduced modulo boundaries
    };

    std::shared_ptr<const FreeCDGA> algebra_;
    int computed_ = -1;
    int valid_ = -1;
    std::vector<std::size_t> betti_;
    std::vector<std::vector<Element>> reps_;
    std::vector<Degree> degrees_;
    std::map<std::tuple<int, std::uint32_t, int, std::uint32_t>, SparseVec> products_;
};

/// Presentation with the deterministic representatives of the homology solver.
HomologyPresentation presentation_of(std::shared_ptr<const FreeCDGA> algebra, int computed, int valid);

/// Dimensions of H(B(M;A;𝕜)) in degrees 0..max (fewer if the bar truncation
/// does not reach). A and M must carry the same orientation.
std::vector<std::size_t> tor_dims_via_bar(AlgebraPtr a, ModulePtr m, int max);
/// Tor^{ΛY}(ΛX, 𝕜) for a morphism Ψ : ΛY -> ΛX of cochain algebras.
std::vector<std::size_t> tor_dims_via_bar(const AlgebraMorphism& psi, int max);

/// A ↣ C ↠ M with C semifree over A on the generators of A.
struct SemifreeExtension {
    AlgebraMorphism inclusion;   // A -> C, generators to equally named generators
    AlgebraMorphism projection;  // C -> M, a quasi-isomorphism up to `valid`
    int valid = -1;
};

/// Reasons the extension is not certified, empty when it is.
std::vector<std::string> extension_failures(const SemifreeExtension& e);
/// H(𝕜 ⊗_A C) with its product: Tor^A(M, 𝕜) as an algebra. Throws
/// CertificateError when the extension fails its certificate.
HomologyPresentation tor_algebra(const SemifreeExtension& e);

/// Algebra invariants: betti numbers, ranks of H^i ⊗ H^j -> H^{i+j}, and
/// ranks of x ↦ x^p on even degrees.
struct Fingerprint {
    int up_to = -1;
    std::vector<std::size_t> betti;
    std::map<std::pair<int, int>, std::size_t> product_ranks;
    std::map<int, std::size_t> frobenius_ranks;
    bool operator==(const Fingerprint&) const = default;
};
Fingerprint fingerprint(const HomologyPresentation& h, int up_to);

struct InvarianceReport {
    int up_to = -1;
    bool betti_match = false;
    bool products_match = false;
    std::vector<std::string> mismatches;
    bool ok() const { return betti_match && products_match; }
};
InvarianceReport invariance_check(const HomologyPresentation& a, const HomologyPresentation& b);

std::optional<std::string> commutativity_failure(const HomologyPresentation& h);
std::optional<std::string> associativity_failure(const HomologyPresentation& h);

}  // namespace fibalg
