#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fibalg/algebra.hpp"
#include "fibalg/tor.hpp"

namespace fibalg {

/// Ψ : (ΛY, d) -> (ΛX, d) between minimal Sullivan models.
struct SullivanMorphism {
    std::shared_ptr<const FreeCDGA> source;
    std::shared_ptr<const FreeCDGA> target;
    AlgebraMorphism psi;
};

/// First reason Ψ is not a morphism of minimal models with generators in
/// degrees >= 2 over an odd prime, if any.
std::optional<std::string> sullivan_failure(const SullivanMorphism& m);
/// Builds and validates; throws std::invalid_argument.
SullivanMorphism sullivan_morphism(std::shared_ptr<const FreeCDGA> source, std::shared_ptr<const FreeCDGA> target,
                                   std::vector<Element> images);
/// The augmentation ΛV -> 𝕜.
SullivanMorphism augmentation_morphism(std::shared_ptr<const FreeCDGA> model);

/// Linear part φ of Ψ on generators, degree by degree.
struct IndecomposableMap {
    /// generators of each degree, as indices into Y and X
    std::vector<std::vector<std::uint32_t>> source_generators, target_generators;
    std::vector<Matrix> phi;                        // phi[n] : Y^n -> X^n
    std::vector<std::vector<SparseVec>> kernel;     // basis of ker φ^n in Y^n coordinates
    std::vector<std::vector<std::uint32_t>> cokernel;  // X-generators complementing im φ^n
};
IndecomposableMap indecomposables(const SullivanMorphism& m);

/// Degree where the induction could not continue.
class FactorizationError : public MathError {
public:
    FactorizationError(int degree, const std::string& what)
        : MathError("degree " + std::to_string(degree) + ": " + what), degree_(degree) {}
    int degree() const { return degree_; }

private:
    int degree_;
};

struct Certificates {
    bool p_after_i = false;   // p∘i = Ψ on generators
    bool surjective = false;  // p onto in every degree <= N
    bool d_squared = false;   // D² = 0
    bool chain_map = false;   // pD = dp
    bool quasi_iso = false;   // H(p) bijective up to N_valid
    std::vector<std::string> failures;
    bool ok() const { return p_after_i && surjective && d_squared && chain_map && quasi_iso; }
};

/// ΛY ↣ (ΛY ⊗ Λ coker φ ⊗ Γ s ker φ, D) ↠ ΛX.
struct FactorizationResult {
    std::shared_ptr<const FreeCDGA> source, target, c;
    AlgebraMorphism i, p;
    std::vector<std::string> cokernel_generators;   // names in C
    std::vector<std::string> suspended_generators;  // names in C
    int truncation = 0;
    int valid = 0;  // N - max generator degree of C
    Certificates certificates;

    SemifreeExtension extension() const { return {i, p, valid}; }
};

/// The degree-by-degree induction. Requires N >= max generator degree + 2.
FactorizationResult factorize(const SullivanMorphism& m, int N);
/// Recomputes the certificates of a factorization.
Certificates certify(const FactorizationResult& r, const SullivanMorphism& m);

struct FiberResult {
    FactorizationResult factorization;
    std::shared_ptr<const FreeCDGA> cofiber;  // 𝕜 ⊗_{ΛY} C
    HomologyPresentation cohomology;
    bool zero_cofiber_differential = false;
};

/// H(𝕜 ⊗_{ΛY} C), computed exactly below N and certified up to N_valid.
FiberResult fiber_cohomology(const SullivanMorphism& m, int N);
/// The fiber of the augmentation; throws CertificateError when the cofiber
/// differential is not zero.
FiberResult loop_space_cohomology(std::shared_ptr<const FreeCDGA> model, int N);

struct PowerCheck {
    int degree = 0;
    std::uint32_t index = 0;
    std::string label;
    bool vanishes = false;
};
struct PthPowerReport {
    Residue prime = 0;
    int limit = 0;
    std::vector<PowerCheck> checked;
    std::size_t violations() const;
};
/// x^p for every even-degree representative x with p·|x| <= limit (default:
/// the computed range). Frobenius is additive on even classes, so basis
/// classes suffice.
PthPowerReport pth_power_check(const HomologyPresentation& h, int limit = -1);

/// Warnings when some generator degree exceeds r·p, r = min degree - 1.
std::vector<std::string> mildness_check(const SullivanMorphism& m);

/// Random minimal model: one generator in degree lo, the others in [lo, hi],
/// each differential a random decomposable cycle.
std::shared_ptr<const FreeCDGA> random_minimal_model(std::mt19937_64& rng, PrimeField f, int count, int lo, int hi,
                                                     int N, const std::string& prefix);
/// Random morphism of one of three shapes: an augmentation, an inclusion of a
/// sub-model, or the projection of a tensor product onto a factor. Generator
/// degrees stay within the (r,p)-mild bound with r = 1.
SullivanMorphism random_mild_morphism(std::mt19937_64& rng, PrimeField f, int N);

}  // namespace fibalg
