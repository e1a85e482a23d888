#include "fibalg/tor.hpp"

#include <algorithm>

namespace fibalg {

namespace {

SparseVec unit_vector(std::uint32_t i) { return {{i, 1}}; }

}  // namespace

HomologyPresentation::HomologyPresentation(std::shared_ptr<const FreeCDGA> algebra, int computed, int valid,
                                           std::vector<std::vector<Element>> representatives)
    : algebra_(std::move(algebra)), computed_(computed), valid_(std::min(valid, computed)),
      reps_(std::move(representatives)) {
    const FreeCDGA& a = *algebra_;
    const PrimeField& f = a.field();
    if (computed_ >= a.truncation()) throw std::invalid_argument("homology is only exact below the truncation");
    if (static_cast<int>(reps_.size()) != computed_ + 1)
        throw std::invalid_argument("one list of representatives per degree is needed");
    for (int n = 0; n <= computed_; ++n) {
        Degree deg;
        deg.boundaries = n == 0 ? EchelonBasis(f, a.basis(0).size()) : column_space(a.differential_matrix(n - 1));
        Matrix dn = a.differential_matrix(n);
        std::size_t expected = a.basis(n).size() - rank(dn) - deg.boundaries.rank();
        if (reps_[n].size() != expected)
            throw std::invalid_argument("degree " + std::to_string(n) + " needs " + std::to_string(expected) +
                                        " representatives");
        deg.reps.emplace(f, a.basis(n).size());
        for (const Element& r : reps_[n]) {
            if (!a.differential(r).is_zero()) throw std::invalid_argument("representative " + a.to_string(r) + " is not a cycle");
            if (!deg.reps->insert(deg.boundaries.reduce(a.to_vector(r, n))))
                throw std::invalid_argument("representatives in degree " + std::to_string(n) + " are dependent");
        }
        betti_.push_back(reps_[n].size());
        degrees_.push_back(std::move(deg));
    }
    for (int i = 0; i <= computed_; ++i)
        for (int j = 0; i + j <= computed_; ++j)
            for (std::uint32_t x = 0; x < betti_[i]; ++x)
                for (std::uint32_t y = 0; y < betti_[j]; ++y)
                    products_.emplace(std::make_tuple(i, x, j, y), class_of(i + j, a.multiply(reps_[i][x], reps_[j][y])));
}

std::string HomologyPresentation::label(int n, std::uint32_t i) const { return algebra_->to_string(reps_.at(n).at(i)); }

SparseVec HomologyPresentation::class_of(int n, const Element& cycle) const {
    if (n < 0 || n > computed_) throw std::out_of_range("degree outside the computed range");
    if (!algebra_->differential(cycle).is_zero()) throw MathError(algebra_->to_string(cycle) + " is not a cycle");
    const Degree& deg = degrees_[n];
    auto c = deg.reps->express(deg.boundaries.reduce(algebra_->to_vector(cycle, n)));
    if (!c) throw MathError("cycle outside the span of the representatives");
    return *c;
}

const SparseVec& HomologyPresentation::product(int i, std::uint32_t a, int j, std::uint32_t b) const {
    auto it = products_.find(std::make_tuple(i, a, j, b));
    if (it == products_.end()) throw std::out_of_range("product outside the computed range");
    return it->second;
}

SparseVec HomologyPresentation::multiply(int i, const SparseVec& x, int j, const SparseVec& y) const {
    const PrimeField& f = field();
    SparseVec out;
    for (auto [a, u] : x)
        for (auto [b, v] : y) axpy(f, out, f.mul(u, v), product(i, a, j, b));
    return out;
}

std::optional<SparseVec> HomologyPresentation::power(int i, const SparseVec& x, unsigned k) const {
    if (static_cast<long long>(i) * k > computed_) return std::nullopt;
    SparseVec acc = class_of(0, Element::unit());
    int deg = 0;
    for (unsigned e = 0; e < k; ++e) {
        acc = multiply(deg, acc, i, x);
        deg += i;
    }
    return acc;
}

HomologyPresentation presentation_of(std::shared_ptr<const FreeCDGA> algebra, int computed, int valid) {
    FiniteComplex c = algebra->complex();
    std::vector<std::vector<Element>> reps(computed + 1);
    for (int n = 0; n <= computed; ++n) {
        HomologyData h = c.homology(n);
        for (const auto& v : h.representatives()) reps[n].push_back(algebra->from_vector(v, n));
    }
    return HomologyPresentation(algebra, computed, valid, std::move(reps));
}

// ------------------------------------------------------------- bar side

std::vector<std::size_t> tor_dims_via_bar(AlgebraPtr a, ModulePtr m, int max) {
    auto k = std::make_shared<GroundModule>(a->field(), a->direction(), a->top());
    BarComplex bar(m, a, k, max + 1);
    FiniteComplex c = bar.complex();
    std::vector<std::size_t> out;
    for (int n = 0; n <= std::min(max, bar.top() - 1); ++n) out.push_back(c.betti(n));
    return out;
}

std::vector<std::size_t> tor_dims_via_bar(const AlgebraMorphism& psi, int max) {
    auto y = std::make_shared<FreeAlgebraData>(psi.source_ptr(), Direction::cochain);
    auto x = std::make_shared<FreeAlgebraData>(psi.target_ptr(), Direction::cochain);
    auto m = std::make_shared<PulledBackModule>(x, y, psi.chain_map());
    return tor_dims_via_bar(y, m, max);
}

// ------------------------------------------------------------ extensions

std::vector<std::string> extension_failures(const SemifreeExtension& e) {
    std::vector<std::string> out;
    const FreeCDGA& a = e.inclusion.source();
    const FreeCDGA& c = e.inclusion.target();
    const FreeCDGA& m = e.projection.target();
    if (!(e.projection.source().generators() == c.generators())) {
        out.push_back("projection does not start at the extension");
        return out;
    }
    for (std::uint32_t g = 0; g < a.generators().size(); ++g) {
        const std::string& name = a.generators()[g].name;
        if (!c.generators().find(name) || !(e.inclusion.image(g) == c.generator(name)))
            out.push_back("inclusion does not send " + name + " to a generator of the same name");
    }
    if (auto g = e.inclusion.commutation_failure()) out.push_back("inclusion does not commute with d on " + a.generators()[*g].name);
    if (auto g = e.projection.commutation_failure()) out.push_back("projection does not commute with d on " + c.generators()[*g].name);
    if (!out.empty()) return out;
    if (auto g = check_d_squared(c)) out.push_back("D^2 != 0 on " + c.generators()[*g].name);
    FiniteComplex cc = c.complex(), mc = m.complex();
    auto pm = e.projection.chain_map();
    const int top = std::min({e.valid, c.truncation() - 1, m.truncation() - 1});
    for (int n = 0; n <= top; ++n)
        if (!induces_isomorphism(cc, mc, pm, n)) out.push_back("projection is not a quasi-isomorphism in degree " + std::to_string(n));
    return out;
}

HomologyPresentation tor_algebra(const SemifreeExtension& e) {
    auto failures = extension_failures(e);
    if (!failures.empty()) throw CertificateError(failures.front());
    std::vector<std::string> base;
    for (const auto& g : e.inclusion.source().generators().all()) base.push_back(g.name);
    auto q = std::make_shared<const FreeCDGA>(cofiber(e.inclusion.target(), base));
    return presentation_of(q, q->truncation() - 1, e.valid);
}

// ------------------------------------------------------------ invariants

Fingerprint fingerprint(const HomologyPresentation& h, int up_to) {
    Fingerprint fp;
    fp.up_to = std::min(up_to, h.computed());
    const PrimeField& f = h.field();
    for (int n = 0; n <= fp.up_to; ++n) fp.betti.push_back(h.betti(n));
    for (int i = 1; i <= fp.up_to; ++i)
        for (int j = i; i + j <= fp.up_to; ++j) {
            std::vector<SparseVec> cols;
            for (std::uint32_t a = 0; a < h.betti(i); ++a)
                for (std::uint32_t b = 0; b < h.betti(j); ++b) cols.push_back(h.product(i, a, j, b));
            fp.product_ranks[{i, j}] = rank(Matrix::from_columns(f, h.betti(i + j), std::move(cols)));
        }
    for (int i = 2; static_cast<long long>(i) * f.prime() <= fp.up_to; i += 2) {
        std::vector<SparseVec> cols;
        for (std::uint32_t a = 0; a < h.betti(i); ++a) cols.push_back(*h.power(i, unit_vector(a), f.prime()));
        fp.frobenius_ranks[i] = rank(Matrix::from_columns(f, h.betti(i * static_cast<int>(f.prime())), std::move(cols)));
    }
    return fp;
}

InvarianceReport invariance_check(const HomologyPresentation& a, const HomologyPresentation& b) {
    InvarianceReport r;
    r.up_to = std::min(a.valid(), b.valid());
    Fingerprint fa = fingerprint(a, r.up_to), fb = fingerprint(b, r.up_to);
    r.betti_match = fa.betti == fb.betti;
    for (int n = 0; n <= r.up_to; ++n)
        if (fa.betti[n] != fb.betti[n])
            r.mismatches.push_back("betti in degree " + std::to_string(n) + ": " + std::to_string(fa.betti[n]) + " vs " +
                                   std::to_string(fb.betti[n]));
    r.products_match = fa.product_ranks == fb.product_ranks && fa.frobenius_ranks == fb.frobenius_ranks;
    for (const auto& [k, v] : fa.product_ranks)
        if (fb.product_ranks.at(k) != v)
            r.mismatches.push_back("rank of H^" + std::to_string(k.first) + " x H^" + std::to_string(k.second) + ": " +
                                   std::to_string(v) + " vs " + std::to_string(fb.product_ranks.at(k)));
    for (const auto& [k, v] : fa.frobenius_ranks)
        if (fb.frobenius_ranks.at(k) != v)
            r.mismatches.push_back("rank of p-th powers on H^" + std::to_string(k) + ": " + std::to_string(v) + " vs " +
                                   std::to_string(fb.frobenius_ranks.at(k)));
    return r;
}

std::optional<std::string> commutativity_failure(const HomologyPresentation& h) {
    const PrimeField& f = h.field();
    for (int i = 0; i <= h.computed(); ++i)
        for (int j = 0; i + j <= h.computed(); ++j)
            for (std::uint32_t a = 0; a < h.betti(i); ++a)
                for (std::uint32_t b = 0; b < h.betti(j); ++b)
                    if (h.product(i, a, j, b) != scaled(f, h.product(j, b, i, a), f.sign(static_cast<long long>(i) * j)))
                        return h.label(i, a) + " and " + h.label(j, b) + " do not graded-commute";
    return std::nullopt;
}

std::optional<std::string> associativity_failure(const HomologyPresentation& h) {
    for (int i = 1; i <= h.computed(); ++i)
        for (int j = 1; i + j <= h.computed(); ++j)
            for (int k = 1; i + j + k <= h.computed(); ++k)
                for (std::uint32_t a = 0; a < h.betti(i); ++a)
                    for (std::uint32_t b = 0; b < h.betti(j); ++b)
                        for (std::uint32_t c = 0; c < h.betti(k); ++c) {
                            SparseVec l = h.multiply(i + j, h.product(i, a, j, b), k, unit_vector(c));
                            SparseVec r = h.multiply(i, unit_vector(a), j + k, h.product(j, b, k, c));
                            if (l != r)
                                return "(" + h.label(i, a) + " " + h.label(j, b) + ") " + h.label(k, c) +
                                       " differs from the other bracketing";
                        }
    return std::nullopt;
}

}  // namespace fibalg
