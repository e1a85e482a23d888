#include "fibalg/fiber.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace fibalg {

namespace {

std::optional<std::string> model_failure(const FreeCDGA& a, const char* which) {
    for (std::uint32_t g = 0; g < a.generators().size(); ++g) {
        const Generator& gen = a.generators()[g];
        if (gen.degree < 2) return std::string(which) + " generator " + gen.name + " has degree below 2";
        if (gen.is_divided()) return std::string(which) + " generator " + gen.name + " is divided; Sullivan models are free";
        for (const auto& [m, c] : a.generator_differential(g).terms)
            if (m.length() < 2) return std::string(which) + " model is not minimal: d(" + gen.name + ") has a linear term";
    }
    if (auto g = check_d_squared(a)) return std::string(which) + " model has d^2 != 0 on " + a.generators()[*g].name;
    return std::nullopt;
}

std::shared_ptr<const FreeCDGA> retruncate(const FreeCDGA& a, int n) {
    return std::make_shared<const FreeCDGA>(a.field(), a.generators(), a.differentials(), n);
}

Element combination(const FreeCDGA& a, const std::vector<Monomial>& basis, const SparseVec& coeffs) {
    Element e;
    for (auto [i, c] : coeffs) e = a.add(e, Element::of(basis[i], c));
    return e;
}

std::vector<SparseVec> columns(const FreeCDGA& a, const std::vector<Monomial>& monomials,
                               const std::function<Element(const Element&)>& f, int n) {
    std::vector<SparseVec> out;
    out.reserve(monomials.size());
    for (const auto& m : monomials) out.push_back(a.to_vector(f(Element::of(m)), n));
    return out;
}

// A generator of C together with its differential, written in the algebra
// where it was defined, and its image under p.
struct Record {
    Generator gen;
    Element d;
    std::shared_ptr<const FreeCDGA> home;
    Element p;
    bool suspended = false;
};

std::shared_ptr<const FreeCDGA> assemble(const PrimeField& f, const std::vector<Record>& recs, int truncation) {
    std::vector<Generator> gens;
    for (const auto& r : recs) gens.push_back(r.gen);
    GeneratorSet set(gens);
    FreeCDGA shell(f, set, {}, truncation);
    std::vector<Element> diff(set.size());
    for (const auto& r : recs) {
        if (r.d.is_zero()) continue;
        std::vector<Element> images;
        for (const auto& g : r.home->generators().all()) {
            auto k = set.find(g.name);
            images.push_back(k ? shell.generator(*k) : Element{});
        }
        diff[set.index_of(r.gen.name)] = substitute(*r.home, shell, images, r.d);
    }
    return std::make_shared<const FreeCDGA>(f, set, std::move(diff), truncation);
}

std::vector<Element> p_images(const FreeCDGA& c, const std::vector<Record>& recs) {
    std::vector<Element> out(c.generators().size());
    for (const auto& r : recs) out[c.generators().index_of(r.gen.name)] = r.p;
    return out;
}

std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

}  // namespace

// --------------------------------------------------------------- morphisms

std::optional<std::string> sullivan_failure(const SullivanMorphism& m) {
    if (!m.source || !m.target) return "missing model";
    if (!(m.psi.source().generators() == m.source->generators()) || !(m.psi.target().generators() == m.target->generators()))
        return "morphism does not join the given models";
    if (!(m.source->field() == m.target->field())) return "models over different fields";
    if (m.source->field().prime() == 2) return "the prime must be odd";
    if (auto e = model_failure(*m.source, "source")) return e;
    if (auto e = model_failure(*m.target, "target")) return e;
    if (auto g = m.psi.commutation_failure())
        return "morphism does not commute with d on " + m.source->generators()[*g].name;
    return std::nullopt;
}

SullivanMorphism sullivan_morphism(std::shared_ptr<const FreeCDGA> source, std::shared_ptr<const FreeCDGA> target,
                                   std::vector<Element> images) {
    SullivanMorphism m{source, target, AlgebraMorphism(source, target, std::move(images))};
    if (auto e = sullivan_failure(m)) throw std::invalid_argument(*e);
    return m;
}

SullivanMorphism augmentation_morphism(std::shared_ptr<const FreeCDGA> model) {
    auto k = std::make_shared<const FreeCDGA>(model->field(), GeneratorSet{}, std::vector<Element>{}, model->truncation());
    return sullivan_morphism(model, k, std::vector<Element>(model->generators().size()));
}

IndecomposableMap indecomposables(const SullivanMorphism& m) {
    const GeneratorSet& ys = m.source->generators();
    const GeneratorSet& xs = m.target->generators();
    const PrimeField& f = m.source->field();
    const int top = std::max(ys.max_degree(), xs.max_degree());
    IndecomposableMap out;
    out.source_generators.resize(top + 1);
    out.target_generators.resize(top + 1);
    for (std::uint32_t g = 0; g < ys.size(); ++g) out.source_generators[ys[g].degree].push_back(g);
    for (std::uint32_t g = 0; g < xs.size(); ++g) out.target_generators[xs[g].degree].push_back(g);
    for (int n = 0; n <= top; ++n) {
        const auto& tg = out.target_generators[n];
        std::vector<SparseVec> cols;
        for (std::uint32_t y : out.source_generators[n]) {
            SparseVec col;
            for (const auto& [mono, c] : m.psi.image(y).terms) {
                if (mono.factors.size() != 1 || mono.factors[0].index != 1) continue;
                auto pos = std::find(tg.begin(), tg.end(), mono.factors[0].gen);
                col.emplace_back(static_cast<std::uint32_t>(pos - tg.begin()), c);
            }
            std::sort(col.begin(), col.end());
            cols.push_back(std::move(col));
        }
        Matrix phi = Matrix::from_columns(f, tg.size(), std::move(cols));
        out.kernel.push_back(kernel_basis(phi));
        EchelonBasis image = column_space(phi);
        std::vector<std::uint32_t> coker;
        for (std::uint32_t k = 0; k < tg.size(); ++k)
            if (!image.is_pivot(k)) coker.push_back(tg[k]);
        out.cokernel.push_back(std::move(coker));
        out.phi.push_back(std::move(phi));
    }
    return out;
}

// ----------------------------------------------------------- factorization

FactorizationResult factorize(const SullivanMorphism& m, int N) {
    if (auto e = sullivan_failure(m)) throw std::invalid_argument(*e);
    const PrimeField& f = m.source->field();
    const GeneratorSet& ys = m.source->generators();
    const GeneratorSet& xs = m.target->generators();
    const int top = std::max(ys.max_degree(), xs.max_degree());
    if (N < top + 2) throw std::invalid_argument("truncation must be at least the top generator degree + 2");
    const int W = N + 2;
    auto x = retruncate(*m.target, W);
    auto y = retruncate(*m.source, W);
    IndecomposableMap ind = indecomposables(m);

    std::vector<Record> recs;
    std::set<std::string> names;
    auto fresh = [&](std::string base) {
        while (names.count(base)) base += "'";
        names.insert(base);
        return base;
    };
    for (const auto& g : ys.all()) names.insert(g.name);
    std::vector<std::string> coker_names, suspended_names;

    for (int deg = 2; deg <= std::min(N, top); ++deg) {
        const std::size_t old = recs.size();
        for (std::uint32_t g : ind.source_generators[deg]) recs.push_back({ys[g], m.source->generator_differential(g), y, m.psi.image(g)});
        std::vector<std::pair<std::size_t, std::uint32_t>> cokers;
        for (std::uint32_t g : ind.cokernel[deg]) {
            Generator gen{fresh(xs[g].name), deg, Flavor::free};
            cokers.emplace_back(recs.size(), g);
            recs.push_back({gen, {}, x, x->generator(g)});
            coker_names.push_back(gen.name);
        }
        if (recs.size() == old) continue;

        auto stage = assemble(f, recs, deg + 2);
        AlgebraMorphism p(stage, x, p_images(*stage, recs));
        std::vector<bool> mask_old(stage->generators().size(), false), mask_plain(mask_old);
        for (std::size_t r = 0; r < old; ++r) {
            std::uint32_t k = stage->generators().index_of(recs[r].gen.name);
            mask_old[k] = true;
            mask_plain[k] = !recs[r].suspended;
        }
        auto apply_d = [&](const Element& e) { return stage->differential(e); };
        auto apply_p = [&](const Element& e) { return p.apply(e); };

        // new cokernel generators: D(w) is a cycle lifting d p(w)
        if (!cokers.empty()) {
            std::vector<Monomial> b = stage->basis(deg + 1, mask_old);
            auto cycles = kernel_basis(Matrix::from_columns(f, stage->basis(deg + 2).size(), columns(*stage, b, apply_d, deg + 2)));
            std::vector<Element> zs;
            std::vector<SparseVec> pz;
            for (const auto& c : cycles) {
                zs.push_back(combination(*stage, b, c));
                pz.push_back(x->to_vector(p.apply(zs.back()), deg + 1));
            }
            Matrix pzm = Matrix::from_columns(f, x->basis(deg + 1).size(), std::move(pz));
            for (auto [r, g] : cokers) {
                auto sol = solve(pzm, x->to_vector(x->generator_differential(g), deg + 1));
                if (!sol) throw FactorizationError(deg, "no cycle z with p(z) = d(" + xs[g].name + ")");
                Element z;
                for (auto [k, c] : *sol) z = stage->add(z, stage->scale(zs[k], c));
                recs[r].d = z;
                recs[r].home = stage;
            }
        }

        // kernel of φ: a new generator sv with D(sv) = v + u - α
        const auto& yg = ind.source_generators[deg];
        for (const SparseVec& kv : ind.kernel[deg]) {
            Element v;
            std::uint32_t lead = 0;
            for (auto [k, c] : kv) {
                v = stage->add(v, stage->scale(stage->generator(ys[yg[k]].name), c));
                lead = std::max(lead, k);
            }
            std::vector<Monomial> ub = stage->basis(deg, mask_plain);
            Matrix pu = Matrix::from_columns(f, x->basis(deg).size(), columns(*stage, ub, apply_p, deg));
            auto usol = solve(pu, x->to_vector(x->scale(p.apply(v), f.neg(1)), deg));
            if (!usol) throw FactorizationError(deg, "no decomposable u with p(v + u) = 0");
            Element vu = stage->add(v, combination(*stage, ub, *usol));

            std::vector<Monomial> ab = stage->basis(deg, mask_old);
            const std::size_t rows_d = stage->basis(deg + 1).size();
            std::vector<SparseVec> cols;
            for (const auto& a : ab) {
                SparseVec col = stage->to_vector(stage->differential(Element::of(a)), deg + 1);
                for (auto [k, c] : x->to_vector(p.apply(Element::of(a)), deg))
                    col.emplace_back(static_cast<std::uint32_t>(rows_d + k), c);
                cols.push_back(std::move(col));
            }
            Matrix stacked = Matrix::from_columns(f, rows_d + x->basis(deg).size(), std::move(cols));
            auto asol = solve(stacked, stage->to_vector(stage->differential(vu), deg + 1));
            if (!asol) throw FactorizationError(deg, "no alpha with p(alpha) = 0 and D(alpha) = D(v + u)");
            Element dsv = stage->sub(vu, combination(*stage, ab, *asol));

            const int sdeg = deg - 1;
            Generator gen{fresh("s" + ys[yg[lead]].name), sdeg, sdeg % 2 == 0 ? Flavor::divided : Flavor::free};
            recs.push_back({gen, dsv, stage, {}, true});
            suspended_names.push_back(gen.name);
        }
    }
    // generators of Y above the top degree cannot exist, so recs now holds all of C

    FactorizationResult r;
    r.source = retruncate(*m.source, N);
    r.target = retruncate(*m.target, N);
    r.c = assemble(f, recs, N);
    std::vector<Element> iota;
    for (const auto& g : ys.all()) iota.push_back(r.c->generator(g.name));
    r.i = AlgebraMorphism(r.source, r.c, std::move(iota));
    r.p = AlgebraMorphism(r.c, r.target, p_images(*r.c, recs));
    r.cokernel_generators = std::move(coker_names);
    r.suspended_generators = std::move(suspended_names);
    r.truncation = N;
    r.valid = std::min(N - r.c->generators().max_degree(), N - 1);
    r.certificates = certify(r, m);
    return r;
}

Certificates certify(const FactorizationResult& r, const SullivanMorphism& m) {
    Certificates cert;
    const int N = r.truncation;
    AlgebraMorphism pi = compose(r.p, r.i);
    cert.p_after_i = true;
    for (std::uint32_t g = 0; g < pi.images().size(); ++g)
        if (!(pi.image(g) == m.psi.image(g))) {
            cert.p_after_i = false;
            cert.failures.push_back("p(i(" + r.source->generators()[g].name + ")) differs from its image under the morphism");
        }
    cert.surjective = true;
    for (int n = 0; n <= N; ++n)
        if (rank(r.p.matrix(n)) != r.target->basis(n).size()) {
            cert.surjective = false;
            cert.failures.push_back("p is not onto in degree " + std::to_string(n));
        }
    auto dd = check_d_squared(*r.c);
    cert.d_squared = !dd;
    if (dd) cert.failures.push_back("D^2 != 0 on " + r.c->generators()[*dd].name);
    auto pf = r.p.commutation_failure();
    auto ifail = r.i.commutation_failure();
    cert.chain_map = !pf && !ifail;
    if (pf) cert.failures.push_back("p does not commute with D on " + r.c->generators()[*pf].name);
    if (ifail) cert.failures.push_back("i does not commute with D on " + r.source->generators()[*ifail].name);
    cert.quasi_iso = true;
    if (cert.chain_map && cert.d_squared) {
        FiniteComplex cc = r.c->complex(), xc = r.target->complex();
        auto pm = r.p.chain_map();
        for (int n = 0; n <= r.valid; ++n)
            if (!induces_isomorphism(cc, xc, pm, n)) {
                cert.quasi_iso = false;
                cert.failures.push_back("H(p) is not bijective in degree " + std::to_string(n));
            }
    } else {
        cert.quasi_iso = false;
        cert.failures.push_back("quasi-isomorphism not checked");
    }
    return cert;
}

FiberResult fiber_cohomology(const SullivanMorphism& m, int N) {
    FactorizationResult r = factorize(m, N);
    if (!r.certificates.ok()) throw CertificateError(r.certificates.failures.front());
    HomologyPresentation h = tor_algebra(r.extension());
    auto q = h.algebra_ptr();
    bool zero = q->has_zero_differential();
    return {std::move(r), q, std::move(h), zero};
}

FiberResult loop_space_cohomology(std::shared_ptr<const FreeCDGA> model, int N) {
    FiberResult out = fiber_cohomology(augmentation_morphism(std::move(model)), N);
    if (!out.zero_cofiber_differential) throw CertificateError("cofiber of the augmentation has a nonzero differential");
    return out;
}

// ----------------------------------------------------------------- checks

std::size_t PthPowerReport::violations() const {
    return static_cast<std::size_t>(std::count_if(checked.begin(), checked.end(), [](const PowerCheck& c) { return !c.vanishes; }));
}

PthPowerReport pth_power_check(const HomologyPresentation& h, int limit) {
    PthPowerReport rep;
    rep.prime = h.field().prime();
    rep.limit = limit < 0 ? h.computed() : std::min(limit, h.computed());
    for (int i = 2; static_cast<long long>(i) * rep.prime <= rep.limit; i += 2)
        for (std::uint32_t a = 0; a < h.betti(i); ++a) {
            auto x = h.power(i, {{a, 1}}, rep.prime);
            rep.checked.push_back({i, a, h.label(i, a), x->empty()});
        }
    return rep;
}

std::vector<std::string> mildness_check(const SullivanMorphism& m) {
    std::vector<std::string> out;
    const long long p = m.source->field().prime();
    std::vector<Generator> gens = m.source->generators().all();
    for (const auto& g : m.target->generators().all()) gens.push_back(g);
    if (gens.empty()) return out;
    int lo = gens.front().degree;
    for (const auto& g : gens) lo = std::min(lo, g.degree);
    const long long r = lo - 1;
    for (const auto& g : gens)
        if (g.degree > r * p)
            out.push_back("generator " + g.name + " of degree " + std::to_string(g.degree) + " exceeds rp = " +
                          std::to_string(r * p) + "; outside guaranteed range");
    // Tor is a divided powers algebra once H(source) vanishes from rp+p and
    // H(target) from rp+p-1 on; checked inside the truncation
    auto vanishing = [&](const FreeCDGA& a, long long from, const char* which) {
        FiniteComplex c = a.complex();
        for (int n = static_cast<int>(std::max<long long>(from, 0)); n < a.truncation(); ++n)
            if (c.betti(n) != 0) {
                out.push_back(std::string(which) + " cohomology is nonzero in degree " + std::to_string(n) + " >= " +
                              std::to_string(from) + "; outside guaranteed range");
                return;
            }
    };
    vanishing(*m.source, r * p + p, "source");
    vanishing(*m.target, r * p + p - 1, "target");
    return out;
}

// ----------------------------------------------------------------- random

std::shared_ptr<const FreeCDGA> random_minimal_model(std::mt19937_64& rng, PrimeField f, int count, int lo, int hi,
                                                     int N, const std::string& prefix) {
    if (lo < 2 || hi < lo) throw std::invalid_argument("generator degrees must lie in [2, hi]");
    std::vector<int> degrees;
    degrees.push_back(lo);
    for (int i = 1; i < count; ++i) degrees.push_back(lo + static_cast<int>(below(rng, hi - lo + 1)));
    std::sort(degrees.begin(), degrees.end());
    std::vector<Generator> gens;
    std::vector<Element> diff;
    for (int i = 0; i < count; ++i) {
        const int deg = degrees[i];
        FreeCDGA partial(f, GeneratorSet(gens), diff, deg + 2);
        const auto& b = partial.basis(deg + 1).monomials;
        Element dv;
        for (const auto& z : kernel_basis(partial.differential_matrix(deg + 1))) {
            Residue c = static_cast<Residue>(below(rng, f.prime()));
            if (c != 0) dv = partial.add(dv, partial.scale(combination(partial, b, z), c));
        }
        gens.push_back({prefix + std::to_string(i), deg, Flavor::free});
        // the new generator sorts last, so indices of dv stay valid
        diff.push_back(dv);
    }
    return std::make_shared<const FreeCDGA>(f, GeneratorSet(gens), diff, N);
}

SullivanMorphism random_mild_morphism(std::mt19937_64& rng, PrimeField f, int N) {
    const int hi = static_cast<int>(f.prime());  // r = 1
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const auto shape = below(rng, 3);
        SullivanMorphism m;
        if (shape == 0) {
            auto a = random_minimal_model(rng, f, 1 + static_cast<int>(below(rng, 3)), 2, hi, N, "v");
            m = augmentation_morphism(a);
        } else if (shape == 1) {
            const int count = 2 + static_cast<int>(below(rng, 3));
            auto a = random_minimal_model(rng, f, count, 2, hi, N, "v");
            const int k = 1 + static_cast<int>(below(rng, count - 1));
            std::vector<Generator> sub(a->generators().all().begin(), a->generators().all().begin() + k);
            std::vector<Element> diff(a->differentials().begin(), a->differentials().begin() + k);
            auto s = std::make_shared<const FreeCDGA>(f, GeneratorSet(sub), diff, N);
            std::vector<Element> images;
            for (const auto& g : sub) images.push_back(a->generator(g.name));
            m = sullivan_morphism(s, a, std::move(images));
        } else {
            auto a = random_minimal_model(rng, f, 1 + static_cast<int>(below(rng, 2)), 2, hi, N, "a");
            auto b = random_minimal_model(rng, f, 1 + static_cast<int>(below(rng, 2)), 2, hi, N, "b");
            auto t = std::make_shared<const FreeCDGA>(tensor(*a, *b));
            std::vector<Element> images;
            for (const auto& g : t->generators().all())
                images.push_back(a->generators().find(g.name) ? a->generator(g.name) : Element{});
            m = sullivan_morphism(t, a, std::move(images));
        }
        if (mildness_check(m).empty()) return m;
    }
    throw MathError("no mild morphism found");
}

}  // namespace fibalg
