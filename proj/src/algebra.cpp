#include "fibalg/algebra.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace fibalg {

// ---------------------------------------------------------- generators

static bool valid_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'')) return false;
    return s != "gamma";
}

GeneratorSet::GeneratorSet(std::vector<Generator> gens) : gens_(std::move(gens)) {
    for (auto& g : gens_) {
        if (!valid_identifier(g.name)) throw std::invalid_argument("invalid generator name '" + g.name + "'");
        if (g.degree < 1) throw std::invalid_argument("generator " + g.name + " must have degree >= 1");
        if (g.is_odd()) g.flavor = Flavor::free;
    }
    std::sort(gens_.begin(), gens_.end(), [](const Generator& a, const Generator& b) {
        return a.degree != b.degree ? a.degree < b.degree : a.name < b.name;
    });
    for (std::uint32_t i = 0; i < gens_.size(); ++i)
        if (!by_name_.emplace(gens_[i].name, i).second)
            throw std::invalid_argument("duplicate generator name '" + gens_[i].name + "'");
}

std::optional<std::uint32_t> GeneratorSet::find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t GeneratorSet::index_of(const std::string& name) const {
    auto i = find(name);
    if (!i) throw std::invalid_argument("unknown generator '" + name + "'");
    return *i;
}

int GeneratorSet::max_degree() const {
    int m = 0;
    for (const auto& g : gens_) m = std::max(m, g.degree);
    return m;
}

int GeneratorSet::min_degree() const {
    if (gens_.empty()) return 0;
    return gens_.front().degree;
}

std::uint32_t Monomial::length() const {
    std::uint32_t n = 0;
    for (const auto& f : factors) n += f.index;
    return n;
}

// ------------------------------------------------------------ FreeCDGA

FreeCDGA::FreeCDGA(PrimeField field, GeneratorSet gens, std::vector<Element> differential, int truncation)
    : field_(field), gens_(std::move(gens)), differential_(std::move(differential)), truncation_(truncation) {
    if (field_.prime() == 0) throw std::invalid_argument("algebra needs a field");
    if (truncation_ < 0) throw std::invalid_argument("truncation must be non-negative");
    if (differential_.empty()) differential_.resize(gens_.size());
    if (differential_.size() != gens_.size()) throw std::invalid_argument("differential list has wrong length");

    // enumerate every monomial of degree <= N, then bucket by degree
    bases_.resize(truncation_ + 1);
    std::vector<Factor> current;
    std::function<void(std::size_t, int)> walk = [&](std::size_t g, int deg) {
        if (g == gens_.size()) {
            bases_[deg].monomials.push_back(Monomial{current});
            return;
        }
        walk(g + 1, deg);
        const Generator& gen = gens_[g];
        std::uint32_t max_index = gen.is_odd() ? 1 : static_cast<std::uint32_t>((truncation_ - deg) / gen.degree);
        for (std::uint32_t k = 1; k <= max_index && deg + static_cast<int>(k) * gen.degree <= truncation_; ++k) {
            current.push_back({static_cast<std::uint32_t>(g), k});
            walk(g + 1, deg + static_cast<int>(k) * gen.degree);
            current.pop_back();
        }
    };
    walk(0, 0);
    for (auto& b : bases_) {
        std::sort(b.monomials.begin(), b.monomials.end());
        for (std::uint32_t i = 0; i < b.monomials.size(); ++i) b.index.emplace(b.monomials[i], i);
    }

    for (std::uint32_t g = 0; g < gens_.size(); ++g) {
        const Element& d = differential_[g];
        for (const auto& [m, c] : d.terms) {
            if (!is_valid(m) || c == 0 || c >= field_.prime())
                throw std::invalid_argument("malformed differential of " + gens_[g].name);
            if (degree(m) != gens_[g].degree + 1)
                throw std::invalid_argument("differential of " + gens_[g].name + " must have degree " +
                                            std::to_string(gens_[g].degree + 1));
        }
    }
}

bool FreeCDGA::has_zero_differential() const {
    return std::all_of(differential_.begin(), differential_.end(), [](const Element& e) { return e.is_zero(); });
}

int FreeCDGA::degree(const Monomial& m) const {
    int d = 0;
    for (const auto& f : m.factors) d += gens_[f.gen].degree * static_cast<int>(f.index);
    return d;
}

std::optional<int> FreeCDGA::degree(const Element& e) const {
    std::optional<int> d;
    for (const auto& [m, c] : e.terms) {
        int k = degree(m);
        if (d && *d != k) throw MathError("inhomogeneous element " + to_string(e));
        d = k;
    }
    return d;
}

bool FreeCDGA::is_valid(const Monomial& m) const {
    for (std::size_t i = 0; i < m.factors.size(); ++i) {
        const Factor& f = m.factors[i];
        if (f.gen >= gens_.size() || f.index == 0) return false;
        if (i > 0 && m.factors[i - 1].gen >= f.gen) return false;
        if (gens_[f.gen].is_odd() && f.index > 1) return false;
    }
    return true;
}

const DegreeBasis& FreeCDGA::basis(int n) const {
    if (n < 0 || n > truncation_)
        throw std::out_of_range("degree " + std::to_string(n) + " outside truncation " + std::to_string(truncation_));
    return bases_[n];
}

std::vector<Monomial> FreeCDGA::basis(int n, const std::vector<bool>& mask) const {
    std::vector<Monomial> out;
    for (const auto& m : basis(n).monomials)
        if (std::all_of(m.factors.begin(), m.factors.end(), [&](const Factor& f) { return mask.at(f.gen); }))
            out.push_back(m);
    return out;
}

std::optional<SignedMonomial> FreeCDGA::multiply(const Monomial& a, const Monomial& b) const {
    Residue coeff = 1;
    // Koszul sign: each odd factor of b passes the odd factors of a with larger index
    std::size_t odd_a_after = 0;
    for (const auto& f : a.factors)
        if (gens_[f.gen].is_odd()) ++odd_a_after;
    std::size_t transpositions = 0;
    {
        std::size_t ia = 0;
        std::size_t odd_seen = 0;
        for (const auto& f : b.factors) {
            while (ia < a.factors.size() && a.factors[ia].gen < f.gen) {
                if (gens_[a.factors[ia].gen].is_odd()) ++odd_seen;
                ++ia;
            }
            if (gens_[f.gen].is_odd()) {
                std::size_t equal = (ia < a.factors.size() && a.factors[ia].gen == f.gen) ? 1 : 0;
                if (equal) return std::nullopt;
                transpositions += odd_a_after - odd_seen;
            }
        }
    }
    if (transpositions % 2) coeff = field_.neg(1);

    Monomial out;
    out.factors.reserve(a.factors.size() + b.factors.size());
    std::size_t i = 0, j = 0;
    while (i < a.factors.size() || j < b.factors.size()) {
        if (j == b.factors.size() || (i < a.factors.size() && a.factors[i].gen < b.factors[j].gen)) {
            out.factors.push_back(a.factors[i++]);
        } else if (i == a.factors.size() || b.factors[j].gen < a.factors[i].gen) {
            out.factors.push_back(b.factors[j++]);
        } else {
            const Generator& g = gens_[a.factors[i].gen];
            std::uint32_t x = a.factors[i].index, y = b.factors[j].index;
            if (g.is_divided()) {
                Residue c = field_.binomial(x + y, x);
                if (c == 0) return std::nullopt;
                coeff = field_.mul(coeff, c);
            }
            out.factors.push_back({a.factors[i].gen, x + y});
            ++i;
            ++j;
        }
    }
    return SignedMonomial{coeff, std::move(out)};
}

Element FreeCDGA::add(const Element& a, const Element& b) const {
    Element out = a;
    for (const auto& [m, c] : b.terms) {
        auto it = out.terms.find(m);
        if (it == out.terms.end()) {
            if (c != 0) out.terms.emplace(m, c);
        } else {
            Residue v = field_.add(it->second, c);
            if (v == 0) out.terms.erase(it);
            else it->second = v;
        }
    }
    return out;
}

Element FreeCDGA::scale(const Element& a, Residue c) const {
    Element out;
    if (c == 0) return out;
    for (const auto& [m, v] : a.terms) out.terms.emplace(m, field_.mul(v, c));
    return out;
}

Element FreeCDGA::multiply(const Element& a, const Element& b) const {
    Element out;
    for (const auto& [ma, ca] : a.terms)
        for (const auto& [mb, cb] : b.terms) {
            auto r = multiply(ma, mb);
            if (!r) continue;
            Residue c = field_.mul(field_.mul(ca, cb), r->coeff);
            auto it = out.terms.find(r->monomial);
            if (it == out.terms.end()) {
                out.terms.emplace(std::move(r->monomial), c);
            } else {
                it->second = field_.add(it->second, c);
                if (it->second == 0) out.terms.erase(it);
            }
        }
    return out;
}

Element FreeCDGA::power(const Element& a, unsigned k) const {
    Element out = Element::unit();
    for (unsigned i = 0; i < k; ++i) out = multiply(out, a);
    return out;
}

Element FreeCDGA::generator(std::uint32_t g, std::uint32_t index) const {
    if (g >= gens_.size()) throw std::out_of_range("generator index out of range");
    if (index == 0) return Element::unit();
    if (gens_[g].is_odd() && index > 1) return {};
    return Element::of(Monomial::single(g, index));
}

Element FreeCDGA::differential(const Monomial& m) const {
    return apply_derivation(*this, differential_, 1, Element::of(m));
}

Element FreeCDGA::differential(const Element& e) const { return apply_derivation(*this, differential_, 1, e); }

SparseVec FreeCDGA::to_vector(const Element& e, int n) const {
    const DegreeBasis& b = basis(n);
    SparseVec v;
    v.reserve(e.terms.size());
    for (const auto& [m, c] : e.terms) {
        auto it = b.index.find(m);
        if (it == b.index.end()) throw MathError("element " + to_string(e) + " is not in degree " + std::to_string(n));
        v.emplace_back(it->second, c);
    }
    std::sort(v.begin(), v.end());
    return v;
}

Element FreeCDGA::from_vector(const SparseVec& v, int n) const {
    const DegreeBasis& b = basis(n);
    Element e;
    for (auto [i, c] : v)
        if (c != 0) e.terms.emplace(b.monomials.at(i), c);
    return e;
}

Matrix FreeCDGA::differential_matrix(int n) const {
    if (n < 0 || n >= truncation_) throw std::out_of_range("differential matrix needs degree below truncation");
    const DegreeBasis& src = basis(n);
    std::vector<SparseVec> cols;
    cols.reserve(src.size());
    for (const auto& m : src.monomials) cols.push_back(to_vector(differential(m), n + 1));
    return Matrix::from_columns(field_, basis(n + 1).size(), std::move(cols));
}

FiniteComplex FreeCDGA::complex() const {
    std::vector<std::size_t> dims;
    for (int n = 0; n <= truncation_; ++n) dims.push_back(basis(n).size());
    FiniteComplex c(field_, Direction::cochain, dims);
    for (int n = 0; n < truncation_; ++n) c.set_differential(n, differential_matrix(n));
    return c;
}

std::string FreeCDGA::to_string(const Monomial& m) const {
    if (m.is_unit()) return "1";
    std::string s;
    for (const auto& f : m.factors) {
        if (!s.empty()) s += "*";
        const Generator& g = gens_[f.gen];
        if (g.is_divided() && f.index > 1)
            s += "gamma(" + std::to_string(f.index) + "," + g.name + ")";
        else if (f.index > 1)
            s += g.name + "^" + std::to_string(f.index);
        else
            s += g.name;
    }
    return s;
}

std::string FreeCDGA::to_string(const Element& e) const {
    if (e.is_zero()) return "0";
    std::string s;
    bool first = true;
    for (auto it = e.terms.rbegin(); it != e.terms.rend(); ++it) {
        long long c = field_.symmetric(it->second);
        bool negative = c < 0;
        long long mag = negative ? -c : c;
        if (first) s += negative ? "-" : "";
        else s += negative ? " - " : " + ";
        first = false;
        if (it->first.is_unit()) {
            s += std::to_string(mag);
        } else {
            if (mag != 1) s += std::to_string(mag) + "*";
            s += to_string(it->first);
        }
    }
    return s;
}

// --------------------------------------------------------------- parser

namespace {

class ExprParser {
public:
    ExprParser(const FreeCDGA& alg, const std::string& text) : alg_(alg), f_(alg.field()), s_(text) {}

    Element parse() {
        skip();
        if (pos_ == s_.size()) throw ParseError("empty expression", pos_);
        Element total;
        bool first = true;
        while (true) {
            skip();
            Residue sign = 1;
            std::size_t term_start = pos_;
            if (peek('+') || peek('-')) {
                if (peek('-')) sign = f_.neg(1);
                ++pos_;
                skip();
            } else if (!first) {
                throw ParseError("expected '+' or '-'", pos_);
            }
            auto [term, deg] = parse_term();
            if (term_degree_ && deg && *deg != *term_degree_)
                throw ParseError("inhomogeneous expression: term of degree " + std::to_string(*deg) +
                                     " after degree " + std::to_string(*term_degree_),
                                 term_start);
            if (deg) term_degree_ = deg;
            total = alg_.add(total, alg_.scale(term, sign));
            first = false;
            skip();
            if (pos_ == s_.size()) break;
        }
        return total;
    }

private:
    // Returns the term and its degree; a pure scalar 0 has no degree constraint.
    std::pair<Element, std::optional<int>> parse_term() {
        Element term = Element::unit();
        int deg = 0;
        bool zero_scalar = false;
        bool has_factor = false;
        while (true) {
            skip();
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                Residue c = parse_number_mod();
                if (c == 0) zero_scalar = true;
                term = alg_.scale(term, c);
            } else {
                auto [fac, d] = parse_factor();
                term = alg_.multiply(term, fac);
                deg += d;
                has_factor = true;
            }
            skip();
            if (peek('*')) {
                ++pos_;
                continue;
            }
            break;
        }
        if (zero_scalar && !has_factor) return {Element{}, std::nullopt};
        return {term, deg};
    }

    std::pair<Element, int> parse_factor() {
        std::size_t start = pos_;
        std::string name = parse_identifier();
        if (name.empty()) throw ParseError("expected generator, coefficient or gamma(k,name)", start);
        skip();
        if (name == "gamma" && peek('(')) {
            ++pos_;
            skip();
            std::uint64_t k = parse_nat();
            skip();
            expect(',');
            skip();
            std::size_t gpos = pos_;
            std::string gname = parse_identifier();
            auto g = lookup(gname, gpos);
            skip();
            expect(')');
            return {divided_power(g, k, gpos), alg_.generators()[g].degree * static_cast<int>(k)};
        }
        auto g = lookup(name, start);
        std::uint64_t e = 1;
        if (peek('^')) {
            ++pos_;
            skip();
            e = parse_nat();
        }
        int deg = alg_.generators()[g].degree * static_cast<int>(e);
        return {alg_.power(alg_.generator(g), static_cast<unsigned>(e)), deg};
    }

    Element divided_power(std::uint32_t g, std::uint64_t k, std::size_t where) {
        const Generator& gen = alg_.generators()[g];
        if (k == 0) return Element::unit();
        if (gen.is_divided()) return alg_.generator(g, static_cast<std::uint32_t>(k));
        if (gen.is_odd()) return k == 1 ? alg_.generator(g) : Element{};
        // x^k / k! on a polynomial generator
        if (k >= f_.prime())
            throw ParseError("gamma(" + std::to_string(k) + "," + gen.name + ") undefined on a polynomial generator mod " +
                                 std::to_string(f_.prime()),
                             where);
        Residue fact = 1;
        for (std::uint64_t i = 2; i <= k; ++i) fact = f_.mul(fact, static_cast<Residue>(i));
        return alg_.scale(alg_.power(alg_.generator(g), static_cast<unsigned>(k)), f_.inv(fact));
    }

    std::uint32_t lookup(const std::string& name, std::size_t where) {
        auto g = alg_.generators().find(name);
        if (!g) throw ParseError("undeclared identifier '" + name + "'", where);
        return *g;
    }

    std::string parse_identifier() {
        std::size_t start = pos_;
        if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
            ++pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '\''))
                ++pos_;
        }
        return s_.substr(start, pos_ - start);
    }

    std::uint64_t parse_nat() {
        std::size_t start = pos_;
        std::uint64_t v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + static_cast<std::uint64_t>(s_[pos_] - '0');
            if (v > 1000000) throw ParseError("number too large", start);
            ++pos_;
        }
        if (pos_ == start) throw ParseError("expected a natural number", start);
        return v;
    }

    Residue parse_number_mod() {
        Residue v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = f_.add(f_.mul(v, f_.reduce(10)), f_.reduce(s_[pos_] - '0'));
            ++pos_;
        }
        return v;
    }

    void expect(char c) {
        if (!peek(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }
    bool peek(char c) const { return pos_ < s_.size() && s_[pos_] == c; }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    const FreeCDGA& alg_;
    const PrimeField& f_;
    const std::string& s_;
    std::size_t pos_ = 0;
    std::optional<int> term_degree_;
};

}  // namespace

Element FreeCDGA::parse(const std::string& text) const { return ExprParser(*this, text).parse(); }

// ---------------------------------------------------------- derivations

Element apply_derivation(const FreeCDGA& alg, const std::vector<Element>& values, int shift, const Element& e) {
    const PrimeField& f = alg.field();
    const GeneratorSet& gens = alg.generators();
    if (values.size() != gens.size()) throw std::invalid_argument("derivation needs one value per generator");
    Element out;
    for (const auto& [m, c] : e.terms) {
        int prefix_degree = 0;
        for (std::size_t k = 0; k < m.factors.size(); ++k) {
            const Factor& fk = m.factors[k];
            const Generator& g = gens[fk.gen];
            const Element& dg = values[fk.gen];
            if (!dg.is_zero()) {
                Element dfactor;
                if (g.is_odd()) {
                    dfactor = dg;
                } else if (g.is_divided()) {
                    dfactor = alg.multiply(alg.generator(fk.gen, fk.index - 1), dg);
                } else {
                    dfactor = alg.scale(alg.multiply(alg.generator(fk.gen, fk.index - 1), dg), f.reduce(fk.index));
                }
                Monomial prefix{{m.factors.begin(), m.factors.begin() + static_cast<std::ptrdiff_t>(k)}};
                Monomial suffix{{m.factors.begin() + static_cast<std::ptrdiff_t>(k) + 1, m.factors.end()}};
                Element term = alg.multiply(alg.multiply(Element::of(prefix), dfactor), Element::of(suffix));
                Residue sgn = f.sign(static_cast<long long>(shift) * prefix_degree);
                out = alg.add(out, alg.scale(term, f.mul(sgn, c)));
            }
            prefix_degree += g.degree * static_cast<int>(fk.index);
        }
    }
    return out;
}

std::function<Element(const Element&)> extend_derivation(const FreeCDGA& alg, std::vector<Element> values, int shift) {
    if (values.size() != alg.generators().size()) throw std::invalid_argument("derivation needs one value per generator");
    for (std::uint32_t g = 0; g < values.size(); ++g) {
        auto d = alg.degree(values[g]);
        if (d && *d != alg.generators()[g].degree + shift)
            throw std::invalid_argument("derivation value on " + alg.generators()[g].name + " has wrong degree");
    }
    return [&alg, values = std::move(values), shift](const Element& e) { return apply_derivation(alg, values, shift, e); };
}

std::optional<std::uint32_t> check_d_squared(const FreeCDGA& alg) {
    for (std::uint32_t g = 0; g < alg.generators().size(); ++g) {
        if (alg.generators()[g].degree + 2 > alg.truncation()) continue;
        if (!alg.differential(alg.generator_differential(g)).is_zero()) return g;
    }
    return std::nullopt;
}

// ------------------------------------------------- tensor and cofiber

Element substitute(const FreeCDGA& from, const FreeCDGA& to, const std::vector<Element>& images, const Element& e) {
    const PrimeField& f = to.field();
    Element out;
    for (const auto& [m, c] : e.terms) {
        Element term = Element::of(Monomial::unit(), c);
        for (const auto& fac : m.factors) {
            const Generator& g = from.generators()[fac.gen];
            const Element& img = images.at(fac.gen);
            Element piece;
            if (!g.is_divided()) {
                piece = to.power(img, fac.index);
            } else if (!img.is_zero()) {
                if (img.terms.size() != 1 || img.terms.begin()->first.factors.size() != 1 ||
                    img.terms.begin()->first.factors[0].index != 1)
                    throw MathError("image of divided generator " + g.name + " must be a multiple of a generator");
                Residue a = img.terms.begin()->second;
                std::uint32_t tg = img.terms.begin()->first.factors[0].gen;
                const Generator& target = to.generators()[tg];
                Residue ak = f.pow(a, fac.index);
                if (target.is_divided() || target.is_odd()) {
                    piece = to.scale(to.generator(tg, fac.index), ak);
                } else {
                    if (fac.index >= f.prime())
                        throw MathError("gamma power of " + g.name + " has no image in a polynomial algebra");
                    Residue fact = 1;
                    for (std::uint32_t i = 2; i <= fac.index; ++i) fact = f.mul(fact, i);
                    piece = to.scale(to.power(to.generator(tg), fac.index), f.mul(ak, f.inv(fact)));
                }
            }
            term = to.multiply(term, piece);
            if (term.is_zero()) break;
        }
        out = to.add(out, term);
    }
    return out;
}

FreeCDGA tensor(const FreeCDGA& a, const FreeCDGA& b) {
    if (!(a.field() == b.field())) throw std::invalid_argument("tensor of algebras over different fields");
    if (a.truncation() != b.truncation()) throw std::invalid_argument("tensor of algebras with different truncations");
    std::vector<Generator> gens = a.generators().all();
    for (const auto& g : b.generators().all()) {
        if (a.generators().find(g.name)) throw std::invalid_argument("generator name clash: " + g.name);
        gens.push_back(g);
    }
    GeneratorSet set(gens);
    FreeCDGA shell(a.field(), set, {}, a.truncation());
    std::vector<Element> diff(set.size());
    for (const FreeCDGA* part : {&a, &b}) {
        std::vector<Element> images;
        for (const auto& g : part->generators().all()) images.push_back(shell.generator(g.name));
        for (std::uint32_t g = 0; g < part->generators().size(); ++g)
            diff[set.index_of(part->generators()[g].name)] =
                substitute(*part, shell, images, part->generator_differential(g));
    }
    return FreeCDGA(a.field(), set, std::move(diff), a.truncation());
}

FreeCDGA cofiber(const FreeCDGA& c, const std::vector<std::string>& base_generators) {
    std::vector<bool> base(c.generators().size(), false);
    for (const auto& name : base_generators) base[c.generators().index_of(name)] = true;
    for (std::uint32_t g = 0; g < base.size(); ++g) {
        if (!base[g]) continue;
        for (const auto& [m, coeff] : c.generator_differential(g).terms)
            for (const auto& f : m.factors)
                if (!base[f.gen])
                    throw std::invalid_argument("base is not closed under the differential: d(" +
                                                c.generators()[g].name + ") involves " +
                                                c.generators()[f.gen].name);
    }
    std::vector<Generator> rest;
    for (std::uint32_t g = 0; g < base.size(); ++g)
        if (!base[g]) rest.push_back(c.generators()[g]);
    GeneratorSet set(rest);
    FreeCDGA shell(c.field(), set, {}, c.truncation());
    std::vector<Element> images(base.size());
    for (std::uint32_t g = 0; g < base.size(); ++g)
        if (!base[g]) images[g] = shell.generator(c.generators()[g].name);
    std::vector<Element> diff(set.size());
    for (std::uint32_t g = 0; g < base.size(); ++g)
        if (!base[g])
            diff[set.index_of(c.generators()[g].name)] = substitute(c, shell, images, c.generator_differential(g));
    return FreeCDGA(c.field(), set, std::move(diff), c.truncation());
}

// ------------------------------------------------------------ morphisms

AlgebraMorphism::AlgebraMorphism(std::shared_ptr<const FreeCDGA> source, std::shared_ptr<const FreeCDGA> target,
                                 std::vector<Element> images)
    : source_(std::move(source)), target_(std::move(target)), images_(std::move(images)) {
    if (!(source_->field() == target_->field())) throw std::invalid_argument("morphism between different fields");
    const GeneratorSet& gens = source_->generators();
    if (images_.size() != gens.size()) throw std::invalid_argument("morphism needs one image per generator");
    const Residue p = source_->field().prime();
    for (std::uint32_t g = 0; g < gens.size(); ++g) {
        const Element& img = images_[g];
        for (const auto& [m, c] : img.terms)
            if (!target_->is_valid(m) || c == 0 || c >= p)
                throw std::invalid_argument("malformed image of " + gens[g].name);
        auto d = target_->degree(img);
        if (d && *d != gens[g].degree)
            throw std::invalid_argument("image of " + gens[g].name + " has degree " + std::to_string(*d) +
                                        ", expected " + std::to_string(gens[g].degree));
        if (!gens[g].is_divided() || img.is_zero()) continue;
        const auto& [m, c] = *img.terms.begin();
        if (img.terms.size() != 1 || m.factors.size() != 1 || m.factors[0].index != 1)
            throw std::invalid_argument("image of divided generator " + gens[g].name +
                                        " must be zero or a multiple of a single generator");
        const Generator& t = target_->generators()[m.factors[0].gen];
        if (!t.is_divided() && !t.is_odd() &&
            static_cast<long long>(p) * gens[g].degree <= std::min(source_->truncation(), target_->truncation()))
            throw std::invalid_argument("divided generator " + gens[g].name +
                                        " cannot map to a polynomial generator below degree p*|w|");
    }
}

Element AlgebraMorphism::apply(const Element& e) const { return substitute(*source_, *target_, images_, e); }

Matrix AlgebraMorphism::matrix(int n) const {
    const DegreeBasis& src = source_->basis(n);
    std::vector<SparseVec> cols;
    cols.reserve(src.size());
    for (const auto& m : src.monomials) cols.push_back(target_->to_vector(apply(Element::of(m)), n));
    return Matrix::from_columns(source_->field(), target_->basis(n).size(), std::move(cols));
}

LinearMapPerDegree AlgebraMorphism::chain_map() const {
    LinearMapPerDegree f{0, {}};
    int top = std::min(source_->truncation(), target_->truncation());
    for (int n = 0; n <= top; ++n) f.maps.push_back(matrix(n));
    return f;
}

std::optional<std::uint32_t> AlgebraMorphism::commutation_failure() const {
    int top = std::min(source_->truncation(), target_->truncation());
    for (std::uint32_t g = 0; g < images_.size(); ++g) {
        if (source_->generators()[g].degree + 1 > top) continue;
        Element lhs = apply(source_->generator_differential(g));
        Element rhs = target_->differential(images_[g]);
        if (!(lhs == rhs)) return g;
    }
    return std::nullopt;
}

AlgebraMorphism compose(const AlgebraMorphism& outer, const AlgebraMorphism& inner) {
    if (!(outer.source().generators() == inner.target().generators()))
        throw std::invalid_argument("composition of morphisms with mismatched algebras");
    std::vector<Element> images;
    for (const auto& img : inner.images()) images.push_back(outer.apply(img));
    return AlgebraMorphism(inner.source_ptr(), outer.target_ptr(), std::move(images));
}

}  // namespace fibalg
