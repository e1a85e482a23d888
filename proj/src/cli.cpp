#include "fibalg/cli.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "fibalg/bar.hpp"
#include "fibalg/fiber.hpp"
#include "fibalg/tor.hpp"
#include "json.hpp"

namespace fibalg::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const char* flavor_name(const Generator& g) { return g.is_divided() ? "divided" : "free"; }

Element parse_at(const FreeCDGA& a, const json& value, const std::string& where, int degree) {
    if (!value.is_string()) throw InputError(where + ": expression must be a string");
    Element e;
    try {
        e = a.parse(value.get<std::string>());
    } catch (const ParseError& err) {
        throw InputError(where + ": " + err.what());
    } catch (const MathError& err) {
        throw InputError(where + ": " + err.what());
    }
    auto d = a.degree(e);
    if (d && *d != degree)
        throw InputError(where + ": expression has degree " + std::to_string(*d) + ", expected " + std::to_string(degree));
    return e;
}

void only_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where) {
    for (const auto& [k, v] : obj.items())
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) throw InputError(where + ": unknown key '" + k + "'");
}

std::shared_ptr<const FreeCDGA> parse_algebra(const json& obj, PrimeField f, int N, const std::string& where) {
    if (!obj.is_object()) throw InputError(where + ": model must be an object");
    only_keys(obj, {"generators", "differential"}, where);
    if (!obj.contains("generators") || !obj["generators"].is_array()) throw InputError(where + ": missing generators list");
    std::vector<Generator> gens;
    for (std::size_t i = 0; i < obj["generators"].size(); ++i) {
        const json& g = obj["generators"][i];
        const std::string at = where + ".generators[" + std::to_string(i) + "]";
        if (!g.is_array() || g.size() < 2 || g.size() > 3 || !g[0].is_string() || !g[1].is_number_integer())
            throw InputError(at + ": expected [name, degree] or [name, degree, flavor]");
        Generator gen{g[0].get<std::string>(), g[1].get<int>(), Flavor::free};
        if (gen.degree < 1) throw InputError(at + ": degree must be positive");
        if (g.size() == 3) {
            if (g[2] == "divided") gen.flavor = Flavor::divided;
            else if (g[2] != "free") throw InputError(at + ": flavor must be \"free\" or \"divided\"");
        }
        gens.push_back(gen);
    }
    GeneratorSet set;
    try {
        set = GeneratorSet(gens);
    } catch (const std::invalid_argument& e) {
        throw InputError(where + ": " + e.what());
    }
    FreeCDGA shell(f, set, {}, N);
    std::vector<Element> diff(set.size());
    if (obj.contains("differential")) {
        const json& d = obj["differential"];
        if (!d.is_object()) throw InputError(where + ".differential: must be an object");
        for (const auto& [name, expr] : d.items()) {
            auto g = set.find(name);
            if (!g) throw InputError(where + ".differential: undeclared generator '" + name + "'");
            diff[*g] = parse_at(shell, expr, where + ".differential." + name, set[*g].degree + 1);
        }
    }
    try {
        return std::make_shared<const FreeCDGA>(f, set, std::move(diff), N);
    } catch (const std::invalid_argument& e) {
        throw InputError(where + ": " + e.what());
    }
}

ordered_json print_algebra(const FreeCDGA& a) {
    ordered_json gens = ordered_json::array();
    ordered_json diff = ordered_json::object();
    for (std::uint32_t g = 0; g < a.generators().size(); ++g) {
        const Generator& gen = a.generators()[g];
        gens.push_back(ordered_json::array({gen.name, gen.degree, flavor_name(gen)}));
        if (!a.generator_differential(g).is_zero()) diff[gen.name] = a.to_string(a.generator_differential(g));
    }
    ordered_json out;
    out["generators"] = gens;
    out["differential"] = diff;
    return out;
}

std::shared_ptr<const FreeCDGA> retruncate(const std::shared_ptr<const FreeCDGA>& a, int n) {
    if (!a || a->truncation() == n) return a;
    return std::make_shared<const FreeCDGA>(a->field(), a->generators(), a->differentials(), n);
}

std::string class_string(const HomologyPresentation& h, int n, const SparseVec& v) {
    if (v.empty()) return "0";
    std::string s;
    const PrimeField& f = h.field();
    for (auto [i, c] : v) {
        long long k = f.symmetric(c);
        if (!s.empty()) s += k < 0 ? " - " : " + ";
        else if (k < 0) s += "-";
        long long mag = k < 0 ? -k : k;
        if (mag != 1) s += std::to_string(mag) + "*";
        s += "[" + h.label(n, i) + "]";
    }
    return s;
}

void betti_table(std::ostream& out, const HomologyPresentation& h, int upto) {
    out << "degree\tbetti\n";
    for (int n = 0; n <= upto; ++n) out << n << "\t" << h.betti(n) << "\n";
}

void pth_lines(std::ostream& out, const HomologyPresentation& h, const PthPowerReport& rep) {
    for (const auto& c : rep.checked)
        out << "pth-power\t" << c.label << "\t" << c.degree << "\t" << c.degree * static_cast<int>(rep.prime) << "\t"
            << (c.vanishes ? "zero" : "nonzero") << "\n";
    out << "pth-powers: " << rep.checked.size() << " checked, " << rep.violations() << " violations, limit "
        << rep.limit << "\n";
    (void)h;
}

// Products of the classes carried by cofiber generators that are cycles.
void product_lines(std::ostream& out, const HomologyPresentation& h) {
    const FreeCDGA& q = h.algebra();
    std::vector<std::pair<std::string, SparseVec>> classes;
    std::vector<int> degrees;
    for (std::uint32_t g = 0; g < q.generators().size(); ++g) {
        const Generator& gen = q.generators()[g];
        if (gen.degree > h.computed() || !q.differential(q.generator(g)).is_zero()) continue;
        classes.emplace_back(gen.name, h.class_of(gen.degree, q.generator(g)));
        degrees.push_back(gen.degree);
    }
    for (std::size_t a = 0; a < classes.size(); ++a)
        for (std::size_t b = a; b < classes.size(); ++b) {
            const int n = degrees[a] + degrees[b];
            if (n > h.computed()) continue;
            out << "product\t" << classes[a].first << "\t" << classes[b].first << "\t"
                << class_string(h, n, h.multiply(degrees[a], classes[a].second, degrees[b], classes[b].second)) << "\n";
        }
}

SullivanMorphism morphism_of(const ModelFile& m, int N) {
    if (!m.target || !m.morphism) throw InputError("this command needs a target model and a morphism");
    auto s = retruncate(m.source, N), t = retruncate(m.target, N);
    try {
        return sullivan_morphism(s, t, *m.morphism);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
}

Outcome fiber_report(const SullivanMorphism& m, int N, bool loop, bool pth_only) {
    std::ostringstream out;
    Outcome o;
    std::vector<std::string> warnings = mildness_check(m);
    FactorizationResult r;
    try {
        r = factorize(m, N);
    } catch (const FactorizationError& e) {
        out << "factorization failed: " << e.what() << "\n";
        return {1, out.str()};
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    out << "truncation\t" << r.truncation << "\n";
    out << "valid\t" << r.valid << "\n";
    if (!pth_only) {
        const FreeCDGA& c = *r.c;
        for (std::uint32_t g = 0; g < c.generators().size(); ++g) {
            const Generator& gen = c.generators()[g];
            const char* kind = m.source->generators().find(gen.name) ? "source"
                               : std::count(r.suspended_generators.begin(), r.suspended_generators.end(), gen.name)
                                   ? "suspension"
                                   : "cokernel";
            out << "generator\t" << gen.name << "\t" << gen.degree << "\t" << flavor_name(gen) << "\t" << kind << "\tD="
                << c.to_string(c.generator_differential(g)) << "\tp=" << r.target->to_string(r.p.image(g)) << "\n";
        }
    }
    if (!r.certificates.ok()) {
        out << "certificates: FAILED\n";
        for (const auto& f : r.certificates.failures) out << "failure\t" << f << "\n";
        return {1, out.str()};
    }
    out << "certificates: OK\n";
    HomologyPresentation h = tor_algebra(r.extension());
    const bool zero = h.algebra().has_zero_differential();
    if (!pth_only) {
        for (std::uint32_t g = 0; g < h.algebra().generators().size(); ++g) {
            const Generator& gen = h.algebra().generators()[g];
            out << "cofiber\t" << gen.name << "\t" << gen.degree << "\t" << flavor_name(gen) << "\tD="
                << h.algebra().to_string(h.algebra().generator_differential(g)) << "\n";
        }
        out << "cofiber differential: " << (zero ? "zero" : "nonzero") << "\n";
        out << "computed\t" << h.computed() << "\n";
        betti_table(out, h, r.valid);
        product_lines(out, h);
    }
    PthPowerReport rep = pth_power_check(h);
    pth_lines(out, h, rep);
    for (const auto& w : warnings) out << "warning\t" << w << "\n";
    if (loop && !zero) {
        out << "certificate failure: cofiber of the augmentation has a nonzero differential\n";
        o.exit_code = 1;
    }
    if (pth_only && rep.violations() > 0) o.exit_code = 1;
    o.report = out.str();
    return o;
}

Outcome bar_report(const ModelFile& m, int N, bool with_dims) {
    std::ostringstream out;
    auto a = retruncate(m.source, N);
    std::shared_ptr<const FreeAlgebraData> alg;
    try {
        alg = std::make_shared<const FreeAlgebraData>(a, m.orientation);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    auto k = std::make_shared<const GroundModule>(a->field(), m.orientation, alg->top());
    out << "orientation\t" << (m.orientation == Direction::chain ? "chain" : "cochain") << "\n";
    out << "truncation\t" << N << "\n";
    if (!with_dims) {
        std::vector<std::size_t> dims;
        if (m.target && m.morphism) {
            if (m.orientation != Direction::cochain) throw InputError("a morphism needs cochain orientation");
            dims = tor_dims_via_bar(morphism_of(m, N).psi, N - 1);
        } else {
            dims = tor_dims_via_bar(alg, k, N - 1);
        }
        out << "valid\t" << static_cast<int>(dims.size()) - 1 << "\n";
        out << "degree\ttor\n";
        for (std::size_t n = 0; n < dims.size(); ++n) out << n << "\t" << dims[n] << "\n";
        return {0, out.str()};
    }
    BarComplex bar(k, alg, k, N);
    FiniteComplex c = bar.complex();
    if (auto bad = c.d_squared_failure()) {
        out << "certificate failure: bar differential does not square to zero in degree " << *bad << "\n";
        return {1, out.str()};
    }
    out << "degree\tdim\tbetti\n";
    for (int n = 0; n <= c.top(); ++n) {
        out << n << "\t" << bar.dim(n) << "\t";
        if (c.has_homology(n)) out << c.betti(n);
        else out << "?";
        out << "\n";
    }
    return {0, out.str()};
}

}  // namespace

// ------------------------------------------------------------- model files

ModelFile parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("model file is not valid JSON at byte " + std::to_string(e.byte));
    }
    if (!doc.is_object()) throw InputError("model file must be a JSON object");
    only_keys(doc, {"prime", "max_degree", "orientation", "source", "target", "morphism"}, "model file");
    ModelFile m;
    if (!doc.contains("prime") || !doc["prime"].is_number_integer()) throw InputError("prime: missing or not an integer");
    long long p = doc["prime"].get<long long>();
    if (p < 2 || p > 65521 || !is_prime(static_cast<std::uint64_t>(p))) throw InputError("prime: " + std::to_string(p) + " is not a prime");
    if (p == 2) throw InputError("prime: p = 2 is not supported, an odd prime is required");
    m.prime = static_cast<Residue>(p);
    if (!doc.contains("max_degree") || !doc["max_degree"].is_number_integer()) throw InputError("max_degree: missing or not an integer");
    m.max_degree = doc["max_degree"].get<int>();
    if (m.max_degree < 1 || m.max_degree > 200) throw InputError("max_degree: must lie in 1..200");
    if (doc.contains("orientation")) {
        if (doc["orientation"] == "chain") m.orientation = Direction::chain;
        else if (doc["orientation"] != "cochain") throw InputError("orientation: must be \"chain\" or \"cochain\"");
    }
    PrimeField f(m.prime);
    if (!doc.contains("source")) throw InputError("source: missing");
    m.source = parse_algebra(doc["source"], f, m.max_degree, "source");
    if (doc.contains("target")) m.target = parse_algebra(doc["target"], f, m.max_degree, "target");
    if (doc.contains("morphism")) {
        if (!m.target) throw InputError("morphism: needs a target model");
        const json& mor = doc["morphism"];
        if (!mor.is_object()) throw InputError("morphism: must be an object");
        std::vector<Element> images(m.source->generators().size());
        std::vector<bool> seen(images.size(), false);
        for (const auto& [name, expr] : mor.items()) {
            auto g = m.source->generators().find(name);
            if (!g) throw InputError("morphism: undeclared source generator '" + name + "'");
            images[*g] = parse_at(*m.target, expr, "morphism." + name, m.source->generators()[*g].degree);
            seen[*g] = true;
        }
        for (std::uint32_t g = 0; g < seen.size(); ++g)
            if (!seen[g]) throw InputError("morphism: no image for " + m.source->generators()[g].name);
        m.morphism = std::move(images);
    }
    return m;
}

std::string print_model(const ModelFile& m) {
    ordered_json doc;
    doc["prime"] = m.prime;
    doc["max_degree"] = m.max_degree;
    doc["orientation"] = m.orientation == Direction::chain ? "chain" : "cochain";
    doc["source"] = print_algebra(*m.source);
    if (m.target) doc["target"] = print_algebra(*m.target);
    if (m.morphism) {
        ordered_json mor = ordered_json::object();
        for (std::uint32_t g = 0; g < m.source->generators().size(); ++g)
            mor[m.source->generators()[g].name] = m.target->to_string((*m.morphism)[g]);
        doc["morphism"] = mor;
    }
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------- commands

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"fiber", "loop", "tor-dims", "bar-homology", "check-pth-powers", "selftest"};
    return c;
}

Outcome run(const std::string& command, const ModelFile* model, const Options& opts) {
    if (command == "selftest") return selftest();
    if (std::find(commands().begin(), commands().end(), command) == commands().end())
        throw InputError("unknown command '" + command + "'");
    if (!model) throw InputError(command + " needs --input");
    const ModelFile& m = *model;
    const int N = opts.max_degree.value_or(m.max_degree);
    if (N < 1) throw InputError("--max-degree must be positive");
    std::string head = "command\t" + command + "\nprime\t" + std::to_string(m.prime) + "\n";
    Outcome o;
    if (command == "fiber") {
        o = fiber_report(morphism_of(m, N), N, false, false);
    } else if (command == "loop") {
        SullivanMorphism a;
        try {
            a = augmentation_morphism(retruncate(m.source, N));
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
        o = fiber_report(a, N, true, false);
    } else if (command == "tor-dims") {
        o = bar_report(m, N, false);
    } else if (command == "bar-homology") {
        o = bar_report(m, N, true);
    } else {
        if (opts.direct) {
            auto a = retruncate(m.source, N);
            HomologyPresentation h = presentation_of(a, N - 1, N - 1);
            std::ostringstream out;
            out << "truncation\t" << N << "\nvalid\t" << N - 1 << "\n";
            PthPowerReport rep = pth_power_check(h);
            pth_lines(out, h, rep);
            o = {rep.violations() > 0 ? 1 : 0, out.str()};
        } else if (m.target && m.morphism) {
            o = fiber_report(morphism_of(m, N), N, false, true);
        } else {
            SullivanMorphism a;
            try {
                a = augmentation_morphism(retruncate(m.source, N));
            } catch (const std::invalid_argument& e) {
                throw InputError(e.what());
            }
            o = fiber_report(a, N, false, true);
        }
    }
    o.report = head + o.report;
    return o;
}

// ---------------------------------------------------------------- selftest

namespace {

std::shared_ptr<const FreeCDGA> quick(Residue p, std::vector<Generator> gens, int N,
                                      std::vector<std::pair<std::string, std::string>> d = {}) {
    GeneratorSet set(std::move(gens));
    FreeCDGA shell(PrimeField(p), set, {}, N);
    std::vector<Element> diff(set.size());
    for (auto& [name, expr] : d) diff[set.index_of(name)] = shell.parse(expr);
    return std::make_shared<const FreeCDGA>(PrimeField(p), set, diff, N);
}

// coefficients of the product over generators of (1 + t^d) or 1/(1 - t^d)
std::vector<std::size_t> dims_of_free(const std::vector<int>& degrees, int top) {
    std::vector<std::size_t> c(top + 1, 0);
    c[0] = 1;
    for (int d : degrees) {
        if (d % 2)
            for (int n = top; n >= d; --n) c[n] += c[n - d];
        else
            for (int n = d; n <= top; ++n) c[n] += c[n - d];
    }
    return c;
}

}  // namespace

Outcome selftest() {
    std::ostringstream out;
    int failed = 0;
    auto check = [&](const std::string& name, auto&& body) {
        bool ok = false;
        try {
            ok = body();
        } catch (const std::exception& e) {
            out << "error\t" << name << "\t" << e.what() << "\n";
        }
        out << (ok ? "PASS\t" : "FAIL\t") << name << "\n";
        if (!ok) ++failed;
    };
    auto y = quick(5, {{"x2", 2}, {"y5", 5}}, 22, {{"y5", "x2^3"}});
    auto x = quick(5, {{"x2", 2}, {"z3", 3}}, 22, {{"z3", "x2^2"}});
    SullivanMorphism cp = sullivan_morphism(y, x, {x->parse("x2"), x->parse("z3*x2")});

    check("factorization of S^2 -> CP^2", [&] {
        FactorizationResult r = factorize(cp, 22);
        const FreeCDGA& c = *r.c;
        return r.certificates.ok() && c.generator_differential(c.generators().index_of("z3")) == c.parse("x2^2") &&
               c.generator_differential(c.generators().index_of("sy5")) == c.parse("y5 - z3*x2");
    });
    check("fiber of S^2 -> CP^2", [&] {
        FiberResult fr = fiber_cohomology(cp, 22);
        const auto& h = fr.cohomology;
        auto expect = dims_of_free({3, 4}, h.valid());
        for (int n = 0; n <= h.valid(); ++n)
            if (h.betti(n) != expect[n]) return false;
        SparseVec u = h.class_of(4, fr.cofiber->parse("sy5"));
        return h.power(4, u, 5)->empty() && !h.power(4, u, 4)->empty();
    });
    check("loop space of an odd sphere", [&] {
        FiberResult fr = loop_space_cohomology(quick(5, {{"v3", 3}}, 20), 20);
        for (int n = 0; n <= fr.cohomology.valid(); ++n)
            if (fr.cohomology.betti(n) != (n % 2 == 0 ? 1u : 0u)) return false;
        return fr.zero_cofiber_differential;
    });
    check("loop space of CP^2", [&] {
        FiberResult fr = loop_space_cohomology(quick(5, {{"x2", 2}, {"y5", 5}}, 18, {{"y5", "x2^3"}}), 18);
        auto expect = dims_of_free({1, 4}, fr.cohomology.valid());
        for (int n = 0; n <= fr.cohomology.valid(); ++n)
            if (fr.cohomology.betti(n) != expect[n]) return false;
        return true;
    });
    check("Tor of a polynomial algebra", [&] {
        auto a = std::make_shared<FreeAlgebraData>(quick(3, {{"x2", 2}}, 21), Direction::chain);
        auto dims = tor_dims_via_bar(a, std::make_shared<GroundModule>(a->field(), Direction::chain, a->top()), 20);
        for (int n = 0; n <= 20; ++n)
            if (dims[n] != (n == 0 || n == 3 ? 1u : 0u)) return false;
        return dims.size() == 21;
    });
    check("bar differential squares to zero", [&] {
        auto a = std::make_shared<FreeAlgebraData>(y, Direction::cochain);
        auto k = std::make_shared<GroundModule>(a->field(), Direction::cochain, a->top());
        return !BarComplex(k, a, k, 10).complex().d_squared_failure().has_value();
    });
    check("p-th power of a polynomial class is caught", [&] {
        HomologyPresentation h = presentation_of(quick(5, {{"x2", 2}}, 12), 11, 11);
        return pth_power_check(h).violations() == 1;
    });
    out << "selftest: " << (failed == 0 ? "OK" : std::to_string(failed) + " failed") << "\n";
    return {failed == 0 ? 0 : 1, out.str()};
}

}  // namespace fibalg::cli
