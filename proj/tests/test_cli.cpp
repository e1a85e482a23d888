#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fibalg/cli.hpp"
#include "fibalg/fiber.hpp"

using namespace fibalg;
using cli::InputError;
using cli::ModelFile;

namespace {

std::string slurp(const std::string& name) {
    std::ifstream in(std::string(FIBALG_TEST_DATA) + "/" + name);
    REQUIRE(in);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

cli::Outcome run_file(const std::string& command, const std::string& file, cli::Options opts = {}) {
    ModelFile m = cli::parse_model(slurp(file));
    return cli::run(command, &m, opts);
}

bool has_line(const std::string& report, const std::string& line) {
    std::istringstream in(report);
    for (std::string l; std::getline(in, l);)
        if (l == line) return true;
    return false;
}

bool same_algebra(const FreeCDGA& a, const FreeCDGA& b) {
    return a.field().prime() == b.field().prime() && a.generators() == b.generators() &&
           a.truncation() == b.truncation() && a.differentials() == b.differentials();
}

std::string with_source(const std::string& source, const std::string& extra = "") {
    return R"({"prime": 5, "max_degree": 12, "source": )" + source + extra + "}";
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("model files parse") {
        ModelFile m = cli::parse_model(slurp("cp2.json"));
        CHECK(m.prime == 5);
        CHECK(m.max_degree == 22);
        CHECK(m.orientation == Direction::cochain);
        REQUIRE(m.target);
        REQUIRE(m.morphism);
        CHECK(m.target->to_string((*m.morphism)[1]) == m.target->to_string(m.target->parse("x2*z3")));
        CHECK(m.source->generator_differential(1) == m.source->parse("x2^3"));

        ModelFile c = cli::parse_model(slurp("f5x2.json"));
        CHECK(c.orientation == Direction::chain);
        CHECK_FALSE(c.target);

        ModelFile d = cli::parse_model(with_source(R"({"generators": [["w4", 4, "divided"], ["t3", 3]]})"));
        CHECK(d.source->generators()[1].is_divided());
    }

    TEST_CASE("print and parse round trip on random models") {
        std::mt19937_64 rng(77);
        for (int trial = 0; trial < 12; ++trial) {
            PrimeField f(trial % 2 ? 3 : 7);
            ModelFile m;
            m.prime = f.prime();
            m.max_degree = 14;
            m.source = random_minimal_model(rng, f, 2 + trial % 3, 2, 6, 14, "a");
            if (trial % 3 == 0) {
                SullivanMorphism s = random_mild_morphism(rng, f, 14);
                m.source = s.source;
                m.target = s.target;
                m.morphism = s.psi.images();
            }
            std::string once = cli::print_model(m);
            ModelFile back = cli::parse_model(once);
            CHECK(cli::print_model(back) == once);
            CHECK(same_algebra(*back.source, *m.source));
            if (m.target) {
                CHECK(same_algebra(*back.target, *m.target));
                CHECK(*back.morphism == *m.morphism);
            }
        }
    }

    TEST_CASE("malformed input is rejected with a message") {
        auto rejects = [](const std::string& text, const std::string& needle) {
            try {
                cli::parse_model(text);
            } catch (const InputError& e) {
                INFO(e.what());
                CHECK(std::string(e.what()).find(needle) != std::string::npos);
                return;
            }
            FAIL("accepted: " << text);
        };
        const std::string v3 = R"({"generators": [["v3", 3]]})";
        rejects("{ not json", "not valid JSON");
        rejects(R"({"prime": 2, "max_degree": 10, "source": )" + v3 + "}", "p = 2");
        rejects(R"({"prime": 9, "max_degree": 10, "source": )" + v3 + "}", "not a prime");
        rejects(R"({"prime": 5, "max_degree": 0, "source": )" + v3 + "}", "max_degree");
        rejects(R"({"prime": 5, "source": )" + v3 + "}", "max_degree");
        rejects(R"({"prime": 5, "max_degree": 10})", "source");
        rejects(with_source(v3, R"(, "colour": 1)"), "unknown key 'colour'");
        rejects(with_source(R"({"generators": [["v3", 0]]})"), "degree must be positive");
        rejects(with_source(R"({"generators": [["v3"]]})"), "generators[0]");
        rejects(with_source(R"({"generators": [["v3", 3, "odd"]]})"), "flavor");
        rejects(with_source(R"({"generators": [["v3", 3], ["v3", 5]]})"), "source");
        rejects(with_source(R"({"generators": [["gamma", 3]]})"), "source");
        rejects(with_source(R"({"generators": [["x2", 2], ["y5", 5]], "differential": {"y5": "x2^3 + q2"}})"),
                "source.differential.y5");
        rejects(with_source(R"({"generators": [["x2", 2], ["y5", 5]], "differential": {"y5": "x2^2"}})"),
                "expected 6");
        rejects(with_source(R"({"generators": [["x2", 2], ["y5", 5]], "differential": {"y5": "x2^3 + x2"}})"),
                "source.differential.y5");
        rejects(with_source(R"({"generators": [["x2", 2]], "differential": {"z3": "x2^2"}})"), "undeclared");
        rejects(with_source(v3, R"(, "morphism": {"v3": "v3"})"), "needs a target");
        rejects(with_source(v3, R"(, "target": {"generators": [["w3", 3]]}, "morphism": {})"), "no image for v3");
        rejects(with_source(v3, R"(, "target": {"generators": [["w3", 3]]}, "morphism": {"v3": "w3*w3 +"})"),
                "morphism.v3");
        rejects(with_source(v3, R"(, "orientation": "sideways")"), "orientation");
    }

    TEST_CASE("commands need the right input") {
        ModelFile v3 = cli::parse_model(slurp("v3.json"));
        CHECK_THROWS_AS(cli::run("fiber", &v3, {}), InputError);
        CHECK_THROWS_AS(cli::run("loop", nullptr, {}), InputError);
        CHECK_THROWS_AS(cli::run("frobnicate", &v3, {}), InputError);
        // a morphism that is not a chain map
        ModelFile bad = cli::parse_model(with_source(R"({"generators": [["x2", 2], ["y5", 5]], "differential": {"y5": "x2^3"}})",
                                                     R"(, "target": {"generators": [["x2", 2], ["z5", 5]]},
                                                        "morphism": {"x2": "x2", "y5": "z5"})"));
        CHECK_THROWS_AS(cli::run("fiber", &bad, {}), InputError);
        // not minimal
        ModelFile nm = cli::parse_model(with_source(R"({"generators": [["x3", 3], ["w4", 4]], "differential": {"x3": "w4"}})"));
        CHECK_THROWS_AS(cli::run("loop", &nm, {}), InputError);
    }

    TEST_CASE("fiber report of S^2 -> CP^2") {
        cli::Outcome o = run_file("fiber", "cp2.json");
        CHECK(o.exit_code == 0);
        CHECK(has_line(o.report, "certificates: OK"));
        CHECK(has_line(o.report, "valid\t17"));
        CHECK(has_line(o.report, "generator\tz3\t3\tfree\tcokernel\tD=x2^2\tp=z3"));
        CHECK(has_line(o.report, "generator\tsy5\t4\tdivided\tsuspension\tD=y5 - x2*z3\tp=0"));
        CHECK(has_line(o.report, "cofiber differential: zero"));
        CHECK(has_line(o.report, "product\tz3\tz3\t0"));
        CHECK(has_line(o.report, "product\tsy5\tsy5\t2*[gamma(2,sy5)]"));
        CHECK(has_line(o.report, "pth-power\tsy5\t4\t20\tzero"));
        for (int n = 0; n <= 17; ++n)
            CHECK(has_line(o.report, std::to_string(n) + "\t" + (n % 4 == 0 || n % 4 == 3 ? "1" : "0")));
        // fewer degrees on request
        cli::Outcome s = run_file("fiber", "cp2.json", {12, false});
        CHECK(has_line(s.report, "valid\t7"));
        CHECK_FALSE(has_line(s.report, "8\t1"));
    }

    TEST_CASE("loop and bar reports") {
        cli::Outcome v = run_file("loop", "v3.json");
        CHECK(v.exit_code == 0);
        CHECK(has_line(v.report, "generator\tsv3\t2\tdivided\tsuspension\tD=v3\tp=0"));
        cli::Outcome s = run_file("loop", "cp2_model.json");
        CHECK(s.exit_code == 0);
        CHECK(has_line(s.report, "generator\tsy5\t4\tdivided\tsuspension\tD=y5 - sx2*x2^2\tp=0"));

        cli::Outcome t = run_file("tor-dims", "f5x2.json");
        CHECK(t.exit_code == 0);
        CHECK(has_line(t.report, "3\t1"));
        CHECK(has_line(t.report, "5\t0"));
        cli::Outcome c = run_file("tor-dims", "cp2.json", {14, false});
        CHECK(has_line(c.report, "valid\t12"));
        for (int n = 0; n <= 12; ++n)
            CHECK(has_line(c.report, std::to_string(n) + "\t" + (n % 4 == 0 || n % 4 == 3 ? "1" : "0")));

        cli::Outcome b = run_file("bar-homology", "cp2_model.json", {8, false});
        CHECK(b.exit_code == 0);
        CHECK(has_line(b.report, "4\t4\t1"));
        CHECK(has_line(b.report, "5\t7\t1"));
    }

    TEST_CASE("pth power command") {
        cli::Outcome d = run_file("check-pth-powers", "f5x2.json", {std::nullopt, true});
        CHECK(d.exit_code == 1);
        CHECK(has_line(d.report, "pth-power\tx2\t2\t10\tnonzero"));
        CHECK(run_file("check-pth-powers", "cp2.json").exit_code == 0);
        CHECK(run_file("check-pth-powers", "v3.json").exit_code == 0);
    }

    TEST_CASE("reports are deterministic") {
        for (const char* file : {"cp2.json", "cp2_model.json"}) {
            const std::string cmd = std::string(file) == "cp2.json" ? "fiber" : "loop";
            std::string first = run_file(cmd, file).report;
            for (int i = 0; i < 3; ++i) CHECK(run_file(cmd, file).report == first);
        }
    }

    TEST_CASE("selftest passes") {
        cli::Outcome o = cli::selftest();
        INFO(o.report);
        CHECK(o.exit_code == 0);
        CHECK(o.report.find("FAIL") == std::string::npos);
    }
}
