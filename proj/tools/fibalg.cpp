#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fibalg/cli.hpp"
#include "fibalg/fiber.hpp"

int main(int argc, char** argv) {
    using namespace fibalg;
    CLI::App app{"Cohomology of homotopy fibers over F_p from minimal Sullivan models"};
    std::string command, input, report;
    std::optional<int> max_degree;
    bool direct = false;
    app.add_option("command", command, "fiber | loop | tor-dims | bar-homology | check-pth-powers | selftest")
        ->required()
        ->check(CLI::IsMember(cli::commands()));
    app.add_option("--input,-i", input, "model file (JSON)");
    app.add_option("--max-degree,-N", max_degree, "truncation degree, overrides the file");
    app.add_option("--report,-o", report, "write the report here instead of stdout");
    app.add_flag("--direct", direct, "check-pth-powers: use the cohomology of the source itself");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    cli::Outcome o;
    try {
        std::optional<cli::ModelFile> model;
        if (!input.empty()) {
            std::ifstream in(input);
            if (!in) throw cli::InputError("cannot read " + input);
            std::stringstream buf;
            buf << in.rdbuf();
            model = cli::parse_model(buf.str());
        }
        o = cli::run(command, model ? &*model : nullptr, {max_degree, direct});
    } catch (const CertificateError& e) {
        std::cerr << "fibalg: certificate failure: " << e.what() << "\n";
        return 1;
    } catch (const FactorizationError& e) {
        std::cerr << "fibalg: factorization failed: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "fibalg: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fibalg: " << e.what() << "\n";
        return 1;
    }

    if (report.empty()) {
        std::cout << o.report;
    } else {
        std::ofstream out(report);
        if (!out) {
            std::cerr << "fibalg: cannot write " << report << "\n";
            return 2;
        }
        out << o.report;
    }
    return o.exit_code;
}
