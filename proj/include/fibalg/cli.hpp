#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fibalg/algebra.hpp"
#include "fibalg/linalg.hpp"

namespace fibalg::cli {

/// Malformed model file or flags; exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A model file: one or two free models and optionally a morphism between
/// them, all truncated at max_degree.
struct ModelFile {
    Residue prime = 0;
    int max_degree = 0;
    Direction orientation = Direction::cochain;  // grading used by the bar commands
    std::shared_ptr<const FreeCDGA> source;
    std::shared_ptr<const FreeCDGA> target;        // may be null
    std::optional<std::vector<Element>> morphism;  // images of source generators in target
};

ModelFile parse_model(const std::string& text);
/// Canonical JSON form; parse_model(print_model(m)) reproduces m.
std::string print_model(const ModelFile& m);

struct Options {
    std::optional<int> max_degree;
    bool direct = false;  // check-pth-powers on the source's own cohomology
};

struct Outcome {
    int exit_code = 0;
    std::string report;
};

const std::vector<std::string>& commands();
/// Runs one command; `model` may be null only for selftest. Input errors
/// become exit code 2, certificate failures exit code 1.
Outcome run(const std::string& command, const ModelFile* model, const Options& opts);
Outcome selftest();

}  // namespace fibalg::cli
