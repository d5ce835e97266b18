#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vrpqaoa {

// Lexically broken input documents (instances, models, configs).
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Well-formed input that violates a semantic rule (dimension mismatch,
// negative weight, vehicle count out of range, ...). Maps to CLI exit 2.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exhaustive sweeps and statevector allocation refuse to run past their
// size guards. Maps to CLI exit 3.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The two QUBO builders disagree. Carries the first assignment whose
// energies differ under the two coefficient sets.
struct formulation_mismatch : std::runtime_error {
    formulation_mismatch(const std::string& what, std::vector<int> assignment)
        : std::runtime_error(what), differing_assignment(std::move(assignment)) {}
    std::vector<int> differing_assignment;
};

// An optimizer objective returned NaN or infinity. Carries the point.
struct nonfinite_objective : std::runtime_error {
    nonfinite_objective(const std::string& what, std::vector<double> where)
        : std::runtime_error(what), point(std::move(where)) {}
    std::vector<double> point;
};

}  // namespace vrpqaoa
