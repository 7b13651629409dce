#pragma once

#include <stdexcept>
#include <string>

namespace explab {

// Violated operation precondition (parameter out of range, seed/notion mismatch).
class precondition_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Step-halving check of the integrator exceeded its threshold.
class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& what, double discrepancy)
        : std::runtime_error(what), discrepancy_(discrepancy) {}
    double discrepancy() const noexcept { return discrepancy_; }

private:
    double discrepancy_;
};

// A computation would exceed a hard size limit (refinement explosion, oracle size).
class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operation not defined for the requested direction or data (e.g. backward doubling map).
class unsupported_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace explab
