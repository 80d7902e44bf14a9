#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gvx {

// Invalid arguments: maps to CLI exit code 2.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Everything numerical that can go wrong at run time: maps to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class CancellationAlarm : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConditioningError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BudgetExceeded : public NumericalError {
public:
    BudgetExceeded(const std::string& what, std::size_t needed)
        : NumericalError(what), needed_(needed) {}
    // Order (moment index or term count) that would have been required.
    std::size_t needed() const noexcept { return needed_; }

private:
    std::size_t needed_;
};

}  // namespace gvx
