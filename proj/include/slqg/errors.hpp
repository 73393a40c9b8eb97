#pragma once

#include <stdexcept>
#include <string>

namespace slqg {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// parameter outside the admissible interval of an operation
class DomainError : public Error {
public:
    using Error::Error;
};

// weight sequence without a partition point
class AdmissibilityError : public Error {
public:
    using Error::Error;
};

// lookup table does not reach the requested range
class CoverageError : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

// the requested sample is attainable but too expensive with the chosen method
class FeasibilityError : public Error {
public:
    using Error::Error;
};

class ParityError : public Error {
public:
    using Error::Error;
};

class ConditioningError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace slqg
