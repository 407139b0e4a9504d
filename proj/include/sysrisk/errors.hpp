#pragma once

#include <stdexcept>
#include <string>

namespace sysrisk {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed files, invalid parameters, out-of-domain data.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical routine failed to produce an answer.
class SolverError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    using InputError::InputError;
};

class NegativeObligation : public InputError {
public:
    NegativeObligation(int row, int col)
        : InputError("negative obligation at (" + std::to_string(row) + ", " + std::to_string(col) + ")"),
          row(row), col(col) {}
    int row;
    int col;
};

class ZeroSocietyObligation : public InputError {
public:
    explicit ZeroSocietyObligation(int bank)
        : InputError("bank " + std::to_string(bank) + " has no obligation to society"), bank(bank) {}
    int bank;
};

class NonzeroDiagonal : public InputError {
public:
    explicit NonzeroDiagonal(int bank)
        : InputError("bank " + std::to_string(bank) + " owes itself a nonzero amount"), bank(bank) {}
    int bank;
};

class NegativeAssets : public InputError {
public:
    explicit NegativeAssets(int bank)
        : InputError("negative external assets for bank " + std::to_string(bank)), bank(bank) {}
    int bank;
};

class NotPositiveDefinite : public InputError {
public:
    using InputError::InputError;
};

class OutOfDomain : public InputError {
public:
    using InputError::InputError;
};

class EmptyDomain : public InputError {
public:
    using InputError::InputError;
};

class NonCoherentRiskMeasure : public InputError {
public:
    using InputError::InputError;
};

class DecompositionMismatch : public SolverError {
public:
    using SolverError::SolverError;
};

class NonConvergence : public SolverError {
public:
    using SolverError::SolverError;
};

class SingularSystem : public SolverError {
public:
    using SolverError::SolverError;
};

class BracketFailure : public SolverError {
public:
    using SolverError::SolverError;
};

class NumericalBreakdown : public SolverError {
public:
    using SolverError::SolverError;
};

}  // namespace sysrisk
