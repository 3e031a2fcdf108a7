#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace abelbias {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: bad orders, shape mismatches, invariant violations.
class InputError : public Error {
public:
    using Error::Error;
};

/// An enumeration would visit more points or instances than the configured budget allows.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, std::size_t required, std::size_t budget)
        : Error(what + ": needs " + std::to_string(required) + " points, budget is " +
                std::to_string(budget)),
          required_(required),
          budget_(budget) {}

    std::size_t required() const noexcept { return required_; }
    std::size_t budget() const noexcept { return budget_; }

private:
    std::size_t required_;
    std::size_t budget_;
};

/// A hypothesis of an algorithm does not hold for the given input. `witness()` names the
/// offending generator tuple or point.
class PreconditionViolation : public Error {
public:
    PreconditionViolation(const std::string& what, std::string witness)
        : Error(what + " (witness: " + witness + ")"), witness_(std::move(witness)) {}

    const std::string& witness() const noexcept { return witness_; }

private:
    std::string witness_;
};

/// Two distinct algebraic reals could not be separated within the precision cap.
class UndecidedComparison : public Error {
public:
    using Error::Error;
};

/// Syntax or semantic error in an MLMAP/MLCERT document.
class ParseError : public InputError {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t column)
        : InputError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                     ": " + msg),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace abelbias
