// errors.hpp - exception types shared across the toolkit

#pragma once

#include <stdexcept>
#include <string>

namespace dampsq {

enum class ModulationErrorKind {
    duplicate_tone,
    zero_frequency_tone,
    overdriven,
    too_many_tones,
};

class ModulationError : public std::invalid_argument {
public:
    ModulationError(ModulationErrorKind kind, const std::string& what)
        : std::invalid_argument(what), kind_(kind) {}

    ModulationErrorKind kind() const noexcept { return kind_; }

private:
    ModulationErrorKind kind_;
};

// Argument outside the region where a closed form is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Base for failures of a numerical run (integrator, truncation, positivity).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StepFailure : public NumericError {
public:
    using NumericError::NumericError;
};

class PhysicalityViolation : public NumericError {
public:
    using NumericError::NumericError;
};

class TruncationError : public NumericError {
public:
    using NumericError::NumericError;
};

class PositivityError : public NumericError {
public:
    using NumericError::NumericError;
};

enum class GridErrorKind { too_narrow, mismatch };

class GridError : public std::invalid_argument {
public:
    GridError(GridErrorKind kind, const std::string& what)
        : std::invalid_argument(what), kind_(kind) {}

    GridErrorKind kind() const noexcept { return kind_; }

private:
    GridErrorKind kind_;
};

}  // namespace dampsq
