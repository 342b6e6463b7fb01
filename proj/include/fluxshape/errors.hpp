#pragma once

#include <stdexcept>
#include <string>

namespace fluxshape {

/// Invalid argument or violated precondition. CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a meaningful answer.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Condition II cannot be satisfied by adjusting the top harmonic alone.
class DegenerateDesignError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// C*Z_L + D vanishes for the requested termination.
class SingularTerminationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A frequency target lies outside the codomain of the local flux branch.
class OutOfRangeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Quadratures too small to define a phase.
class DegeneratePhaseError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Error raised inside one stage of the extraction pipeline.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& what, bool validation)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), validation_(validation) {}

    const std::string& stage() const noexcept { return stage_; }
    /// True when the stage rejected its input rather than failing numerically.
    bool validation() const noexcept { return validation_; }

private:
    std::string stage_;
    bool validation_;
};

} // namespace fluxshape
