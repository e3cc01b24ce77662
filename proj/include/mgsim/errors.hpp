#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mgsim {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A profile has the wrong number of samples.
struct LengthError : Error {
    using Error::Error;
};

/// A value in an input file could not be parsed or is out of range.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t row_index)
        : Error(msg + " (row " + std::to_string(row_index) + ")"), row(row_index) {}
    std::size_t row;
};

/// An argument lies outside its mathematical domain.
struct DomainError : Error {
    using Error::Error;
};

/// A profile is identically zero and cannot be rescaled.
struct DegenerateProfileError : Error {
    using Error::Error;
};

/// A testing-phase reset was requested before train_test_split.
struct SplitError : Error {
    using Error::Error;
};

/// Battery asked to charge and discharge in the same step.
struct SimultaneousChargeError : Error {
    using Error::Error;
};

/// run() called after the episode reached its final step.
struct EpisodeOverError : Error {
    using Error::Error;
};

/// MPC horizon extends past the remaining phase.
struct HorizonError : Error {
    using Error::Error;
};

/// Vector/matrix dimensions of a linear program disagree.
struct ShapeError : Error {
    using Error::Error;
};

/// Invalid benchmark configuration (unknown controller, bad preset, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// A file could not be opened, read or written.
struct IoError : Error {
    using Error::Error;
};

}  // namespace mgsim
