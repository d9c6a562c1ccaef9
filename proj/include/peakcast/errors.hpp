#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace peakcast {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class EmptySeriesError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class HistoryEmptyError : public Error {
public:
    using Error::Error;
};

/// A compartment left [-1e-6, 1+1e-6] during integration.
class BlowupError : public Error {
public:
    explicit BlowupError(std::size_t step)
        : Error("SIR integration left the unit simplex at step " + std::to_string(step)), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

}  // namespace peakcast
