#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace transactive {

/// Base of every error raised by the library. Anything deriving from this is a
/// runtime failure of the simulation (exit code 2 at the CLI), except
/// ValidationError and ParseError which mean the input was rejected (exit 1).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownAgentError : public Error {
public:
    using Error::Error;
};

class EmptyTopologyError : public Error {
public:
    using Error::Error;
};

class DisconnectedError : public Error {
public:
    using Error::Error;
};

class CycleError : public Error {
public:
    using Error::Error;
};

class OverlayMismatchError : public Error {
public:
    using Error::Error;
};

class IncompleteTableError : public Error {
public:
    using Error::Error;
};

class NonpositivePriceError : public Error {
public:
    using Error::Error;
};

class ZeroDemandError : public Error {
public:
    using Error::Error;
};

class ZeroGeneratorError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, double lower, double upper)
        : Error(what), lower_(lower), upper_(upper) {}

    // Interval of total generation that cannot be matched by total demand.
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }

private:
    double lower_;
    double upper_;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// Collects every violation found while validating an input, not just the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> issues);

    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    std::vector<std::string> issues_;
};

}  // namespace transactive
