#pragma once

#include <stdexcept>
#include <string>

namespace pgo {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input too close to a singular point of the operation (e.g. normalizing ~0).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

// Structural problem with a pose graph: bad vertex ids, disconnected graph.
class GraphError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

// Non-finite iterate, singular normal equations, or an exhausted sampler.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SolverDiverged : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace pgo
