#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fgsr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes that do not fit together, or a rank larger than the shape allows.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Arguments outside their documented domain (rates, q, empty sets, NaN).
class InputError : public Error {
public:
    using Error::Error;
};

/// Requested factor width smaller than the rank of the matrix being factored.
class InfeasibleRankError : public Error {
public:
    using Error::Error;
};

/// The SVD routine failed to converge.
class SvdError : public Error {
public:
    using Error::Error;
};

/// An iterative solver blew up; carries the objective trace up to the failure.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::vector<double> trace)
        : Error(what), trace_(std::move(trace)) {}

    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

/// File could not be read, parsed or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fgsr
