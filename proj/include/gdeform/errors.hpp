#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdeform {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Expression-text rejected by the parser. Carries the byte offset of the
/// offending token and the token set that would have been accepted there.
struct ParseError : Error {
    std::size_t offset;
    std::string expected;

    ParseError(const std::string& msg, std::size_t offset_, std::string expected_ = {})
        : Error(msg), offset(offset_), expected(std::move(expected_)) {}
};

/// Evaluation failed: function domain violation, division by (near-)zero,
/// non-finite result, unbound variable, jet shape mismatch.
struct EvalError : Error {
    using Error::Error;
};

/// A query point lies outside the chart domain, or a metric failed the
/// positive-definiteness check there.
struct DomainError : Error {
    using Error::Error;
};

/// The deformation hypothesis eps^2 * |grad f|^2 < 1 failed at a point.
/// Carries the witness point and the offending squared gradient norm.
struct ValidityError : Error {
    std::vector<double> point;
    double s;

    ValidityError(const std::string& msg, std::vector<double> point_, double s_)
        : Error(msg), point(std::move(point_)), s(s_) {}
};

/// Malformed manifest (bad JSON, missing/conflicting fields).
struct ManifestError : Error {
    using Error::Error;
};

}  // namespace gdeform
