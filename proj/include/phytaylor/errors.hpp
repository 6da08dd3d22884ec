#pragma once

#include <stdexcept>
#include <string>

namespace phytaylor {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct FileError : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// Exact integer count would not fit the result type.
struct OverflowError : Error {
    using Error::Error;
};

// Composed monomial noise is zero; the data-to-noise ratio is undefined.
struct SingularDnr : Error {
    using Error::Error;
};

// Suppressor parameter condition |rho| >= |h + w| * |kappa| fails.
struct ConditionViolated : Error {
    using Error::Error;
};

struct PlanInconsistent : Error {
    using Error::Error;
};

struct KnowledgeUnrepresentable : Error {
    using Error::Error;
};

struct NonFiniteValue : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& what, long line_no)
        : Error(what + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
    long line;
};

struct HashMismatch : Error {
    using Error::Error;
};

struct VersionUnknown : Error {
    using Error::Error;
};

struct ModelNotPolynomial : Error {
    using Error::Error;
};

struct Unrevisable : Error {
    using Error::Error;
};

struct NoRealSolution : Error {
    using Error::Error;
};

struct DegenerateQuadratic : Error {
    using Error::Error;
};

struct UnsupportedDimension : Error {
    using Error::Error;
};

// Simulated trajectory left the numerically sane range.
struct BlowUp : Error {
    using Error::Error;
};

struct HorizonExceeded : Error {
    using Error::Error;
};

}  // namespace phytaylor
