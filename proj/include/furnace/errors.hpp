#ifndef FURNACE_ERRORS_HPP
#define FURNACE_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace furnace {

/// Coarse category used for CLI exit codes and stage-tagged rethrows.
enum class ErrorKind {
    generic,        // exit 1
    schema,         // config/schema/data problems, exit 2
    model_quality,  // exit 3
    infeasible,     // exit 4
    io,             // exit 5
};

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg, ErrorKind kind = ErrorKind::generic)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

/// Malformed input schema: unknown/missing CSV column, bad config key, wrong JSON shape.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error(msg, ErrorKind::schema) {}
};

/// A cell or token could not be parsed as the expected type.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t row, const std::string& column)
        : Error(msg, ErrorKind::schema), row(row), column(column) {}
    std::size_t row;  // 1-based data row
    std::string column;
};

/// Input file had no data rows.
class EmptyInputError : public Error {
public:
    explicit EmptyInputError(const std::string& msg) : Error(msg, ErrorKind::schema) {}
};

/// lower >= upper, or a value outside its declared bounds.
class BoundsError : public Error {
public:
    explicit BoundsError(const std::string& msg) : Error(msg, ErrorKind::schema) {}
};

/// Too few rows/samples for the requested operation.
class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& msg) : Error(msg, ErrorKind::schema) {}
};

/// A column or objective range has zero variance where nonzero is required.
class DegenerateVarianceError : public Error {
public:
    explicit DegenerateVarianceError(const std::string& msg, std::string name = {})
        : Error(msg, ErrorKind::schema), name(std::move(name)) {}
    std::string name;  // offending column/dimension, when known
};

/// Vector arity does not match the expected dimension.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error(msg, ErrorKind::schema) {}
};

/// Non-finite or otherwise out-of-domain numeric input.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg, ErrorKind::schema) {}
};

/// An object was used before reaching the required state (e.g. unevaluated individual).
class StateError : public Error {
public:
    explicit StateError(const std::string& msg) : Error(msg) {}
};

/// An objective returned a non-finite value; carries the offending genome.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& msg, std::vector<double> genome)
        : Error(msg), genome(std::move(genome)) {}
    std::vector<double> genome;
};

/// Fitted surrogates failed the retention threshold.
class ModelQualityError : public Error {
public:
    explicit ModelQualityError(const std::string& msg) : Error(msg, ErrorKind::model_quality) {}
};

/// No feasible point found; carries the least-violating genome seen.
class InfeasibilityError : public Error {
public:
    InfeasibilityError(const std::string& msg, std::vector<double> genome)
        : Error(msg, ErrorKind::infeasible), genome(std::move(genome)) {}
    std::vector<double> genome;
};

/// Requested computation exceeds a hard size guard.
class SizeError : public Error {
public:
    explicit SizeError(const std::string& msg) : Error(msg, ErrorKind::schema) {}
};

/// Filesystem failure, with path context in the message.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg, ErrorKind::io) {}
};

}  // namespace furnace

#endif
