#pragma once

#include <stdexcept>
#include <string>

namespace firlab {

/// Invalid user-supplied parameters (variances, eta ranges, grid sizes, config files).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operand shapes do not conform.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite input to a numerical routine.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A routine was asked for a shape outside its technical domain (e.g. N < 2T-2).
class UnsupportedShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested distribution family has no analytic answer.
class UnsupportedFamilyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A statistic was requested that the batch does not carry.
class QueryError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

}  // namespace firlab
