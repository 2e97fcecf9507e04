#pragma once

#include <stdexcept>
#include <string>

namespace cvdsim {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller supplied an argument outside its documented domain.
struct InvalidParameterError : Error {
    using Error::Error;
};

/// Input data violated a schema, referential-integrity, or value contract.
struct DataContractError : Error {
    using Error::Error;
};

/// A field or file could not be parsed.
struct ParseError : DataContractError {
    using DataContractError::DataContractError;
};

/// Baseline-hazard calibration could not reach the target.
struct CalibrationError : Error {
    using Error::Error;
};

/// Model fitting failed (non-convergence, singular information).
struct FitError : Error {
    using Error::Error;
};

}  // namespace cvdsim
