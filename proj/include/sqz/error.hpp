#pragma once

#include <stdexcept>
#include <string>

namespace sqz {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a closed-form model.
class DomainError : public Error {
public:
    using Error::Error;
};

class InvalidBudgetError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Inconsistent scenario, plan or command-line configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Two spectra that must share a bin grid do not.
class GridMismatchError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace sqz
