#pragma once

#include <stdexcept>
#include <string>

namespace kpz {

/// Root of the lab's error taxonomy. Each subclass maps to one CLI exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class DomainError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class StatisticsError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

class DependencyError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 5; }
};

class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 6; }
};

class CalibrationError : public StatisticsError {
public:
    using StatisticsError::StatisticsError;
};

/// Quadrature order below what the requested accuracy needs.
class AccuracyError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Replica unusable for the requested quantity (e.g. censored argmax).
class SampleInvalidError : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace kpz
