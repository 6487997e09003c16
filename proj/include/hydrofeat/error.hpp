#pragma once

#include <exception>
#include <string>

namespace hydrofeat {

/// Base class of every exception thrown by the library.
///
/// `reason()` is the bare cause ("zero variance"); `what()` prefixes the
/// station id once one has been attached on the way up.
class Error : public std::exception {
public:
    explicit Error(std::string reason) : reason_(std::move(reason)), message_(reason_) {}

    const char* what() const noexcept override { return message_.c_str(); }
    const std::string& reason() const noexcept { return reason_; }
    const std::string& station_id() const noexcept { return station_id_; }

    void attach_station(std::string station_id) {
        station_id_ = std::move(station_id);
        message_ = "station " + station_id_ + ": " + reason_;
    }

private:
    std::string reason_;
    std::string station_id_;
    std::string message_;
};

/// Malformed file layout (bad header, off-grid coordinate, ...).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Well-formed input carrying invalid content (duplicates, out-of-range values).
class DataError : public Error {
public:
    using Error::Error;
};

class LengthError : public Error {
public:
    using Error::Error;
};

/// Zero-variance input where a scale is required.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// Numerically singular correlation structure.
class ConditioningError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// A pipeline stage needs an output of an earlier stage that is absent.
class DependencyError : public Error {
public:
    using Error::Error;
};

} // namespace hydrofeat
