#ifndef HYDROSAMPLE_ERRORS_HPP
#define HYDROSAMPLE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hydrosample {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid input: malformed files, broken preconditions, bad configuration.
/// Maps to CLI exit code 1.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Failure while computing: singular systems, diverging training, I/O trouble.
/// Maps to CLI exit code 2.
class RuntimeError : public Error {
public:
    explicit RuntimeError(const std::string& msg) : Error(msg) {}
};

} // namespace hydrosample

#endif
