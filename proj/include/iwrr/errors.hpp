// Error categories shared by the library and the command-line tool.
#ifndef IWRR_ERRORS_HPP
#define IWRR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace iwrr {

// A mathematically meaningful failure: an unbounded delay, a diverging
// inverse, a scripted service that goes idle before the horizon.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent user input (configuration files, CLI values).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace iwrr

#endif  // IWRR_ERRORS_HPP
