#ifndef MMRADAR_ERRORS_HPP
#define MMRADAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mmradar {

/// Invalid parameters, mismatched dimensions, malformed config files.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (|nu| > 0.5, P_FA not in (0,1), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The Wald statistic was asked to test along an all-zero signature.
class DegenerateSteeringError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// More focus directions requested than transmit elements.
class InfeasibleFocusError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Time index outside the scenario horizon.
class HorizonError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

}  // namespace mmradar

#endif  // MMRADAR_ERRORS_HPP
