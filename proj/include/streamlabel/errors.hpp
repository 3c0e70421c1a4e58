#ifndef STREAMLABEL_ERRORS_HPP
#define STREAMLABEL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace streamlabel {

// Caller broke a documented precondition (dimension mismatch, empty input).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Parameters that cannot be satisfied (k larger than the data, cap too small).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unreadable input files.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A metric whose denominator is zero.
class MetricError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace streamlabel

#endif  // STREAMLABEL_ERRORS_HPP
