#ifndef OCCSPOT_ERROR_HPP
#define OCCSPOT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace occspot {

// Error categories map onto CLI exit codes: config 2, data 3, numerical 4.
// Precondition violations on in-memory values throw std::invalid_argument.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace occspot

#endif  // OCCSPOT_ERROR_HPP
