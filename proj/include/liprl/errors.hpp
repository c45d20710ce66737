#pragma once

#include <stdexcept>
#include <string>

namespace liprl {

// Base class for everything thrown by this library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vectors of different lengths fed to a pairwise operation.
class dimension_error : public error {
 public:
  using error::error;
};

// Input outside the mathematical domain (zero vector as a metric point,
// empty sample set, violated hypothesis of a bound, ...).
class domain_error : public error {
 public:
  using error::error;
};

// Parameter outside its allowed range.
class config_error : public error {
 public:
  using error::error;
};

// File-level failures; message carries the path.
class io_error : public error {
 public:
  using error::error;
};

// Not enough data rows/states to run the requested procedure.
class insufficient_data_error : public error {
 public:
  using error::error;
};

// Sampled function has no finite Lipschitz constant (same point, two values).
class ill_posed_error : public error {
 public:
  using error::error;
};

}  // namespace liprl
