#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liprl/errors.hpp"

namespace liprl {

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw dimension_error("dot: dimensions differ (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double norm1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

inline double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline bool all_zero(std::span<const double> v) {
  for (double x : v) {
    if (x != 0.0) return false;
  }
  return true;
}

// A point of the state space: a finite, nonzero vector. The metric below is
// undefined at the origin, so "not the zero vector" is enforced here, at
// construction, rather than at every distance call.
class StateVector {
 public:
  explicit StateVector(std::vector<double> coords)
      : coords_(std::move(coords)) {
    if (coords_.empty())
      throw domain_error("StateVector: dimension must be at least 1");
    for (double c : coords_) {
      if (!std::isfinite(c))
        throw domain_error("StateVector: coordinates must be finite");
    }
    if (all_zero(coords_))
      throw domain_error("StateVector: the zero vector is not a valid state");
    norm2_ = liprl::norm2(coords_);
  }

  StateVector(std::initializer_list<double> coords)
      : StateVector(std::vector<double>(coords)) {}

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }
  std::span<const double> span() const { return coords_; }
  double norm2() const { return norm2_; }

  friend bool operator==(const StateVector& a, const StateVector& b) {
    return a.coords_ == b.coords_;
  }

 private:
  std::vector<double> coords_;
  double norm2_ = 0.0;
};

}  // namespace liprl
