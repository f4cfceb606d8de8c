#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

namespace emrelax {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using CVec3 = std::array<cplx, 3>;

/// Input outside the mathematical domain of an operation (vacuum density,
/// enthalpy outside the invertible range).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent arguments (shape mismatch, empty grid, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A simulation left its admissible state space (vacuum, CFL violation).
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm2(const Vec3& a) { return dot(a, a); }

template <class T, class U>
inline auto cross(const std::array<T, 3>& a, const std::array<U, 3>& b) {
  using R = decltype(a[0] * b[0]);
  return std::array<R, 3>{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                          a[0] * b[1] - a[1] * b[0]};
}

}  // namespace emrelax
