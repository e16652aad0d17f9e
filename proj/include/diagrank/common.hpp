#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace diagrank {

using complex = std::complex<double>;
using std::int64_t;

// Error taxonomy shared by the whole library. The numeric values line up
// with the CLI exit codes and the C API status codes.
enum class ErrorKind : int {
  invalid_argument = 1,
  parse = 2,
  contract = 3,
  budget = 4,
  internal = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

// Neumaier-compensated accumulator. Summation order stays the caller's;
// the compensation keeps long ascending-index sums near working precision.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class ComplexSum {
 public:
  void add(complex z) noexcept {
    re_.add(z.real());
    im_.add(z.imag());
  }
  complex value() const noexcept { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum re_, im_;
};

inline double sqr(double x) noexcept { return x * x; }
inline double abs2(complex z) noexcept {
  return z.real() * z.real() + z.imag() * z.imag();
}

// Deterministic uniform double in [0,1) from a raw 64-bit draw.
// std::uniform_real_distribution is implementation-defined; this is not.
inline double unit_double(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct Rectangle {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double width() const noexcept { return x1 - x0; }
  double height() const noexcept { return y1 - y0; }
  bool contains(complex z) const noexcept {
    return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 &&
           z.imag() <= y1;
  }
};

}  // namespace diagrank
