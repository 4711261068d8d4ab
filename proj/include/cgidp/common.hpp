#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cgidp {

template <int N>
using Vec = std::array<double, N>;

// Errors raised by the library. The CLI maps NumericalError subclasses to
// exit code 3 and everything else derived from Error to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class UnknownPreset : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class UnsupportedDegree : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class InadmissibleState : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class VacuumFormation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CflViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Componentwise arithmetic on fixed-size states and vectors.
template <std::size_t N>
constexpr std::array<double, N> operator+(std::array<double, N> a, const std::array<double, N>& b) {
  for (std::size_t k = 0; k < N; ++k) a[k] += b[k];
  return a;
}

template <std::size_t N>
constexpr std::array<double, N> operator-(std::array<double, N> a, const std::array<double, N>& b) {
  for (std::size_t k = 0; k < N; ++k) a[k] -= b[k];
  return a;
}

template <std::size_t N>
constexpr std::array<double, N> operator*(double s, std::array<double, N> a) {
  for (auto& x : a) x *= s;
  return a;
}

template <std::size_t N>
constexpr std::array<double, N>& operator+=(std::array<double, N>& a, const std::array<double, N>& b) {
  for (std::size_t k = 0; k < N; ++k) a[k] += b[k];
  return a;
}

template <std::size_t N>
constexpr std::array<double, N>& operator-=(std::array<double, N>& a, const std::array<double, N>& b) {
  for (std::size_t k = 0; k < N; ++k) a[k] -= b[k];
  return a;
}

template <std::size_t N>
constexpr double dot(const std::array<double, N>& a, const std::array<double, N>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < N; ++k) s += a[k] * b[k];
  return s;
}

template <std::size_t N>
double norm(const std::array<double, N>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t N>
constexpr std::array<double, N> filled(double v) {
  std::array<double, N> a{};
  a.fill(v);
  return a;
}

// x^n for small integer n (negative allowed); avoids std::pow in hot loops.
constexpr double ipow(double x, int n) {
  if (n < 0) return 1.0 / ipow(x, -n);
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

// Runs fn(i) for i in [0, n) split into contiguous chunks over `threads`
// workers. Each index must write only to its own output slots.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 256) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&fn, &errors, w, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace cgidp
