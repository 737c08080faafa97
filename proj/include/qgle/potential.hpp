#pragma once

// Polynomial external potential V(X) = sum_i c_i X^i, degree <= 6.

#include <array>
#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "qgle/error.hpp"

namespace qgle {

class PotentialSpec {
public:
  static constexpr std::size_t kMaxDegree = 6;

  PotentialSpec() = default;
  explicit PotentialSpec(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
    if (c_.empty()) c_.push_back(0.0);
    if (c_.size() - 1 > kMaxDegree)
      throw ValidationError("potential", "degree " + std::to_string(c_.size() - 1) + " exceeds 6");
    for (double x : c_)
      if (!std::isfinite(x)) throw ValidationError("potential", "non-finite coefficient");
  }
  PotentialSpec(std::initializer_list<double> coeffs) : PotentialSpec(std::vector<double>(coeffs)) {}

  static PotentialSpec free() { return PotentialSpec{0.0}; }
  /// (1/2) w^2 X^2
  static PotentialSpec harmonic(double omega) { return PotentialSpec{0.0, 0.0, 0.5 * omega * omega}; }
  /// (1/2) w^2 X^2 + (g/4) X^4
  static PotentialSpec quartic_well(double omega = 1.0, double g = 1.0) {
    return PotentialSpec{0.0, 0.0, 0.5 * omega * omega, 0.0, 0.25 * g};
  }

  const std::vector<double>& coefficients() const noexcept { return c_; }
  std::size_t degree() const noexcept { return c_.size() - 1; }
  bool is_free() const noexcept { return degree() == 0; }
  /// True when V' is linear, so the quantum dispersion of the force vanishes.
  bool is_quadratic() const noexcept { return degree() <= 2; }

  /// n-th derivative at x (n = 0 is V itself).
  double derivative(unsigned n, double x) const noexcept {
    double acc = 0.0;
    for (std::size_t i = c_.size(); i-- > n;) {
      double f = 1.0;
      for (std::size_t j = 0; j < n; ++j) f *= static_cast<double>(i - j);
      acc = acc * x + f * c_[i];
    }
    return acc;
  }
  double operator()(double x) const noexcept { return derivative(0, x); }
  double d1(double x) const noexcept { return derivative(1, x); }
  double d2(double x) const noexcept { return derivative(2, x); }
  double d3(double x) const noexcept { return derivative(3, x); }

  /// Bounded below on the whole line.
  bool confining() const noexcept { return degree() >= 2 && degree() % 2 == 0 && c_.back() > 0.0; }

  /// Global minimum on [lo, hi] by grid scan plus Newton polishing on V'.
  double global_minimum(double lo, double hi, std::size_t n = 4001) const {
    double best_x = lo, best_v = (*this)(lo);
    for (std::size_t i = 1; i < n; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
      const double v = (*this)(x);
      if (v < best_v) {
        best_v = v;
        best_x = x;
      }
    }
    double x = best_x;
    for (int it = 0; it < 50; ++it) {
      const double h2 = d2(x);
      if (!(h2 > 0.0)) break;
      const double step = d1(x) / h2;
      x -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    return (x >= lo && x <= hi && (*this)(x) <= best_v) ? x : best_x;
  }

  /// sqrt(V'') at the global minimum: the linearized frequency.
  double linearized_frequency(double lo = -10.0, double hi = 10.0) const {
    const double curv = d2(global_minimum(lo, hi));
    if (!(curv > 0.0)) throw ValidationError("omega_tilde", "V'' <= 0 at the minimum; linearization undefined");
    return std::sqrt(curv);
  }

private:
  std::vector<double> c_{0.0};
};

}  // namespace qgle
