#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cnl/errors.hpp"

namespace cnl {

/// Conditional probability table P(X, Y | A, B) for N settings and d outcomes
/// per side. Settings and outcomes are 0-based. Storage is row-major in
/// (A, B, X, Y).
class ConditionalDistribution {
 public:
  static constexpr double kClip = 1e-12;

  ConditionalDistribution() = default;

  /// Validates shape, clips entries in [-1e-12, 0) to zero, and checks that
  /// each (A, B) block sums to one within `norm_tol`.
  ConditionalDistribution(int d, int n, std::vector<double> probs,
                          double norm_tol = 1e-12)
      : d_(d), n_(n), probs_(std::move(probs)) {
    if (d < 2) throw invalid_dimension(d);
    if (n < 1) throw invalid_argument("need at least one setting per side");
    const auto expected = static_cast<std::size_t>(d) * d * n * n;
    if (probs_.size() != expected)
      throw dimension_mismatch("probability table has " +
                               std::to_string(probs_.size()) +
                               " entries, expected " + std::to_string(expected));
    for (double& p : probs_) {
      if (!std::isfinite(p) || p < -kClip)
        throw invalid_distribution("probability entry " + std::to_string(p) +
                                   " is negative or not finite");
      if (p < 0.0) p = 0.0;
    }
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        double s = 0.0;
        for (double p : block(a, b)) s += p;
        if (std::abs(s - 1.0) > norm_tol)
          throw normalization_error("block (A=" + std::to_string(a) +
                                    ", B=" + std::to_string(b) + ") sums to " +
                                    std::to_string(s));
      }
    }
  }

  int outcomes() const { return d_; }
  int settings() const { return n_; }
  std::span<const double> probs() const { return probs_; }

  double operator()(int a, int b, int x, int y) const {
    return probs_[index(a, b, x, y)];
  }

  /// The d*d block for setting pair (a, b), indexed x*d + y.
  std::span<const double> block(int a, int b) const {
    check_settings(a, b);
    const auto dd = static_cast<std::size_t>(d_) * d_;
    return std::span<const double>(probs_).subspan(
        (static_cast<std::size_t>(a) * n_ + b) * dd, dd);
  }

  std::vector<double> alice_marginal(int a, int b) const {
    std::vector<double> m(static_cast<std::size_t>(d_), 0.0);
    const auto blk = block(a, b);
    for (int x = 0; x < d_; ++x)
      for (int y = 0; y < d_; ++y)
        m[static_cast<std::size_t>(x)] += blk[static_cast<std::size_t>(x * d_ + y)];
    return m;
  }

  std::vector<double> bob_marginal(int a, int b) const {
    std::vector<double> m(static_cast<std::size_t>(d_), 0.0);
    const auto blk = block(a, b);
    for (int x = 0; x < d_; ++x)
      for (int y = 0; y < d_; ++y)
        m[static_cast<std::size_t>(y)] += blk[static_cast<std::size_t>(x * d_ + y)];
    return m;
  }

 private:
  void check_settings(int a, int b) const {
    if (a < 0 || a >= n_ || b < 0 || b >= n_)
      throw std::out_of_range("setting index out of range");
  }

  std::size_t index(int a, int b, int x, int y) const {
    check_settings(a, b);
    if (x < 0 || x >= d_ || y < 0 || y >= d_)
      throw std::out_of_range("outcome index out of range");
    return ((static_cast<std::size_t>(a) * n_ + b) * d_ + x) * d_ + y;
  }

  int d_ = 0;
  int n_ = 0;
  std::vector<double> probs_;
};

/// Distribution produced by the Born rule on a quantum state.
using JointDistribution = ConditionalDistribution;

}  // namespace cnl
