#pragma once

#include <stdexcept>
#include <string>

namespace cnl {

// Base for every error thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class invalid_dimension : public error {
 public:
  explicit invalid_dimension(int d)
      : error("invalid dimension d=" + std::to_string(d) + " (need d >= 2)") {}
};

class invalid_argument : public error {
 public:
  using error::error;
};

class dimension_mismatch : public error {
 public:
  using error::error;
};

class normalization_error : public error {
 public:
  using error::error;
};

/// Raised when a probability table has an entry below -1e-12 or fails a
/// structural invariant.
class invalid_distribution : public error {
 public:
  using error::error;
};

/// A routine that presumes no-signaling was handed a signaling table.
class signaling_input : public error {
 public:
  explicit signaling_input(double residual)
      : error("input distribution is signaling (residual " +
              std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// No violation up to the search limit. Carries I_N - bound at that limit.
class not_found : public error {
 public:
  not_found(int n_max, double gap)
      : error("no violation for N <= " + std::to_string(n_max)),
        n_max_(n_max),
        gap_(gap) {}
  int n_max() const noexcept { return n_max_; }
  double gap() const noexcept { return gap_; }

 private:
  int n_max_;
  double gap_;
};

class instance_too_large : public error {
 public:
  using error::error;
};

class construction_failure : public error {
 public:
  using error::error;
};

}  // namespace cnl
