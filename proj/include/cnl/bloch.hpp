#pragma once

// Generalized Bloch-space machinery for a single qudit.
//
// A density operator on C^d is written
//
//   rho = I/d + sqrt((d-1)/(2d)) * sum_i u_i lambda_i,
//
// with lambda_i the d^2-1 generalized Gell-Mann matrices, Tr(lambda_i
// lambda_j) = 2 delta_ij. With this scale a pure state maps to a unit vector
// and Tr(rho_a rho_u) = [1 + (d-1) a.u] / d.

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cnl/errors.hpp"

namespace cnl {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline void require_dimension(int d) {
  if (d < 2) throw invalid_dimension(d);
}

/// Number of real coordinates in the Bloch space of a qudit.
constexpr int bloch_size(int d) { return d * d - 1; }

inline double bloch_scale(int d) {
  return std::sqrt((d - 1.0) / (2.0 * d));
}

struct OperatorBasis {
  int dimension = 0;
  std::vector<CMatrix> matrices;
};

/// Generalized Gell-Mann basis. Ordering is fixed so coordinates are
/// reproducible: symmetric pairs (j<k) in lexicographic order, then
/// antisymmetric pairs in the same order, then the d-1 diagonal matrices
/// diag(1,..,1,-l,0,..)*sqrt(2/(l(l+1))) for l = 1..d-1.
///
/// For d = 2 this is exactly (sigma_x, sigma_y, sigma_z).
inline OperatorBasis generate_basis(int d) {
  require_dimension(d);
  OperatorBasis out;
  out.dimension = d;
  out.matrices.reserve(static_cast<std::size_t>(bloch_size(d)));
  const cplx i{0.0, 1.0};
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      CMatrix m = CMatrix::Zero(d, d);
      m(j, k) = 1.0;
      m(k, j) = 1.0;
      out.matrices.push_back(std::move(m));
    }
  }
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      CMatrix m = CMatrix::Zero(d, d);
      m(j, k) = -i;
      m(k, j) = i;
      out.matrices.push_back(std::move(m));
    }
  }
  for (int l = 1; l < d; ++l) {
    CMatrix m = CMatrix::Zero(d, d);
    const double s = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) m(j, j) = s;
    m(l, l) = -l * s;
    out.matrices.push_back(std::move(m));
  }
  return out;
}

/// Shared, lazily built basis for dimension d. Thread-safe; references stay
/// valid for the lifetime of the program.
inline const OperatorBasis& operator_basis(int d) {
  require_dimension(d);
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const OperatorBasis>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[d];
  if (!slot) slot = std::make_unique<const OperatorBasis>(generate_basis(d));
  return *slot;
}

struct BlochVector {
  int dimension = 0;
  RVector coords;

  BlochVector() = default;
  BlochVector(int d, RVector c) : dimension(d), coords(std::move(c)) {
    require_dimension(d);
    if (coords.size() != bloch_size(d))
      throw dimension_mismatch("Bloch vector of length " +
                               std::to_string(coords.size()) +
                               " does not match d=" + std::to_string(d));
  }

  double norm() const { return coords.norm(); }
};

struct PureState {
  CVector amplitudes;

  int dimension() const { return static_cast<int>(amplitudes.size()); }
};

inline PureState basis_state(int d, int j) {
  require_dimension(d);
  PureState s{CVector::Zero(d)};
  s.amplitudes(j) = 1.0;
  return s;
}

/// Bloch vector of a pure state; u_i = <psi|lambda_i|psi> / (2 * scale).
inline BlochVector state_to_bloch(const PureState& psi,
                                  const OperatorBasis& basis) {
  const int d = psi.dimension();
  if (d != basis.dimension)
    throw dimension_mismatch("state and operator basis dimensions differ");
  const double norm2 = psi.amplitudes.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-12)
    throw normalization_error("pure state has squared norm " +
                              std::to_string(norm2));
  const double inv = 1.0 / (2.0 * bloch_scale(d));
  RVector u(bloch_size(d));
  for (int i = 0; i < bloch_size(d); ++i) {
    const auto& m = basis.matrices[static_cast<std::size_t>(i)];
    u(i) = psi.amplitudes.dot(m * psi.amplitudes).real() * inv;
  }
  return {d, std::move(u)};
}

inline BlochVector state_to_bloch(const PureState& psi) {
  return state_to_bloch(psi, operator_basis(psi.dimension()));
}

/// rho = I/d + scale * sum_i u_i lambda_i. Works for any coordinates, not
/// only physical ones.
inline CMatrix bloch_to_density(const BlochVector& u) {
  const int d = u.dimension;
  const auto& basis = operator_basis(d);
  CMatrix rho = CMatrix::Identity(d, d) / static_cast<double>(d);
  const double s = bloch_scale(d);
  for (int i = 0; i < bloch_size(d); ++i)
    rho += s * u.coords(i) * basis.matrices[static_cast<std::size_t>(i)];
  return rho;
}

/// True when the coordinates describe a pure state: the reconstructed
/// operator is positive semidefinite with a single unit eigenvalue.
inline bool is_physical_pure(const BlochVector& u, double tol = 1e-9) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(bloch_to_density(u),
                                            Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();  // ascending
  for (Eigen::Index i = 0; i + 1 < ev.size(); ++i)
    if (std::abs(ev(i)) > tol) return false;
  return std::abs(ev(ev.size() - 1) - 1.0) <= tol;
}

inline double bloch_overlap(const BlochVector& a, const BlochVector& u) {
  if (a.dimension != u.dimension || a.coords.size() != u.coords.size())
    throw dimension_mismatch("Bloch vectors live in different spaces");
  return a.coords.dot(u.coords);
}

/// Uniform point on S^{n-1}: isotropic Gaussian, normalized.
template <class URBG>
RVector sample_sphere(int n, URBG& gen) {
  if (n < 1) throw invalid_argument("sphere dimension must be >= 1");
  std::normal_distribution<double> normal;
  RVector v(n);
  double r2 = 0.0;
  do {
    for (int i = 0; i < n; ++i) v(i) = normal(gen);
    r2 = v.squaredNorm();
  } while (r2 == 0.0);
  return v / std::sqrt(r2);
}

/// Haar-random pure state: complex Gaussian amplitudes, normalized.
template <class URBG>
PureState sample_haar_pure(int d, URBG& gen) {
  require_dimension(d);
  std::normal_distribution<double> normal;
  CVector a(d);
  for (int i = 0; i < d; ++i) {
    const double re = normal(gen);
    const double im = normal(gen);
    a(i) = cplx{re, im};
  }
  a /= a.norm();
  return {std::move(a)};
}

/// kappa_n = E|w.u| for unit w and u uniform on S^{n-1}
///         = Gamma(n/2) / (sqrt(pi) Gamma((n+1)/2)).
inline double expected_abs_projection(int n) {
  if (n < 2) throw invalid_argument("expected_abs_projection needs n >= 2");
  return std::exp(std::lgamma(n / 2.0) - std::lgamma((n + 1) / 2.0)) /
         std::sqrt(std::numbers::pi);
}

}  // namespace cnl
