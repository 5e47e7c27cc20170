#pragma once

// Quantum predictions for the chained CGLMP experiment on the maximally
// entangled qudit pair.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cnl/bloch.hpp"
#include "cnl/distribution.hpp"
#include "cnl/errors.hpp"

namespace cnl {

/// Phases of the chained settings. alpha[A] = (A + 1/2)/N and
/// beta[B] = (B + 1)/N for 0-based A, B (the 1-based forms (A-1/2)/N, B/N).
struct ChainedSettings {
  int d = 0;
  int n = 0;
  std::vector<double> alpha;
  std::vector<double> beta;
};

inline ChainedSettings make_chained_settings(int d, int n) {
  require_dimension(d);
  if (n < 1) throw invalid_argument("need N >= 1 measurement settings");
  ChainedSettings s{d, n, {}, {}};
  s.alpha.reserve(static_cast<std::size_t>(n));
  s.beta.reserve(static_cast<std::size_t>(n));
  for (int a = 1; a <= n; ++a) s.alpha.push_back((a - 0.5) / n);
  for (int b = 1; b <= n; ++b) s.beta.push_back(static_cast<double>(b) / n);
  return s;
}

/// d orthonormal vectors, one per outcome.
using Basis = std::vector<CVector>;

struct LocalBases {
  std::vector<Basis> alice;
  std::vector<Basis> bob;
};

/// max |<e_i|e_j> - delta_ij| over the basis.
inline double orthonormality_residual(const Basis& basis) {
  double r = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const cplx g = basis[i].dot(basis[j]);
      r = std::max(r, std::abs(g - cplx{i == j ? 1.0 : 0.0, 0.0}));
    }
  return r;
}

/// Alice: |X_A> = d^{-1/2} sum_j exp[ 2 pi i j (X - alpha_A)/d] |j>
/// Bob:   |Y_B> = d^{-1/2} sum_j exp[-2 pi i j (Y - beta_B)/d] |j>
inline LocalBases cglmp_bases(const ChainedSettings& s) {
  require_dimension(s.d);
  const int d = s.d;
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  const double w = 2.0 * std::numbers::pi / d;
  auto make = [&](double phase, double sign) {
    Basis basis;
    basis.reserve(static_cast<std::size_t>(d));
    for (int x = 0; x < d; ++x) {
      CVector v(d);
      for (int j = 0; j < d; ++j)
        v(j) = std::polar(norm, sign * w * j * (x - phase));
      basis.push_back(std::move(v));
    }
    return basis;
  };
  LocalBases out;
  for (double a : s.alpha) out.alice.push_back(make(a, +1.0));
  for (double b : s.beta) out.bob.push_back(make(b, -1.0));
  return out;
}

/// (1/sqrt d) sum_j |j>|j>, index j*d + k for |j>_A |k>_B.
inline CVector maximally_entangled(int d) {
  require_dimension(d);
  CVector psi = CVector::Zero(d * d);
  for (int j = 0; j < d; ++j) psi(j * d + j) = 1.0 / std::sqrt(double(d));
  return psi;
}

/// Born rule: P(X, Y | A, B) = |(<X_A| (x) <Y_B|) |psi>|^2.
inline JointDistribution joint_distribution(const CVector& state,
                                            const LocalBases& bases) {
  if (bases.alice.empty() || bases.alice.size() != bases.bob.size())
    throw dimension_mismatch("Alice and Bob need the same number of settings");
  const int d = static_cast<int>(bases.alice.front().size());
  if (state.size() != d * d)
    throw dimension_mismatch("state does not match measurement dimension");
  const int n = static_cast<int>(bases.alice.size());
  // Psi(j, k) = <j k|psi>; amplitude = a^dagger Psi conj(b).
  const CMatrix psi = Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic,
                                                     Eigen::Dynamic,
                                                     Eigen::RowMajor>>(
      state.data(), d, d);
  std::vector<double> p(static_cast<std::size_t>(n) * n * d * d);
  std::size_t idx = 0;
  for (int a = 0; a < n; ++a) {
    const auto& ab = bases.alice[static_cast<std::size_t>(a)];
    if (static_cast<int>(ab.size()) != d)
      throw dimension_mismatch("basis does not have d vectors");
    for (int b = 0; b < n; ++b) {
      const auto& bb = bases.bob[static_cast<std::size_t>(b)];
      if (static_cast<int>(bb.size()) != d)
        throw dimension_mismatch("basis does not have d vectors");
      for (int x = 0; x < d; ++x) {
        const CVector row =
            (ab[static_cast<std::size_t>(x)].adjoint() * psi).transpose();
        for (int y = 0; y < d; ++y)
          p[idx++] = std::norm(bb[static_cast<std::size_t>(y)].dot(row));
      }
    }
  }
  return JointDistribution(d, n, std::move(p));
}

inline JointDistribution joint_distribution(const CVector& state,
                                            const ChainedSettings& s) {
  return joint_distribution(state, cglmp_bases(s));
}

/// Closed form of the Born probability for the chained settings:
/// sin^2(pi t) / (d^3 sin^2(pi t/d)), t = Y - X + alpha_A - beta_B, with the
/// limit 1/d where t is a multiple of d.
inline double cglmp_probability(int d, double t) {
  const double s = std::sin(std::numbers::pi * t / d);
  if (std::abs(s) < 1e-12) return 1.0 / d;
  const double num = std::sin(std::numbers::pi * t);
  return num * num / (double(d) * d * d * s * s);
}

inline int mod(int v, int d) {
  const int r = v % d;
  return r < 0 ? r + d : r;
}

/// sum_k k * P([sign*(X - Y) + offset]_d = k) for setting pair (a, b).
inline double expected_mod(const ConditionalDistribution& dist, int a, int b,
                           int sign, int offset) {
  if (sign != 1 && sign != -1) throw invalid_argument("sign must be +1 or -1");
  const int d = dist.outcomes();
  const auto blk = dist.block(a, b);
  double e = 0.0;
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      e += mod(sign * (x - y) + offset, d) *
           blk[static_cast<std::size_t>(x * d + y)];
  return e;
}

/// I_N = sum_i <[X_i - Y_i]> + <[Y_i - X_{i+1}]> with X_{N+1} := X_1 + 1.
inline double chained_in(const ConditionalDistribution& dist) {
  const int n = dist.settings();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total += expected_mod(dist, i, i, +1, 0);
    if (i + 1 < n)
      total += expected_mod(dist, i + 1, i, -1, 0);
    else
      total += expected_mod(dist, 0, i, -1, -1);
  }
  return total;
}

/// Exact I_N of the chained settings on the maximally entangled state,
/// evaluated from the closed-form probabilities on the 2N setting pairs that
/// enter the sum. Agrees with chained_in(joint_distribution(...)).
inline double chained_in_exact(int d, int n) {
  const ChainedSettings s = make_chained_settings(d, n);
  auto term = [d](double phase, int sign, int offset) {
    double e = 0.0;
    for (int x = 0; x < d; ++x)
      for (int y = 0; y < d; ++y)
        e += mod(sign * (x - y) + offset, d) *
             cglmp_probability(d, y - x + phase);
    return e;
  };
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    total += term(s.alpha[ui] - s.beta[ui], +1, 0);
    if (i + 1 < n)
      total += term(s.alpha[ui + 1] - s.beta[ui], -1, 0);
    else
      total += term(s.alpha[0] - s.beta[ui], -1, -1);
  }
  return total;
}

struct GammaValue {
  int d = 0;
  double gamma = 0.0;
};

/// gamma(d) = pi^2/(4 d^2) * sum_{j=1}^{d-1} j / sin^2(pi j/d).
inline GammaValue gamma(int d) {
  require_dimension(d);
  double sum = 0.0;
  for (int j = 1; j < d; ++j) {
    const double s = std::sin(std::numbers::pi * j / d);
    sum += j / (s * s);
  }
  return {d, std::numbers::pi * std::numbers::pi / (4.0 * d * d) * sum};
}

/// Leading-order I_N = 2 gamma / N.
inline double asymptotic_in(int d, int n) {
  if (n < 1) throw invalid_argument("need N >= 1 measurement settings");
  return 2.0 * gamma(d).gamma / n;
}

}  // namespace cnl
