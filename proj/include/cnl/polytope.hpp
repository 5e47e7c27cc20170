#pragma once

// No-signaling correlation tooling: the 1/d-normalized statistical distance,
// checks of the marginal bound on chained correlations, and the local
// (deterministic) baseline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cnl/crypto.hpp"
#include "cnl/distribution.hpp"
#include "cnl/errors.hpp"
#include "cnl/qcorr.hpp"
#include "cnl/rng.hpp"

namespace cnl {

namespace detail {

inline void require_normalized(std::span<const double> p, double tol = 1e-9) {
  double s = 0.0;
  for (double v : p) {
    if (v < -1e-12) throw normalization_error("negative probability");
    s += v;
  }
  if (std::abs(s - 1.0) > tol)
    throw normalization_error("distribution sums to " + std::to_string(s));
}

}  // namespace detail

/// Delta(P, Q) = sum_x |P(x) - Q(x)| / d.
inline double statistical_distance(std::span<const double> p,
                                   std::span<const double> q) {
  if (p.size() != q.size() || p.size() < 2)
    throw dimension_mismatch("distributions must share d >= 2 outcomes");
  detail::require_normalized(p);
  detail::require_normalized(q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s / static_cast<double>(p.size());
}

/// Delta(P_X, P_{X+1}) = sum_x |P(x) - P(x+1 mod d)| / d.
inline double shift_distance(std::span<const double> p) {
  if (p.size() < 2) throw dimension_mismatch("need d >= 2 outcomes");
  detail::require_normalized(p);
  const std::size_t d = p.size();
  double s = 0.0;
  for (std::size_t x = 0; x < d; ++x) s += std::abs(p[x] - p[(x + 1) % d]);
  return s / static_cast<double>(d);
}

struct NoSignalingReport {
  double residual = 0.0;  // largest spread of a marginal over remote settings
  bool passed = true;
};

inline NoSignalingReport is_no_signaling(const ConditionalDistribution& dist,
                                         double tol) {
  const int n = dist.settings();
  const int d = dist.outcomes();
  double r = 0.0;
  for (int fixed = 0; fixed < n; ++fixed) {
    std::vector<double> lo(static_cast<std::size_t>(2 * d),
                           std::numeric_limits<double>::infinity());
    std::vector<double> hi(static_cast<std::size_t>(2 * d),
                           -std::numeric_limits<double>::infinity());
    for (int remote = 0; remote < n; ++remote) {
      const auto pa = dist.alice_marginal(fixed, remote);
      const auto pb = dist.bob_marginal(remote, fixed);
      for (int x = 0; x < d; ++x) {
        const auto i = static_cast<std::size_t>(x);
        const auto j = static_cast<std::size_t>(d + x);
        lo[i] = std::min(lo[i], pa[i]);
        hi[i] = std::max(hi[i], pa[i]);
        lo[j] = std::min(lo[j], pb[i]);
        hi[j] = std::max(hi[j], pb[i]);
      }
    }
    for (std::size_t i = 0; i < lo.size(); ++i) r = std::max(r, hi[i] - lo[i]);
  }
  return {r, r <= tol};
}

struct DeterministicStrategy {
  std::vector<int> alice;  // outcome for each setting
  std::vector<int> bob;
};

/// Table of a deterministic local strategy.
inline ConditionalDistribution deterministic_distribution(
    int d, const DeterministicStrategy& s) {
  const int n = static_cast<int>(s.alice.size());
  if (static_cast<int>(s.bob.size()) != n)
    throw dimension_mismatch("strategy sides have different lengths");
  std::vector<double> p(static_cast<std::size_t>(n) * n * d * d, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int x = s.alice[static_cast<std::size_t>(a)];
      const int y = s.bob[static_cast<std::size_t>(b)];
      p[((static_cast<std::size_t>(a) * n + b) * d + x) * d + y] = 1.0;
    }
  return {d, n, std::move(p)};
}

/// Random no-signaling table: (1 - mix) * (convex mixture of deterministic
/// local strategies) + mix * (convex mixture of modulo boxes with X uniform
/// and Y = X + f(A, B) mod d). Both building blocks are no-signaling, so the
/// result is too without any projection step.
inline ConditionalDistribution random_no_signaling(int d, int n, double mix,
                                                   std::uint64_t seed) {
  require_dimension(d);
  if (n < 1) throw invalid_argument("need N >= 1");
  if (!(mix >= 0.0 && mix <= 1.0)) throw invalid_argument("mix must be in [0,1]");
  SplitMix64 gen = substream(seed, 0);
  std::uniform_int_distribution<int> outcome(0, d - 1);
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto nn = static_cast<std::size_t>(n);
  const auto dd = static_cast<std::size_t>(d);
  std::vector<double> p(nn * nn * dd * dd, 0.0);
  auto at = [&](int a, int b, int x, int y) -> double& {
    return p[((static_cast<std::size_t>(a) * nn + b) * dd + x) * dd + y];
  };

  auto random_weights = [&](int k) {
    std::vector<double> w(static_cast<std::size_t>(k));
    double s = 0.0;
    for (double& v : w) s += (v = unit(gen) + 1e-3);
    for (double& v : w) v /= s;
    return w;
  };

  if (mix < 1.0) {
    const int k = count(gen);
    for (double w : random_weights(k)) {
      DeterministicStrategy s{std::vector<int>(nn), std::vector<int>(nn)};
      for (auto& v : s.alice) v = outcome(gen);
      for (auto& v : s.bob) v = outcome(gen);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          at(a, b, s.alice[static_cast<std::size_t>(a)],
             s.bob[static_cast<std::size_t>(b)]) += (1.0 - mix) * w;
    }
  }
  if (mix > 0.0) {
    const int k = count(gen);
    for (double w : random_weights(k)) {
      // Half of the boxes follow the chain (Y_i = X_i, X_{i+1} = Y_i,
      // X_1 + 1 = Y_N) so that I_N can be pushed towards zero.
      const bool chained = unit(gen) < 0.5;
      std::vector<int> f(nn * nn);
      for (auto& v : f) v = outcome(gen);
      if (chained) {
        for (int i = 0; i + 1 < n; ++i) f[static_cast<std::size_t>((i + 1) * n + i)] = 0;
        f[static_cast<std::size_t>(n - 1)] = mod(1, d);  // (A=0, B=N-1)
        for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i * n + i)] = 0;
      }
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int x = 0; x < d; ++x)
            at(a, b, x, mod(x + f[static_cast<std::size_t>(a * n + b)], d)) +=
                mix * w / d;
    }
  }
  return {d, n, std::move(p)};
}

struct Theorem1Report {
  std::vector<double> shift_distances;  // Delta(P_{X|A}, P_{X+1|A}) per A
  double max_shift_distance = 0.0;
  double chained = 0.0;  // I_N
  double slack = 0.0;    // I_N - max Delta
  bool holds = true;     // slack >= -1e-9
};

/// Checks that every setting's shift distance of Alice's marginal is bounded
/// by I_N. This per-setting form implies the bound averaged over any hidden
/// variable distribution. Rejects signaling input (residual > 1e-9).
inline Theorem1Report verify_theorem1(const ConditionalDistribution& dist) {
  const auto ns = is_no_signaling(dist, 1e-9);
  if (!ns.passed) throw signaling_input(ns.residual);
  Theorem1Report r;
  r.chained = chained_in(dist);
  for (int a = 0; a < dist.settings(); ++a) {
    const double delta = shift_distance(dist.alice_marginal(a, 0));
    r.shift_distances.push_back(delta);
    r.max_shift_distance = std::max(r.max_shift_distance, delta);
  }
  r.slack = r.chained - r.max_shift_distance;
  r.holds = r.slack >= -1e-9;
  return r;
}

struct LemmaReport {
  double p_equal = 0.0;   // P(X_A = Y_B)
  double distance = 0.0;  // Delta(P_{X_A}, P_{Y_B})
  bool holds = true;      // p_equal <= 1 - distance + 1e-9
};

inline LemmaReport lemma_equality_bound(const ConditionalDistribution& dist,
                                        int a, int b) {
  const int d = dist.outcomes();
  LemmaReport r;
  for (int x = 0; x < d; ++x) r.p_equal += dist(a, b, x, x);
  r.distance =
      statistical_distance(dist.alice_marginal(a, b), dist.bob_marginal(a, b));
  r.holds = r.p_equal <= 1.0 - r.distance + 1e-9;
  return r;
}

/// I_N of a deterministic strategy, from the outcome lists directly.
inline int deterministic_in(int d, const DeterministicStrategy& s) {
  const int n = static_cast<int>(s.alice.size());
  int total = 0;
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    total += mod(s.alice[ui] - s.bob[ui], d);
    if (i + 1 < n)
      total += mod(s.bob[ui] - s.alice[ui + 1], d);
    else
      total += mod(s.bob[ui] - s.alice[0] - 1, d);
  }
  return total;
}

struct LhvResult {
  double min_in = 0.0;
  DeterministicStrategy witness;
  long long strategies = 0;
};

inline constexpr long long kMaxStrategies = 100'000'000;

/// Exact minimum of I_N over all d^{2N} deterministic strategies. Mixtures
/// cannot go lower because I_N is linear in the distribution.
inline LhvResult lhv_min_in(int d, int n) {
  require_dimension(d);
  if (n < 1) throw invalid_argument("need N >= 1");
  long long count = 1;
  for (int i = 0; i < 2 * n; ++i) {
    count *= d;
    if (count > kMaxStrategies)
      throw instance_too_large("d^(2N) exceeds the enumeration limit of 1e8");
  }
  std::vector<int> digits(static_cast<std::size_t>(2 * n), 0);
  DeterministicStrategy s{std::vector<int>(static_cast<std::size_t>(n)),
                          std::vector<int>(static_cast<std::size_t>(n))};
  LhvResult best{std::numeric_limits<double>::infinity(), s, count};
  for (long long c = 0; c < count; ++c) {
    for (int i = 0; i < n; ++i) {
      s.alice[static_cast<std::size_t>(i)] = digits[static_cast<std::size_t>(i)];
      s.bob[static_cast<std::size_t>(i)] = digits[static_cast<std::size_t>(n + i)];
    }
    const double v = deterministic_in(d, s);
    if (v < best.min_in) {
      best.min_in = v;
      best.witness = s;
    }
    for (auto& dg : digits) {  // odometer increment
      if (++dg < d) break;
      dg = 0;
    }
  }
  return best;
}

struct ContradictionCertificate {
  bool exists = false;      // false when a1 == a2
  double max_min_overlap = 1.0;  // max_u min(a1.u, a2.u) over unit u
  double gap = 0.0;         // 1 - max_min_overlap
  RVector maximizer;
};

/// A deterministic outcome for two Alice settings requires a1.u = a2.u = 1.
/// The best any unit u can do is the normalized bisector, reaching
/// (1 + a1.a2)/|a1 + a2| = sqrt((1 + a1.a2)/2) < 1 for distinct unit vectors.
inline ContradictionCertificate deterministic_crypto_contradiction(
    const BlochVector& a1, const BlochVector& a2) {
  if (a1.dimension != a2.dimension)
    throw dimension_mismatch("measurement vectors in different spaces");
  if (std::abs(a1.norm() - 1.0) > 1e-10 || std::abs(a2.norm() - 1.0) > 1e-10)
    throw normalization_error("measurement vectors must be unit norm");
  ContradictionCertificate c;
  if ((a1.coords - a2.coords).norm() <= 1e-12) {
    c.maximizer = a1.coords;
    return c;
  }
  c.exists = true;
  const RVector sum = a1.coords + a2.coords;
  if (sum.norm() <= 1e-12) {
    // Antipodal: any u orthogonal to a1 gives min = 0, the best possible.
    RVector e = RVector::Zero(a1.coords.size());
    Eigen::Index k = 0;
    a1.coords.cwiseAbs().minCoeff(&k);
    e(k) = 1.0;
    e -= e.dot(a1.coords) * a1.coords;
    c.maximizer = e.normalized();
    c.max_min_overlap = 0.0;
  } else {
    c.maximizer = sum.normalized();
    c.max_min_overlap = (1.0 + a1.coords.dot(a2.coords)) / sum.norm();
  }
  c.gap = 1.0 - c.max_min_overlap;
  return c;
}

/// Certificate for outcome x1 of basis1 and outcome x2 of basis2.
inline ContradictionCertificate deterministic_crypto_contradiction(
    const MeasurementBasisBloch& basis1, int x1,
    const MeasurementBasisBloch& basis2, int x2) {
  if (basis1.d != basis2.d) throw dimension_mismatch("bases differ in d");
  if (x1 < 0 || x1 >= basis1.d || x2 < 0 || x2 >= basis2.d)
    throw std::out_of_range("outcome out of range");
  return deterministic_crypto_contradiction(
      basis1.vectors[static_cast<std::size_t>(x1)],
      basis2.vectors[static_cast<std::size_t>(x2)]);
}

}  // namespace cnl
