#pragma once

// The crypto-nonlocal hidden-variable model: local marginals follow the
// pure-state projection rule with respect to a hidden Bloch vector u, while
// correlations are left unrestricted beyond no-signaling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cnl/bloch.hpp"
#include "cnl/errors.hpp"
#include "cnl/qcorr.hpp"
#include "cnl/rng.hpp"

namespace cnl {

/// Bloch vectors a^0 .. a^{d-1} of a projective measurement, one per outcome.
struct MeasurementBasisBloch {
  int d = 0;
  std::vector<BlochVector> vectors;

  /// a^x - a^{x-1}, index taken cyclically (x = 0 pairs with d-1).
  RVector difference(int x) const {
    const auto cur = static_cast<std::size_t>(x);
    const auto prev = static_cast<std::size_t>(mod(x - 1, d));
    return vectors[cur].coords - vectors[prev].coords;
  }
};

inline MeasurementBasisBloch basis_to_bloch(const Basis& basis) {
  if (basis.empty()) throw invalid_argument("empty measurement basis");
  const int d = static_cast<int>(basis.front().size());
  require_dimension(d);
  if (static_cast<int>(basis.size()) != d)
    throw dimension_mismatch("basis needs exactly d vectors");
  const double residual = orthonormality_residual(basis);
  if (residual > 1e-10)
    throw invalid_argument("measurement basis is not orthonormal (residual " +
                           std::to_string(residual) + ")");
  const auto& ops = operator_basis(d);
  MeasurementBasisBloch out{d, {}};
  out.vectors.reserve(basis.size());
  for (const auto& v : basis) out.vectors.push_back(state_to_bloch({v}, ops));
  return out;
}

struct MarginalValue {
  double probability = 0.0;
  /// False when some outcome of the basis gets a negative value, which
  /// happens for sphere points that are not pure states.
  bool valid = true;
};

inline void require_purity(double eta) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw invalid_argument("purity eta must lie in (0, 1]");
}

/// P(X = x | a) = [1 + eta (d-1) a^x.u] / d. Not clamped.
inline MarginalValue marginal(int x, const MeasurementBasisBloch& basis,
                              const BlochVector& u, double eta) {
  require_purity(eta);
  if (x < 0 || x >= basis.d) throw std::out_of_range("outcome out of range");
  const int d = basis.d;
  auto value = [&](int k) {
    return (1.0 + eta * (d - 1) *
                      bloch_overlap(basis.vectors[static_cast<std::size_t>(k)], u)) /
           d;
  };
  MarginalValue out{value(x), true};
  for (int k = 0; k < d; ++k)
    if (value(k) < -1e-12) out.valid = false;
  return out;
}

enum class HiddenMode { sphere_uniform, haar_pure, fixed };

struct HiddenDistribution {
  HiddenMode mode = HiddenMode::sphere_uniform;
  std::optional<BlochVector> fixed;

  static HiddenDistribution sphere() { return {HiddenMode::sphere_uniform, {}}; }
  static HiddenDistribution haar() { return {HiddenMode::haar_pure, {}}; }
  static HiddenDistribution at(BlochVector u) {
    return {HiddenMode::fixed, std::move(u)};
  }
};

/// Parameters of the hidden-variable model. `v` describes Bob's hidden state
/// and does not enter any quantity computed here.
struct LocalModel {
  int d = 2;
  double eta = 1.0;
  HiddenDistribution u = HiddenDistribution::sphere();
  HiddenDistribution v = HiddenDistribution::sphere();

  void validate() const {
    require_dimension(d);
    require_purity(eta);
    for (const auto* h : {&u, &v}) {
      if (h->mode != HiddenMode::fixed) continue;
      if (!h->fixed || h->fixed->dimension != d)
        throw invalid_argument("fixed hidden vector missing or wrong dimension");
      if (std::abs(h->fixed->norm() - 1.0) > 1e-12)
        throw normalization_error("fixed hidden vector is not unit norm");
    }
  }
};

struct BoundEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long long samples = 0;
};

namespace detail {

inline double l_integrand(const std::vector<RVector>& diffs, const RVector& u,
                          double prefactor) {
  double s = 0.0;
  for (const auto& w : diffs) s += std::abs(w.dot(u));
  return prefactor * s;
}

}  // namespace detail

/// Monte Carlo estimate of
///   L = eta (d-1)/d^2 * sum_x < |(a^x - a^{x-1}).u| >_u.
/// Sample i draws u from substream(seed, i).
inline BoundEstimate leggett_l_mc(const MeasurementBasisBloch& basis,
                                  const LocalModel& model, long long n_samples,
                                  std::uint64_t seed) {
  model.validate();
  if (n_samples < 1) throw invalid_argument("need at least one sample");
  if (basis.d != model.d)
    throw dimension_mismatch("basis and model dimensions differ");
  const int d = model.d;
  const double prefactor = model.eta * (d - 1.0) / (double(d) * d);
  std::vector<RVector> diffs;
  for (int x = 0; x < d; ++x) diffs.push_back(basis.difference(x));

  if (model.u.mode == HiddenMode::fixed)
    return {detail::l_integrand(diffs, model.u.fixed->coords, prefactor), 0.0, 1};

  const auto& ops = operator_basis(d);
  std::vector<double> values(static_cast<std::size_t>(n_samples));
  for (long long i = 0; i < n_samples; ++i) {
    auto gen = substream(seed, static_cast<std::uint64_t>(i));
    const RVector u = model.u.mode == HiddenMode::sphere_uniform
                          ? sample_sphere(bloch_size(d), gen)
                          : state_to_bloch(sample_haar_pure(d, gen), ops).coords;
    values[static_cast<std::size_t>(i)] = detail::l_integrand(diffs, u, prefactor);
  }
  const double mean = pairwise_sum(values) / static_cast<double>(n_samples);
  for (double& v : values) v = (v - mean) * (v - mean);
  double stderr_ = 0.0;
  if (n_samples > 1) {
    const double var = pairwise_sum(values) / static_cast<double>(n_samples - 1);
    stderr_ = std::sqrt(var / static_cast<double>(n_samples));
  }
  return {mean, stderr_, n_samples};
}

/// L for u uniform on the whole sphere S^{d^2-2}. Every difference vector
/// has length sqrt(2d/(d-1)), so each term is that length times kappa_{d^2-1}.
inline BoundEstimate leggett_l_analytic(int d, double eta) {
  require_dimension(d);
  require_purity(eta);
  const double diff_len = std::sqrt(2.0 * d / (d - 1.0));
  const double value = eta * (d - 1.0) / (double(d) * d) * d * diff_len *
                       expected_abs_projection(bloch_size(d));
  return {value, 0.0, 0};
}

/// The explicit bound L >= eta * 2(d-1)/d^3 for uniformly distributed u.
inline double uniform_lower_bound(int d, double eta) {
  require_dimension(d);
  require_purity(eta);
  return eta * 2.0 * (d - 1.0) / (double(d) * d * d);
}

/// True when the quantum value falls strictly below the bound.
inline bool violates(double i_n, double bound) { return i_n < bound; }

/// Smallest N <= n_max whose exact I_N lies strictly below
/// uniform_lower_bound(d, eta). Throws not_found with I_{n_max} - bound.
inline int find_ncrit(int d, double eta, int n_max) {
  if (n_max < 2) throw invalid_argument("n_max must be >= 2");
  const double bound = uniform_lower_bound(d, eta);
  double last = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    last = chained_in_exact(d, n);
    if (violates(last, bound)) return n;
  }
  throw not_found(n_max, last - bound);
}

// ---------------------------------------------------------------------------
// Measurement families in orthogonal Bloch subspaces

/// A copy of the chained settings conjugated by `unitary` on Alice's side
/// and by its complex conjugate on Bob's side; (U (x) U*) leaves the
/// maximally entangled state invariant, so I_N is unchanged.
struct MeasurementFamily {
  CMatrix unitary;
  LocalBases bases;
  /// Orthonormal columns spanning Alice's difference vectors a^x - a^{x-1}
  /// over all settings of the family.
  Eigen::MatrixXd span;
};

namespace detail {

inline Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& m,
                                           double tol = 1e-9) {
  if (m.cols() == 0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol * std::max(1.0, sv(0))) ++rank;
  return svd.matrixU().leftCols(rank);
}

inline Eigen::MatrixXd difference_span(const std::vector<Basis>& alice) {
  const int d = static_cast<int>(alice.front().size());
  Eigen::MatrixXd cols(bloch_size(d),
                       static_cast<Eigen::Index>(alice.size()) * d);
  Eigen::Index c = 0;
  for (const auto& basis : alice) {
    const auto bloch = basis_to_bloch(basis);
    for (int x = 0; x < d; ++x) cols.col(c++) = bloch.difference(x);
  }
  return orthonormal_columns(cols);
}

inline MeasurementFamily conjugate_family(const LocalBases& base,
                                          const CMatrix& u) {
  MeasurementFamily f{u, {}, {}};
  const CMatrix uc = u.conjugate();
  for (const auto& basis : base.alice) {
    Basis b;
    for (const auto& v : basis) b.push_back(u * v);
    f.bases.alice.push_back(std::move(b));
  }
  for (const auto& basis : base.bob) {
    Basis b;
    for (const auto& v : basis) b.push_back(uc * v);
    f.bases.bob.push_back(std::move(b));
  }
  f.span = difference_span(f.bases.alice);
  return f;
}

inline double commutator_residual(const Eigen::MatrixXd& s1,
                                  const Eigen::MatrixXd& s2) {
  const Eigen::MatrixXd p1 = s1 * s1.transpose();
  const Eigen::MatrixXd p2 = s2 * s2.transpose();
  return (p1 * p2 - p2 * p1).cwiseAbs().maxCoeff();
}

/// exp(-i theta H) for Hermitian H.
inline CMatrix hermitian_exp(const CMatrix& h, double theta) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  CVector phases(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    phases(i) = std::polar(1.0, -theta * es.eigenvalues()(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline CMatrix permutation_matrix(const std::vector<int>& perm) {
  const int d = static_cast<int>(perm.size());
  CMatrix p = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) p(perm[static_cast<std::size_t>(j)], j) = 1.0;
  return p;
}

inline CMatrix fourier_matrix(int d) {
  CMatrix f(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      f(j, k) = std::polar(1.0 / std::sqrt(double(d)),
                           2.0 * std::numbers::pi * j * k / d);
  return f;
}

/// Deterministic pool of conjugating unitaries, tried in order: quarter
/// rotations exp(-i pi/4 lambda_i), permutations, then Fourier transforms
/// composed with permutations. All permutations are used for d <= 5;
/// beyond that only cyclic shifts and the reversal.
inline std::vector<CMatrix> candidate_unitaries(int d) {
  std::vector<CMatrix> out;
  for (const auto& m : operator_basis(d).matrices)
    out.push_back(hermitian_exp(m, std::numbers::pi / 4.0));
  std::vector<std::vector<int>> perms;
  std::vector<int> p(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) p[static_cast<std::size_t>(j)] = j;
  if (d <= 5) {
    while (std::next_permutation(p.begin(), p.end())) perms.push_back(p);
  } else {
    for (int s = 1; s < d; ++s) {
      std::vector<int> q(p.size());
      for (int j = 0; j < d; ++j) q[static_cast<std::size_t>(j)] = (j + s) % d;
      perms.push_back(std::move(q));
    }
    perms.emplace_back(p.rbegin(), p.rend());
  }
  for (const auto& q : perms) out.push_back(permutation_matrix(q));
  const CMatrix f = fourier_matrix(d);
  out.push_back(f);
  out.push_back(f.adjoint());
  for (const auto& q : perms) {
    const CMatrix pm = permutation_matrix(q);
    out.push_back(f * pm);
    out.push_back(f.adjoint() * pm);
  }
  return out;
}

}  // namespace detail

/// k measurement families whose difference-vector spans are pairwise
/// orthogonal in the sense of perpendicular subspaces: their projectors
/// commute (residual <= 1e-9), so the spans split into a shared part and
/// mutually orthogonal remainders. Each family after the first must add
/// directions not covered by the earlier ones. Family 1 is the input.
/// Candidates are chosen greedily by the number of new directions.
inline std::vector<MeasurementFamily> multi_plane_sets(
    const ChainedSettings& settings, int k) {
  const int d = settings.d;
  require_dimension(d);
  if (k < 1 || k > bloch_size(d) - 1)
    throw invalid_argument("family count k must lie in [1, d^2-2]");
  const LocalBases base = cglmp_bases(settings);
  std::vector<MeasurementFamily> out;
  out.push_back(detail::conjugate_family(base, CMatrix::Identity(d, d)));
  if (k == 1) return out;

  Eigen::MatrixXd covered = out.front().span;
  const auto pool = detail::candidate_unitaries(d);
  while (static_cast<int>(out.size()) < k) {
    std::optional<MeasurementFamily> best;
    Eigen::MatrixXd best_cover;
    Eigen::Index best_gain = 0;
    for (const auto& u : pool) {
      auto fam = detail::conjugate_family(base, u);
      bool compatible = true;
      for (const auto& prev : out)
        if (detail::commutator_residual(prev.span, fam.span) > 1e-9) {
          compatible = false;
          break;
        }
      if (!compatible) continue;
      Eigen::MatrixXd joined(covered.rows(), covered.cols() + fam.span.cols());
      joined << covered, fam.span;
      Eigen::MatrixXd cover = detail::orthonormal_columns(joined);
      const Eigen::Index gain = cover.cols() - covered.cols();
      if (gain > best_gain) {
        best_gain = gain;
        best = std::move(fam);
        best_cover = std::move(cover);
      }
    }
    if (!best)
      throw construction_failure(
          "no conjugation extends the covered Bloch subspace beyond dimension " +
          std::to_string(covered.cols()) + " of " +
          std::to_string(bloch_size(d)) + " after " +
          std::to_string(out.size()) + " families");
    covered = std::move(best_cover);
    out.push_back(std::move(*best));
  }
  return out;
}

/// I_N of every family on the maximally entangled state.
inline std::vector<double> family_chained_in(
    const std::vector<MeasurementFamily>& families) {
  std::vector<double> out;
  for (const auto& f : families) {
    const int d = static_cast<int>(f.bases.alice.front().size());
    out.push_back(chained_in(joint_distribution(maximally_entangled(d), f.bases)));
  }
  return out;
}

struct EscapeReport {
  std::vector<double> projection;  // |P_family u| per family
  std::vector<bool> flagged;       // projection below 1e-9
  /// True when every family is flagged, so u avoids all constraints.
  bool escapes() const {
    return std::all_of(flagged.begin(), flagged.end(), [](bool f) { return f; });
  }
};

inline EscapeReport fixed_u_escape_test(
    const BlochVector& u, const std::vector<MeasurementFamily>& families) {
  if (std::abs(u.norm() - 1.0) > 1e-12)
    throw normalization_error("hidden vector must be unit norm");
  EscapeReport r;
  for (const auto& f : families) {
    if (f.span.rows() != u.coords.size())
      throw dimension_mismatch("family and hidden vector dimensions differ");
    const double p = (f.span.transpose() * u.coords).norm();
    r.projection.push_back(p);
    r.flagged.push_back(p < 1e-9);
  }
  return r;
}

}  // namespace cnl
