#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cnl/crypto.hpp"
#include "oracles.hpp"

namespace cnl {

namespace {

MeasurementBasisBloch cglmp_bloch(int d, int n, int setting) {
  return basis_to_bloch(cglmp_bases(make_chained_settings(d, n)).alice[setting]);
}

Basis computational_basis(int d) {
  Basis b;
  for (int j = 0; j < d; ++j) b.push_back(basis_state(d, j).amplitudes);
  return b;
}

}  // namespace

TEST(crypto, computational_qubit_basis_is_antipodal) {
  const auto m = basis_to_bloch(computational_basis(2));
  EXPECT_NEAR((m.vectors[0].coords - RVector::Unit(3, 2)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((m.vectors[1].coords + RVector::Unit(3, 2)).norm(), 0.0, 1e-15);
}

TEST(crypto, basis_bloch_invariants) {
  for (int d = 2; d <= 6; ++d)
    for (int a = 0; a < 4; ++a) {
      const auto m = cglmp_bloch(d, 4, a);
      RVector sum = RVector::Zero(bloch_size(d));
      for (int x = 0; x < d; ++x) {
        sum += m.vectors[x].coords;
        for (int y = 0; y < d; ++y) {
          if (x == y) continue;
          EXPECT_NEAR(bloch_overlap(m.vectors[x], m.vectors[y]), -1.0 / (d - 1), 1e-10);
        }
        EXPECT_NEAR(m.difference(x).norm(), std::sqrt(2.0 * d / (d - 1)), 1e-10);
      }
      EXPECT_LT(sum.norm(), 1e-10);
    }
}

TEST(crypto, basis_overlap_matches_state_oracle) {
  const auto bases = cglmp_bases(make_chained_settings(3, 5));
  const auto m0 = basis_to_bloch(bases.alice[0]);
  const auto m3 = basis_to_bloch(bases.alice[3]);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      EXPECT_NEAR(bloch_overlap(m0.vectors[x], m3.vectors[y]),
                  oracle::overlap_from_states(bases.alice[0][x], bases.alice[3][y]),
                  1e-12);
}

TEST(crypto, non_orthonormal_basis_rejected) {
  Basis b = computational_basis(3);
  b[1] = b[0];
  EXPECT_THROW(basis_to_bloch(b), invalid_argument);
  EXPECT_THROW(basis_to_bloch(Basis{}), invalid_argument);
}

TEST(crypto, marginal_rule) {
  const auto m = cglmp_bloch(3, 2, 0);
  // Aligned with outcome 1.
  auto r = marginal(1, m, m.vectors[1], 1.0);
  EXPECT_NEAR(r.probability, 1.0, 1e-12);
  EXPECT_TRUE(r.valid);
  // The state of outcome 0 is orthogonal to outcome 1.
  r = marginal(1, m, m.vectors[0], 1.0);
  EXPECT_NEAR(r.probability, 0.0, 1e-12);
  EXPECT_TRUE(r.valid);
  // u orthogonal to every a^x: the diagonal directions are untouched by the
  // Fourier-type bases.
  const BlochVector diag{3, RVector::Unit(8, 7)};
  for (int x = 0; x < 3; ++x) {
    EXPECT_NEAR(bloch_overlap(m.vectors[x], diag), 0.0, 1e-12);
    EXPECT_NEAR(marginal(x, m, diag, 0.4).probability, 1.0 / 3.0, 1e-12);
  }
  EXPECT_THROW(marginal(0, m, diag, 0.0), invalid_argument);
  EXPECT_THROW(marginal(0, m, diag, 1.5), invalid_argument);
  EXPECT_THROW(marginal(3, m, diag, 1.0), std::out_of_range);
}

TEST(crypto, marginal_flags_unphysical_points) {
  // -a^0 is a unit vector but not a state; outcome 0 gets 1/d (1 - (d-1)).
  const auto m = cglmp_bloch(3, 2, 0);
  const BlochVector anti{3, -m.vectors[0].coords};
  const auto r = marginal(0, m, anti, 1.0);
  EXPECT_NEAR(r.probability, -1.0 / 3.0, 1e-12);
  EXPECT_FALSE(r.valid);
}

TEST(crypto, marginals_of_physical_states_are_distributions) {
  for (int d = 2; d <= 5; ++d) {
    const auto m = cglmp_bloch(d, 3, 1);
    for (int t = 0; t < 100; ++t) {
      auto g = substream(3, static_cast<std::uint64_t>(t));
      const auto u = state_to_bloch(sample_haar_pure(d, g));
      for (double eta : {0.3, 1.0}) {
        double s = 0.0;
        for (int x = 0; x < d; ++x) {
          const auto r = marginal(x, m, u, eta);
          EXPECT_TRUE(r.valid);
          EXPECT_GE(r.probability, -1e-10);
          EXPECT_LE(r.probability, 1.0 + 1e-10);
          s += r.probability;
        }
        EXPECT_NEAR(s, 1.0, 1e-10);
      }
    }
  }
}

TEST(crypto, analytic_bound_values) {
  EXPECT_NEAR(leggett_l_analytic(2, 1.0).value, 0.5, 1e-14);
  // (2/3) sqrt3 kappa_8, kappa_8 = Gamma(4)/(sqrt(pi) Gamma(4.5)).
  const double k8 = 6.0 / (std::sqrt(std::numbers::pi) * std::tgamma(4.5));
  EXPECT_NEAR(leggett_l_analytic(3, 1.0).value, 2.0 / 3.0 * std::sqrt(3.0) * k8, 1e-14);
  EXPECT_NEAR(leggett_l_analytic(3, 1.0).value, 0.336048088638, 1e-11);
  EXPECT_NEAR(leggett_l_analytic(3, 0.5).value, 0.5 * 0.336048088638, 1e-11);
  EXPECT_EQ(leggett_l_analytic(3, 1.0).std_error, 0.0);
}

TEST(crypto, uniform_lower_bound_values) {
  EXPECT_DOUBLE_EQ(uniform_lower_bound(3, 1.0), 4.0 / 27.0);
  EXPECT_DOUBLE_EQ(uniform_lower_bound(2, 1.0), 0.25);
  EXPECT_DOUBLE_EQ(uniform_lower_bound(3, 0.5), 2.0 / 27.0);
  EXPECT_THROW(uniform_lower_bound(3, 0.0), invalid_argument);
  for (int d = 2; d <= 8; ++d)
    EXPECT_GE(leggett_l_analytic(d, 1.0).value, uniform_lower_bound(d, 1.0));
}

TEST(crypto, mc_fixed_direction) {
  const auto m = cglmp_bloch(3, 2, 0);
  LocalModel model{3, 1.0, HiddenDistribution::at({3, RVector::Unit(8, 6)}),
                   HiddenDistribution::sphere()};
  const auto est = leggett_l_mc(m, model, 10, 1);
  EXPECT_NEAR(est.value, 0.0, 1e-14);
  EXPECT_EQ(est.std_error, 0.0);
  // Along a^0 the estimate is exact: (d-1)/d^2 sum_x |(a^x - a^{x-1}).a^0|.
  model.u = HiddenDistribution::at(m.vectors[0]);
  const double expected = 2.0 / 9.0 * (1.5 + 0.0 + 1.5);
  EXPECT_NEAR(leggett_l_mc(m, model, 10, 1).value, expected, 1e-12);
}

TEST(crypto, mc_rejects_bad_models) {
  const auto m = cglmp_bloch(3, 2, 0);
  LocalModel bad{3, 1.0, HiddenDistribution::at({3, RVector::Ones(8)}),
                 HiddenDistribution::sphere()};
  EXPECT_THROW(leggett_l_mc(m, bad, 10, 1), normalization_error);
  LocalModel wrong_d{2, 1.0, HiddenDistribution::sphere(), HiddenDistribution::sphere()};
  EXPECT_THROW(leggett_l_mc(m, wrong_d, 10, 1), dimension_mismatch);
  LocalModel ok{3, 1.0, HiddenDistribution::sphere(), HiddenDistribution::sphere()};
  EXPECT_THROW(leggett_l_mc(m, ok, 0, 1), invalid_argument);
}

TEST(crypto, mc_is_seed_deterministic) {
  const auto m = cglmp_bloch(3, 2, 0);
  const LocalModel model{3, 1.0, HiddenDistribution::sphere(), HiddenDistribution::sphere()};
  const auto a = leggett_l_mc(m, model, 1000, 42);
  const auto b = leggett_l_mc(m, model, 1000, 42);
  const auto c = leggett_l_mc(m, model, 1000, 43);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_NE(a.value, c.value);
}

TEST(crypto, mc_matches_analytic_sphere) {
  for (int d = 2; d <= 6; ++d) {
    const LocalModel model{d, 1.0, HiddenDistribution::sphere(), HiddenDistribution::sphere()};
    const auto est = leggett_l_mc(cglmp_bloch(d, 3, 1), model, 200'000, 9);
    EXPECT_LT(std::abs(est.value - leggett_l_analytic(d, 1.0).value), 3 * est.std_error)
        << "d=" << d;
    EXPECT_GE(est.value, uniform_lower_bound(d, 1.0) - 5 * est.std_error);
  }
}

TEST(crypto, mc_purity_scales_estimate) {
  const auto m = cglmp_bloch(4, 2, 0);
  const LocalModel full{4, 1.0, HiddenDistribution::sphere(), HiddenDistribution::sphere()};
  const LocalModel half{4, 0.5, HiddenDistribution::sphere(), HiddenDistribution::sphere()};
  EXPECT_NEAR(leggett_l_mc(m, half, 5000, 8).value,
              0.5 * leggett_l_mc(m, full, 5000, 8).value, 1e-15);
}

TEST(crypto, l_independent_of_basis_in_chain) {
  const LocalModel model{3, 1.0, HiddenDistribution::sphere(), HiddenDistribution::sphere()};
  const auto e0 = leggett_l_mc(cglmp_bloch(3, 7, 0), model, 200'000, 10);
  const auto e5 = leggett_l_mc(cglmp_bloch(3, 7, 5), model, 200'000, 10);
  EXPECT_LT(std::abs(e0.value - e5.value), 3 * std::hypot(e0.std_error, e5.std_error));
}

TEST(crypto, haar_mode_runs_and_respects_bound) {
  // Qubits: Haar states are uniform on S^2, so both modes agree.
  const LocalModel haar2{2, 1.0, HiddenDistribution::haar(), HiddenDistribution::sphere()};
  const auto est = leggett_l_mc(cglmp_bloch(2, 2, 0), haar2, 100'000, 4);
  EXPECT_LT(std::abs(est.value - 0.5), 3 * est.std_error);
  const LocalModel haar3{3, 1.0, HiddenDistribution::haar(), HiddenDistribution::sphere()};
  const auto est3 = leggett_l_mc(cglmp_bloch(3, 2, 0), haar3, 50'000, 4);
  EXPECT_GT(est3.value, uniform_lower_bound(3, 1.0));
}

TEST(crypto, ncrit_values) {
  EXPECT_EQ(find_ncrit(3, 1.0, 100), 15);
  EXPECT_EQ(find_ncrit(2, 1.0, 100), 5);
  // d = 2 check by the closed form 2N sin^2(pi/4N).
  EXPECT_LT(10.0 * std::pow(std::sin(std::numbers::pi / 20), 2), 0.25);
  EXPECT_GT(8.0 * std::pow(std::sin(std::numbers::pi / 16), 2), 0.25);
  // eta = 0.5 at d = 3: first N with I_N < 2/27 from a direct scan.
  int scan = 0;
  for (int n = 1; n <= 200 && !scan; ++n)
    if (oracle::chained_in_born(3, n) < 2.0 / 27.0) scan = n;
  EXPECT_EQ(find_ncrit(3, 0.5, 200), scan);
  EXPECT_EQ(scan, 30);
}

TEST(crypto, ncrit_not_found_carries_gap) {
  try {
    find_ncrit(3, 0.1, 5);
    FAIL() << "expected not_found";
  } catch (const not_found& e) {
    EXPECT_EQ(e.n_max(), 5);
    EXPECT_NEAR(e.gap(), chained_in_exact(3, 5) - uniform_lower_bound(3, 0.1), 1e-15);
    EXPECT_GT(e.gap(), 0.0);
  }
  EXPECT_THROW(find_ncrit(3, 1.0, 1), invalid_argument);
}

TEST(crypto, ncrit_monotone_in_purity) {
  for (int d = 2; d <= 5; ++d) {
    int prev = find_ncrit(d, 0.5, 2000);
    for (double eta : {0.7, 0.9, 1.0}) {
      const int cur = find_ncrit(d, eta, 2000);
      EXPECT_LE(cur, prev);
      prev = cur;
    }
  }
}

TEST(crypto, strict_violation) {
  EXPECT_FALSE(violates(0.25, 0.25));
  EXPECT_TRUE(violates(0.2499, 0.25));
}

TEST(crypto, multi_plane_identity) {
  const auto s = make_chained_settings(3, 4);
  const auto fams = multi_plane_sets(s, 1);
  ASSERT_EQ(fams.size(), 1u);
  EXPECT_LT((fams[0].unitary - CMatrix::Identity(3, 3)).norm(), 1e-15);
  const auto orig = cglmp_bases(s);
  for (std::size_t a = 0; a < orig.alice.size(); ++a)
    for (int x = 0; x < 3; ++x)
      EXPECT_LT((fams[0].bases.alice[a][x] - orig.alice[a][x]).norm(), 1e-15);
}

TEST(crypto, multi_plane_qubit_pair) {
  const auto s = make_chained_settings(2, 5);
  const auto fams = multi_plane_sets(s, 2);
  ASSERT_EQ(fams.size(), 2u);
  EXPECT_EQ(fams[0].span.cols(), 2);
  EXPECT_EQ(fams[1].span.cols(), 2);
  // Family 1 spans the x-y great circle.
  EXPECT_NEAR(fams[0].span.row(2).norm(), 0.0, 1e-12);
  // The second plane is perpendicular to the first and contains z.
  EXPECT_LE(detail::commutator_residual(fams[0].span, fams[1].span), 1e-9);
  EXPECT_NEAR((fams[1].span.transpose() * RVector::Unit(3, 2)).norm(), 1.0, 1e-12);
  const auto ins = family_chained_in(fams);
  EXPECT_NEAR(ins[0], ins[1], 1e-10);
  EXPECT_NEAR(ins[0], chained_in_exact(2, 5), 1e-10);
}

TEST(crypto, multi_plane_families_preserve_in) {
  for (int d : {3, 4}) {
    const auto s = make_chained_settings(d, 3);
    const auto fams = multi_plane_sets(s, 2);
    ASSERT_EQ(fams.size(), 2u);
    EXPECT_LE(detail::commutator_residual(fams[0].span, fams[1].span), 1e-9);
    Eigen::MatrixXd joined(bloch_size(d), fams[0].span.cols() + fams[1].span.cols());
    joined << fams[0].span, fams[1].span;
    EXPECT_GT(detail::orthonormal_columns(joined).cols(), fams[0].span.cols());
    for (double v : family_chained_in(fams)) EXPECT_NEAR(v, chained_in_exact(d, 3), 1e-10);
    for (const auto& f : fams) {
      const CMatrix uu = f.unitary * f.unitary.adjoint();
      EXPECT_LT((uu - CMatrix::Identity(d, d)).norm(), 1e-12);
    }
  }
}

TEST(crypto, multi_plane_errors) {
  const auto s = make_chained_settings(2, 3);
  EXPECT_THROW(multi_plane_sets(s, 0), invalid_argument);
  EXPECT_THROW(multi_plane_sets(s, 3), invalid_argument);
  // Qutrits: after two families no candidate adds a perpendicular direction.
  EXPECT_THROW(multi_plane_sets(make_chained_settings(3, 3), 5), construction_failure);
}

TEST(crypto, escape_test_qubit) {
  const auto fams = multi_plane_sets(make_chained_settings(2, 4), 2);
  // u along the normal of family 1's plane.
  const auto r = fixed_u_escape_test({2, RVector::Unit(3, 2)}, fams);
  EXPECT_TRUE(r.flagged[0]);
  EXPECT_FALSE(r.flagged[1]);
  EXPECT_FALSE(r.escapes());
  // The two planes together cover R^3: no direction escapes both.
  for (int t = 0; t < 100; ++t) {
    auto g = substream(13, static_cast<std::uint64_t>(t));
    const auto rr = fixed_u_escape_test({2, sample_sphere(3, g)}, fams);
    EXPECT_FALSE(rr.escapes());
    EXPECT_GT(std::max(rr.projection[0], rr.projection[1]), 0.5);
  }
}

TEST(crypto, escape_test_single_family) {
  const auto fams = multi_plane_sets(make_chained_settings(3, 4), 1);
  const auto r = fixed_u_escape_test({3, RVector::Unit(8, 7)}, fams);
  EXPECT_TRUE(r.flagged[0]);
  EXPECT_TRUE(r.escapes());
  EXPECT_THROW(fixed_u_escape_test({3, RVector::Ones(8)}, fams), normalization_error);
}

TEST(crypto, escape_requires_orthogonality_to_every_family) {
  // Any u with a component in the union of spans hits some family.
  for (int d : {3, 4}) {
    const auto fams = multi_plane_sets(make_chained_settings(d, 3), 2);
    for (int t = 0; t < 50; ++t) {
      auto g = substream(17, static_cast<std::uint64_t>(t));
      const RVector c = sample_sphere(static_cast<int>(fams[1].span.cols()), g);
      const RVector u = fams[1].span * c;
      const auto r = fixed_u_escape_test({d, u.normalized()}, fams);
      EXPECT_FALSE(r.escapes());
    }
  }
}

}  // namespace cnl
