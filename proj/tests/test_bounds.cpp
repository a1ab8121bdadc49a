#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "regtune/bounds.hpp"
#include "regtune/rng.hpp"

using namespace regtune;

namespace {

BoundInputs unit_inputs() {
  BoundInputs in;
  in.T = 100;
  in.n = 24;
  in.n_v = 10;
  in.d = 4;
  in.delta = 0.05;
  in.L = in.C = in.M = in.b_v = 1.0;
  in.Lambda_DT = 1.0;
  in.E_xv_norm = in.E_xv_norm_sq = 1.0;
  in.E_y_over_sqrtV = 1.0;
  in.E_ws_plus_noise = 1.0;
  return in;
}

}  // namespace

TEST_CASE("four ridge bound terms against frozen arithmetic") {
  BoundReport r = eval_bound(BoundId::Ridge, unit_inputs());
  REQUIRE(r.terms.size() == 4);
  CHECK(r.terms[0].second == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r.terms[1].second ==
        doctest::Approx(0.06324555320336758).epsilon(1e-12));
  CHECK(r.terms[2].second ==
        doctest::Approx(0.13406861542256618).epsilon(1e-12));
  CHECK(r.terms[3].second == doctest::Approx(0.849140815456554).epsilon(1e-12));
  CHECK(r.total == doctest::Approx(1.246454984082488).epsilon(1e-12));
}

TEST_CASE("quadrupling T scales each term as expected") {
  BoundInputs in = unit_inputs();
  BoundReport r1 = eval_bound(BoundId::Ridge, in);
  in.T = 400;
  BoundReport r4 = eval_bound(BoundId::Ridge, in);
  CHECK(r4.terms[0].second == doctest::Approx(r1.terms[0].second / 2).epsilon(1e-12));
  CHECK(r4.terms[1].second == doctest::Approx(r1.terms[1].second / 2).epsilon(1e-12));
  CHECK(r4.terms[3].second == doctest::Approx(r1.terms[3].second / 2).epsilon(1e-12));
  double f = std::sqrt(std::log(16.0 * 100 / 0.05) / std::log(4.0 * 100 / 0.05)) / 2.0;
  CHECK(f == doctest::Approx(0.5371806358448027).epsilon(1e-12));
  CHECK(r4.terms[2].second == doctest::Approx(r1.terms[2].second * f).epsilon(1e-12));
}

TEST_CASE("perfect center estimate removes the extra recentered term") {
  BoundInputs in = unit_inputs();
  in.mu_err = 0.0;
  BoundReport rec = eval_bound(BoundId::RecenteredRidge, in);
  BoundReport ws = eval_bound(BoundId::RidgeWellSpec, in);
  REQUIRE(rec.terms.size() == ws.terms.size() + 1);
  CHECK(rec.terms[0].second == 0.0);
  for (size_t k = 0; k < ws.terms.size(); ++k) {
    CHECK(rec.terms[k + 1].second == ws.terms[k].second);
  }
}

TEST_CASE("every term is nonincreasing in T") {
  for (BoundId id : {BoundId::Ridge, BoundId::RidgeWellSpec, BoundId::Lasso,
                     BoundId::ElasticNet, BoundId::RidgeAlt}) {
    BoundInputs in = unit_inputs();
    in.M_tilde = 1.0;
    in.E_ysq_over_V = 1.0;
    in.Lambda_tilde_DT = 1.0;
    in.lambda1_max = 1.0;
    in.lambda2_min = 0.5;
    in.E_en_term = 1.0;
    in.mu_err = 0.1;
    in.T = 50;
    BoundReport prev = eval_bound(id, in);
    for (int T : {100, 400, 1600}) {
      in.T = T;
      BoundReport cur = eval_bound(id, in);
      REQUIRE(cur.terms.size() == prev.terms.size());
      for (size_t k = 0; k < cur.terms.size(); ++k) {
        CHECK(cur.terms[k].second <= prev.terms[k].second + 1e-15);
      }
      prev = cur;
    }
  }
}

TEST_CASE("well-specified refinement is no worse when its constant is smaller") {
  BoundInputs in = unit_inputs();
  in.E_ws_plus_noise = 0.8;  // <= E_y_over_sqrtV
  CHECK(eval_bound(BoundId::RidgeWellSpec, in).total <=
        eval_bound(BoundId::Ridge, in).total + 1e-15);
}

TEST_CASE("missing inputs are reported by name") {
  BoundInputs in = unit_inputs();
  in.Lambda_DT = BoundInputs::kMissing;
  CHECK_THROWS_WITH_AS(eval_bound(BoundId::Ridge, in),
                       "missing input: Lambda_DT", MissingInputError);
}

TEST_CASE("reference curves at the degenerate point") {
  ReferenceCurves rc = reference_curve_distfree(1, 1, std::exp(-1.0));
  CHECK(rc.distfree == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rc.priorwork == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  ReferenceCurves r1 = reference_curve_distfree(8, 100, 0.05);
  ReferenceCurves r4 = reference_curve_distfree(8, 400, 0.05);
  CHECK(r4.distfree == doctest::Approx(r1.distfree / 2).epsilon(1e-12));
  CHECK(r4.priorwork == doctest::Approx(r1.priorwork / 2).epsilon(1e-12));
}

TEST_CASE("deterministic one-dimensional input gives an exact estimate") {
  // d=1 Rademacher entries are +-sigma_x, so the Gram is n sigma_x^2 with
  // probability one; with sigma_x = 0.5, n = 4 the statistic is exactly 1.
  GenTriple g;
  g.input = {InputFamily::RademacherEntries, 0.5, 1};
  g.prior.mean = Vector::Zero(1);
  McEstimate e = estimate_lambda_DT(g, 3, 4, 50, 5);
  CHECK(e.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.se <= 1e-12);
}

TEST_CASE("extreme statistic grows with the number of tasks") {
  GenTriple g;
  g.input = {InputFamily::UniformEntries, 1.0, 3};
  g.prior.mean = Vector::Zero(3);
  McEstimate a = estimate_lambda_DT(g, 1, 18, 400, 6);
  McEstimate b = estimate_lambda_DT(g, 16, 18, 400, 6);
  CHECK(a.mean <= b.mean + 2.0 * std::sqrt(a.se * a.se + b.se * b.se));
}

TEST_CASE("extreme statistic matches an independent reimplementation") {
  GenTriple g;
  g.input = {InputFamily::UniformEntries, 1.0, 4};
  g.prior.mean = Vector::Zero(4);
  McEstimate mine = estimate_lambda_DT(g, 4, 24, 600, 7);

  // Fully independent draw chain and eigensolver.
  std::mt19937 eng(424242);
  double a = std::sqrt(3.0 / 4.0);
  std::uniform_real_distribution<double> unif(-a, a);
  std::vector<double> draws(600);
  for (auto& dv : draws) {
    double worst = 0;
    for (int t = 0; t < 4; ++t) {
      Matrix X(4, 24);
      for (int j = 0; j < 24; ++j)
        for (int i = 0; i < 4; ++i) X(i, j) = unif(eng);
      Eigen::SelfAdjointEigenSolver<Matrix> es(X * X.transpose());
      worst = std::max(worst, 1.0 / es.eigenvalues().minCoeff());
    }
    dv = worst;
  }
  double mean = 0;
  for (double dv : draws) mean += dv;
  mean /= draws.size();
  double var = 0;
  for (double dv : draws) var += (dv - mean) * (dv - mean);
  double se = std::sqrt(var / (draws.size() - 1) / draws.size());
  CHECK(std::abs(mine.mean - mean) <=
        3.0 * std::sqrt(mine.se * mine.se + se * se));
}

TEST_CASE("one-dimensional subset statistic equals the plain statistic") {
  GenTriple g;
  g.input = {InputFamily::RademacherEntries, 0.5, 1};
  g.prior.mean = Vector::Zero(1);
  McEstimate e = estimate_lambda_tilde_DT(g, 2, 4, 50, SubsetMode::ExactEnum, 0,
                                          0.0, 8);
  CHECK(e.mean == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("subset statistic dominates the full-set statistic") {
  GenTriple g;
  g.input = {InputFamily::GaussianEntries, 1.0, 5};
  g.prior.mean = Vector::Zero(5);
  g.noise.sigma = 0.3;
  McEstimate full = estimate_lambda_DT(g, 2, 20, 300, 9);
  McEstimate sub = estimate_lambda_tilde_DT(g, 2, 20, 300,
                                            SubsetMode::ExactEnum, 0, 0.0, 9);
  CHECK(sub.mean + 2.0 * std::sqrt(full.se * full.se + sub.se * sub.se) >=
        full.mean);
}

TEST_CASE("subset enumeration matches a brute-force oracle") {
  // Independent chain: Gaussian inputs drawn with std::mt19937 and a double
  // loop over all nonempty subsets, compared statistically.
  GenTriple g;
  g.input = {InputFamily::GaussianEntries, 1.0, 6};
  g.prior.mean = Vector::Zero(6);
  g.noise.sigma = 0.3;
  McEstimate mine = estimate_lambda_tilde_DT(g, 1, 30, 400,
                                             SubsetMode::ExactEnum, 0, 0.0, 10);
  std::mt19937 eng(777);
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(6.0));
  std::vector<double> draws(400);
  for (auto& dv : draws) {
    Matrix X(6, 30);
    for (int j = 0; j < 30; ++j)
      for (int i = 0; i < 6; ++i) X(i, j) = gauss(eng);
    double worst = 0;
    for (unsigned mask = 1; mask < 64; ++mask) {
      std::vector<int> idx;
      for (int b = 0; b < 6; ++b)
        if (mask & (1u << b)) idx.push_back(b);
      Matrix XE(static_cast<int>(idx.size()), 30);
      for (size_t i = 0; i < idx.size(); ++i) XE.row(i) = X.row(idx[i]);
      Eigen::SelfAdjointEigenSolver<Matrix> es(XE * XE.transpose());
      worst = std::max(worst, 1.0 / es.eigenvalues().minCoeff());
    }
    dv = worst;
  }
  double mean = 0;
  for (double dv : draws) mean += dv;
  mean /= draws.size();
  double var = 0;
  for (double dv : draws) var += (dv - mean) * (dv - mean);
  double se = std::sqrt(var / (draws.size() - 1) / draws.size());
  CHECK(std::abs(mine.mean - mean) <=
        3.0 * std::sqrt(mine.se * mine.se + se * se));
}

TEST_CASE("exact enumeration refuses large dimensions") {
  GenTriple g;
  g.input = {InputFamily::GaussianEntries, 1.0, 16};
  g.prior.mean = Vector::Zero(16);
  CHECK_THROWS_AS(estimate_lambda_tilde_DT(g, 1, 40, 1, SubsetMode::ExactEnum,
                                           0, 0.0, 11),
                  DimensionTooLargeError);
}

TEST_CASE("signed-mean enumeration on small inputs") {
  CHECK(enumerate_abs_signed_mean({1.0}) == doctest::Approx(1.0).epsilon(1e-15));
  // |s1 + s2| over four sign pairs: 2, 0, 0, 2 -> mean 1
  CHECK(enumerate_abs_signed_mean({1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(enumerate_abs_signed_mean({3.0, 0.0}) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("signed means satisfy the second-moment inequality") {
  Rng rng(88);
  for (int rep = 0; rep < 25; ++rep) {
    int T = 1 + static_cast<int>(rng.uniform_index(12));
    std::vector<double> c(T);
    double sq = 0;
    for (int t = 0; t < T; ++t) {
      c[t] = rng.gaussian();
      sq += c[t] * c[t];
    }
    CHECK(enumerate_abs_signed_mean(c) <= std::sqrt(sq) * (1.0 + 1e-12));
  }
}
