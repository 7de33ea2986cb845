#include <doctest.h>

#include <cmath>

#include "dcsl/errors.hpp"
#include "dcsl/frontier.hpp"
#include "dcsl/numerics.hpp"

using namespace dcsl;
using doctest::Approx;

namespace {

const LawParams kTestLaw{406.4, 410.7, 0.34, 0.28, 1.69, 31.19, 55.16};

// Constructed pair with a hand-solvable crossover. Both laws have huge
// decay constants, so best_loss_at reduces to the Chinchilla optimum and
// L(C) = K * (C/6)^(-gamma) + E0 with K = A*G^(-alpha) + B*G^beta,
// gamma = alpha*beta/(alpha+beta). Equal E0 cancels and the crossover is
// C* = 6 * (K1/K2)^(1/(gamma1-gamma2)).
const LawParams kLawFast{500.0 * 39.86, 1000.0 * 39.86, 0.5, 0.5, 2.0, 1e12, 1e12};
const LawParams kLawSlow{300.0, 600.0, 0.3, 0.3, 2.0, 1e12, 1e12};

double closed_form_crossover() {
  auto k_gamma = [](const LawParams& l) {
    double g = std::pow(l.alpha * l.A / (l.beta * l.B), 1.0 / (l.alpha + l.beta));
    return std::pair<double, double>{
        l.A * std::pow(g, -l.alpha) + l.B * std::pow(g, l.beta),
        l.alpha * l.beta / (l.alpha + l.beta)};
  };
  auto [k1, g1] = k_gamma(kLawFast);
  auto [k2, g2] = k_gamma(kLawSlow);
  return 6.0 * std::pow(k1 / k2, 1.0 / (g1 - g2));
}

}  // namespace

TEST_CASE("best_loss_at matches unconstrained allocation in the fresh limit") {
  LawParams law = kTestLaw;
  law.r_d_star = 1e12;
  law.r_n_star = 1e12;
  double c = 1e20, u = 1e8;  // small U so that E* > 1
  Allocation alloc = optimal_allocation(law, c);
  REQUIRE(alloc.d_opt / u > 1.0);
  BestLossPoint p = best_loss_at(law, c, u);
  CHECK(p.n_star == Approx(alloc.n_opt).epsilon(1e-6));
  CHECK(p.e_star == Approx(alloc.d_opt / u).epsilon(1e-6));
  CHECK(p.loss == Approx(chinchilla_loss(law.A, law.B, law.alpha, law.beta,
                                         law.E0, alloc.n_opt, alloc.d_opt))
                      .epsilon(1e-9));
}

TEST_CASE("best_loss_at beats a dense grid oracle") {
  double c = 3e19, u = 5e7;
  BestLossPoint p = best_loss_at(kTestLaw, c, u);
  double u_n = base_params(kTestLaw, u);
  double lo = std::log(1.0), hi = std::log(c / (6.0 * u));
  double best = 1e300;
  for (int i = 0; i <= 10000; ++i) {
    double n = std::exp(lo + (hi - lo) * i / 10000.0);
    double e = std::max(1.0, c / (6.0 * n * u));
    best = std::min(best, predict_loss(kTestLaw, n, u, e, u_n));
  }
  CHECK(p.loss <= best + 1e-6);
  CHECK(std::fabs(p.loss - best) < 1e-6);
  // invariant: 6 * n_star * (U * e_star) == C
  CHECK(6.0 * p.n_star * u * p.e_star == Approx(c).epsilon(1e-9));
}

TEST_CASE("best_loss_at monotone in compute and unique data") {
  double prev = best_loss_at(kTestLaw, 1e18, 5e7).loss;
  for (double c : {2e18, 4e18, 1e19, 1e20}) {
    double cur = best_loss_at(kTestLaw, c, 5e7).loss;
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
  CHECK(best_loss_at(kTestLaw, 1e19, 1e8).loss <=
        best_loss_at(kTestLaw, 1e19, 5e7).loss + 1e-12);
}

TEST_CASE("best_loss_at infeasible when one epoch is unaffordable") {
  CHECK_THROWS_AS(best_loss_at(kTestLaw, 10.0, 1e8), InfeasibleError);
}

TEST_CASE("loss_gap basics") {
  double c = 1e19, u = 5e7;
  CHECK(loss_gap(kTestLaw, kTestLaw, c, u) == Approx(0.0));
  LawParams lower_floor = kTestLaw;
  lower_floor.E0 -= 0.1;
  // E0 dominates at large compute
  CHECK(loss_gap(lower_floor, kTestLaw, 1e24, u) == Approx(-0.1).epsilon(1e-3));
}

TEST_CASE("critical_compute matches the closed form") {
  double expect = closed_form_crossover();
  double got = critical_compute(kLawSlow, kLawFast, 1e8, 1e15, 1e24);
  CHECK(std::fabs(got / expect - 1.0) < 1e-4);
  // residual at the root is tiny relative to the bracket-edge gap
  double g_root = loss_gap(kLawSlow, kLawFast, got, 1e8);
  double g_lo = loss_gap(kLawSlow, kLawFast, 1e15, 1e8);
  CHECK(std::fabs(g_root) < 1e-6 * std::fabs(g_lo));
  // sign flips across the crossover
  CHECK(loss_gap(kLawSlow, kLawFast, got / 10.0, 1e8) *
            loss_gap(kLawSlow, kLawFast, got * 10.0, 1e8) <
        0.0);
}

TEST_CASE("critical_compute invariant to bracket choice") {
  double a = critical_compute(kLawSlow, kLawFast, 1e8, 1e15, 1e24);
  double b = critical_compute(kLawSlow, kLawFast, 1e8, 1e16, 1e23);
  CHECK(a == Approx(b).epsilon(1e-7));
}

TEST_CASE("critical_compute reports no crossover") {
  CHECK_THROWS_WITH_AS(critical_compute(kTestLaw, kTestLaw, 1e8, 1e16, 1e22),
                       doctest::Contains("no crossover"), InfeasibleError);
}

TEST_CASE("fit_crit_powerlaw recovers the printed constants") {
  // points generated exactly from C = 191.6 * U^2.174
  std::vector<std::pair<double, double>> pts;
  for (double u : {1e7, 1e8, 1e9})
    pts.emplace_back(u, 191.6 * std::pow(u, 2.174));
  CritFit fit = fit_crit_powerlaw(pts);
  CHECK(std::fabs(fit.slope - 1.0 / 2.174) < 1e-3);
  CHECK(std::fabs(fit.exponent - 2.174) < 1e-3);
  CHECK(fit.coeff_c == Approx(191.6).epsilon(1e-6));
  // exact power law recovers to machine precision in log space
  OlsFit check = ols_fit({std::log10(pts[0].second), std::log10(pts[1].second),
                          std::log10(pts[2].second)},
                         {7.0, 8.0, 9.0});
  CHECK(check.max_abs_residual < 1e-9);
}

TEST_CASE("printed crossover forms are mutually consistent") {
  // the two published forms of the same fit: 2.12e1.956 vs 10^(1.050/0.460)
  double lhs = 2.12 * std::pow(10.0, 1.956);
  double rhs = std::pow(10.0, 1.050 / 0.460);
  CHECK(std::fabs(lhs - rhs) / rhs < 0.005);
}

TEST_CASE("fit_crit_powerlaw two points and errors") {
  std::vector<std::pair<double, double>> two = {{1e7, 1e18}, {1e8, 1e20}};
  CritFit fit = fit_crit_powerlaw(two);
  CHECK(std::fabs(std::log10(two[0].first) -
                  (fit.slope * std::log10(two[0].second) + fit.intercept)) < 1e-12);
  CHECK(fit.exponent == Approx(1.0 / fit.slope));
  CHECK_THROWS_AS(fit_crit_powerlaw({{1e7, 1e18}}), InputError);
  CHECK_THROWS_AS(fit_crit_powerlaw({{1e7, 1e18}, {1e7, 1e18}}), InputError);
}

TEST_CASE("heatmap grid basics and antisymmetry") {
  std::vector<double> us = {3e7, 1e8};
  std::vector<double> cs = {1e18, 1e19, 1e20};
  HeatmapGrid same = heatmap_grid(kTestLaw, kTestLaw, us, cs);
  for (const auto& row : same.delta)
    for (const auto& cell : row) {
      REQUIRE(cell.has_value());
      CHECK(*cell == Approx(0.0));
    }

  HeatmapGrid ab = heatmap_grid(kLawSlow, kLawFast, us, cs);
  HeatmapGrid ba = heatmap_grid(kLawFast, kLawSlow, us, cs);
  for (std::size_t i = 0; i < us.size(); ++i)
    for (std::size_t j = 0; j < cs.size(); ++j) {
      REQUIRE(ab.delta[i][j].has_value());
      CHECK(*ab.delta[i][j] == Approx(-*ba.delta[i][j]).epsilon(1e-9));
    }

  // 1x1 grid equals loss_gap
  HeatmapGrid one = heatmap_grid(kLawSlow, kLawFast, {1e8}, {1e19});
  CHECK(*one.delta[0][0] == Approx(loss_gap(kLawSlow, kLawFast, 1e19, 1e8)));

  // infeasible cells come back empty
  HeatmapGrid inf = heatmap_grid(kTestLaw, kTestLaw, {1e18}, {1e10});
  CHECK(!inf.delta[0][0].has_value());
  std::string csv = heatmap_csv(inf);
  CHECK(csv.find("1e+18,\n") != std::string::npos);
}

TEST_CASE("repetition tradeoff endpoints and limits") {
  double c = 1e19;
  auto pts = repetition_tradeoff(kTestLaw, c, {1.0, 0.5, 0.25});
  REQUIRE(pts.size() == 3);
  Allocation alloc = optimal_allocation(kTestLaw, c);
  double u_n = base_params(kTestLaw, alloc.d_opt);
  CHECK(pts[0].epochs == 1.0);
  CHECK(pts[0].predicted_loss ==
        Approx(predict_loss(kTestLaw, alloc.n_opt, alloc.d_opt, 1.0, u_n)));
  CHECK(pts[1].epochs == 2.0);
  CHECK_THROWS_AS(repetition_tradeoff(kTestLaw, c, {0.0}), DomainError);
  CHECK_THROWS_AS(repetition_tradeoff(kTestLaw, c, {1.5}), DomainError);

  // fresh-data limit: loss constant across fractions
  LawParams fresh = kTestLaw;
  fresh.r_d_star = 1e12;
  fresh.r_n_star = 1e12;
  auto flat = repetition_tradeoff(fresh, c, {1.0, 0.5, 0.25, 0.1});
  for (const auto& p : flat)
    CHECK(p.predicted_loss == Approx(flat[0].predicted_loss).epsilon(1e-6));

  // slower decay (bigger R_D*) dominates at every fraction below one
  LawParams slow = kTestLaw;
  slow.r_d_star = 493.89;
  auto fast_pts = repetition_tradeoff(kTestLaw, c, {0.5, 0.25, 0.1});
  auto slow_pts = repetition_tradeoff(slow, c, {0.5, 0.25, 0.1});
  for (std::size_t i = 0; i < fast_pts.size(); ++i)
    CHECK(slow_pts[i].predicted_loss < fast_pts[i].predicted_loss);
}

TEST_CASE("extrapolated curves: real vs hypothetical") {
  auto curves = extrapolate_curves(kTestLaw, {1e19, 3e19}, 50);
  REQUIRE(curves.size() == 100);
  for (const auto& p : curves) {
    if (p.epoch == 1)
      CHECK(p.loss == Approx(p.hypothetical_loss).epsilon(1e-12));
    else
      CHECK(p.loss >= p.hypothetical_loss);
  }
  // larger R_D* hugs the hypothetical curve longer: at the same epoch
  // count the slow-decay law's gap is far smaller
  LawParams diffusion_like = kTestLaw;
  diffusion_like.r_d_star = 493.89;
  auto slow = extrapolate_curves(diffusion_like, {1e19}, 100);
  auto fast = extrapolate_curves(kTestLaw, {1e19}, 100);
  double gap_slow_100 = (slow[99].loss - slow[99].hypothetical_loss) /
                        slow[99].hypothetical_loss;
  double gap_fast_100 = (fast[99].loss - fast[99].hypothetical_loss) /
                        fast[99].hypothetical_loss;
  CHECK(gap_slow_100 < gap_fast_100);
  // frozen pointwise evaluations at the two figure-named depths
  double gap_fast_4 = (fast[3].loss - fast[3].hypothetical_loss) /
                      fast[3].hypothetical_loss;
  CHECK(gap_slow_100 == Approx(0.00219245).epsilon(1e-3));
  CHECK(gap_fast_4 == Approx(0.00174950).epsilon(1e-3));
}
