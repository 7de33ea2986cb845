#include "dcsl/frontier.hpp"

#include <algorithm>
#include <cmath>

#include "dcsl/errors.hpp"
#include "dcsl/numerics.hpp"

namespace dcsl {

BestLossPoint best_loss_at(const LawParams& law, double flops,
                           double unique_tokens, const BestLossOptions& opts) {
  law.validate();
  if (flops <= 0.0) throw DomainError("best_loss_at: flops must be > 0");
  if (unique_tokens <= 0.0)
    throw DomainError("best_loss_at: unique_tokens must be > 0");

  // E >= 1 bounds the model size: N <= C / (6U).
  double n_max = flops / (6.0 * unique_tokens);
  if (n_max < opts.n_min)
    throw InfeasibleError(
        "best_loss_at: compute " + fmt9(flops) + " cannot afford one epoch over " +
        fmt9(unique_tokens) + " tokens at any admissible model size");

  double u_n = base_params(law, unique_tokens);
  auto loss_at_logn = [&](double logn) {
    double n = std::exp(logn);
    double d = flops / (6.0 * n);
    // the search range enforces E >= 1; clamp float error at the boundary
    double e = std::max(1.0, d / unique_tokens);
    return predict_loss(law, n, unique_tokens, e, u_n);
  };

  double lo = std::log(opts.n_min), hi = std::log(n_max);
  // Coarse scan guards against flat/kinked stretches, golden section refines.
  int g = std::max(opts.grid_points, 8);
  double best_x = lo, best_f = loss_at_logn(lo);
  for (int i = 1; i <= g; ++i) {
    double x = lo + (hi - lo) * static_cast<double>(i) / g;
    double f = loss_at_logn(x);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  double cell = (hi - lo) / g;
  double a = std::max(lo, best_x - cell), b = std::min(hi, best_x + cell);
  auto [xm, fm] = golden_section_min(loss_at_logn, a, b, 1e-13);
  if (best_f < fm) {
    xm = best_x;
    fm = best_f;
  }

  BestLossPoint p;
  p.flops = flops;
  p.unique_tokens = unique_tokens;
  p.n_star = std::exp(xm);
  p.e_star = flops / (6.0 * p.n_star * unique_tokens);
  p.loss = fm;
  return p;
}

double loss_gap(const LawParams& law_diff, const LawParams& law_ar, double flops,
                double unique_tokens, const BestLossOptions& opts) {
  return best_loss_at(law_diff, flops, unique_tokens, opts).loss -
         best_loss_at(law_ar, flops, unique_tokens, opts).loss;
}

double critical_compute(const LawParams& law_diff, const LawParams& law_ar,
                        double unique_tokens, double c_lo, double c_hi,
                        double log10_tol, const BestLossOptions& opts) {
  if (!(c_lo > 0.0) || !(c_hi > c_lo))
    throw DomainError("critical_compute: need 0 < c_lo < c_hi");
  auto gap_at = [&](double log10_c) {
    return loss_gap(law_diff, law_ar, std::pow(10.0, log10_c), unique_tokens,
                    opts);
  };
  double lo = std::log10(c_lo), hi = std::log10(c_hi);
  double glo = gap_at(lo), ghi = gap_at(hi);
  if (!(glo * ghi < 0.0))
    throw InfeasibleError(
        "critical_compute: no crossover in bracket; gap(" + fmt9(c_lo) + ") = " +
        fmt9(glo) + ", gap(" + fmt9(c_hi) + ") = " + fmt9(ghi));
  double root = bisect_root(gap_at, lo, hi, log10_tol, 200);
  return std::pow(10.0, root);
}

CritFit fit_crit_powerlaw(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2)
    throw InputError("fit_crit_powerlaw: need at least two (U, C) points");
  std::vector<double> log_c, log_u;
  for (const auto& [u, c] : points) {
    if (!(u > 0.0) || !(c > 0.0))
      throw InputError("fit_crit_powerlaw: points must be positive");
    log_u.push_back(std::log10(u));
    log_c.push_back(std::log10(c));
  }
  double c_min = *std::min_element(log_c.begin(), log_c.end());
  double c_max = *std::max_element(log_c.begin(), log_c.end());
  if (c_max - c_min < 1e-9)
    throw InputError("fit_crit_powerlaw: C values have zero variance");
  OlsFit ols = ols_fit(log_c, log_u);
  if (ols.slope == 0.0)
    throw InputError("fit_crit_powerlaw: zero slope, C(U) form undefined");
  CritFit fit;
  fit.slope = ols.slope;
  fit.intercept = ols.intercept;
  fit.exponent = 1.0 / ols.slope;
  fit.coeff_c = std::pow(10.0, -ols.intercept / ols.slope);
  fit.points = points;
  return fit;
}

HeatmapGrid heatmap_grid(const LawParams& law_diff, const LawParams& law_ar,
                         const std::vector<double>& u_values,
                         const std::vector<double>& c_values,
                         const BestLossOptions& opts) {
  if (u_values.empty() || c_values.empty())
    throw DomainError("heatmap_grid: grids must be non-empty");
  HeatmapGrid grid;
  grid.u_values = u_values;
  grid.c_values = c_values;
  grid.delta.assign(u_values.size(), {});
  for (std::size_t i = 0; i < u_values.size(); ++i) {
    grid.delta[i].resize(c_values.size());
    for (std::size_t j = 0; j < c_values.size(); ++j) {
      try {
        grid.delta[i][j] = loss_gap(law_diff, law_ar, c_values[j], u_values[i], opts);
      } catch (const InfeasibleError&) {
        grid.delta[i][j] = std::nullopt;
      }
    }
  }
  return grid;
}

std::string heatmap_csv(const HeatmapGrid& grid,
                        const std::string& header_comment) {
  std::string out;
  if (!header_comment.empty()) out += "# " + header_comment + "\n";
  out += "u";
  for (double c : grid.c_values) out += "," + fmt9(c);
  out += "\n";
  for (std::size_t i = 0; i < grid.u_values.size(); ++i) {
    out += fmt9(grid.u_values[i]);
    for (std::size_t j = 0; j < grid.c_values.size(); ++j) {
      out += ",";
      if (grid.delta[i][j]) out += fmt9(*grid.delta[i][j]);
    }
    out += "\n";
  }
  return out;
}

std::vector<RepetitionPoint> repetition_tradeoff(
    const LawParams& law, double flops, const std::vector<double>& fractions) {
  Allocation alloc = optimal_allocation(law, flops);
  std::vector<RepetitionPoint> out;
  out.reserve(fractions.size());
  for (double f : fractions) {
    if (!(f > 0.0) || f > 1.0)
      throw DomainError("repetition_tradeoff: fractions must lie in (0, 1]");
    RepetitionPoint p;
    p.fraction = f;
    p.epochs = 1.0 / f;
    double u = f * alloc.d_opt;
    p.predicted_loss =
        predict_loss(law, alloc.n_opt, u, p.epochs, base_params(law, u));
    out.push_back(p);
  }
  return out;
}

std::vector<CurvePoint> extrapolate_curves(const LawParams& law,
                                           const std::vector<double>& c_budgets,
                                           int max_epochs) {
  if (max_epochs < 1)
    throw DomainError("extrapolate_curves: max_epochs must be >= 1");
  std::vector<CurvePoint> out;
  for (double c : c_budgets) {
    Allocation alloc = optimal_allocation(law, c);
    double u = alloc.d_opt;
    double u_n = base_params(law, u);
    for (int e = 1; e <= max_epochs; ++e) {
      CurvePoint p;
      p.budget = c;
      p.epoch = e;
      p.tokens_seen = u * e;
      p.loss = predict_loss(law, alloc.n_opt, u, static_cast<double>(e), u_n);
      double d_hyp = u * e;
      p.hypothetical_loss = law.A / std::pow(effective_params(alloc.n_opt, u_n,
                                                              law.r_n_star),
                                             law.alpha) +
                            law.B / std::pow(d_hyp, law.beta) + law.E0;
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace dcsl
