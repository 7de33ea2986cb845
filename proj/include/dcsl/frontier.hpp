#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dcsl/lawcore.hpp"

namespace dcsl {

// Best predicted loss at compute C and unique-token budget U, minimizing
// over model size with D = C/(6N) and E = D/U >= 1.
struct BestLossPoint {
  double flops = 0.0;
  double unique_tokens = 0.0;
  double loss = 0.0;
  double n_star = 0.0;
  double e_star = 0.0;
};

struct BestLossOptions {
  double n_min = 1.0;    // smallest admissible model
  int grid_points = 400; // coarse log-N scan before refinement
};

BestLossPoint best_loss_at(const LawParams& law, double flops,
                           double unique_tokens,
                           const BestLossOptions& opts = {});

// L_first(C, U) - L_second(C, U); positive favors the second family.
double loss_gap(const LawParams& law_diff, const LawParams& law_ar,
                double flops, double unique_tokens,
                const BestLossOptions& opts = {});

// Bisection on log10 C for the root of the loss gap. Throws
// InfeasibleError when the gap has the same sign at both bracket ends.
double critical_compute(const LawParams& law_diff, const LawParams& law_ar,
                        double unique_tokens, double c_lo, double c_hi,
                        double log10_tol = 1e-9,
                        const BestLossOptions& opts = {});

// OLS of log10 U on log10 C, plus the inverted C(U) form.
struct CritFit {
  double slope = 0.0;      // d log10 U / d log10 C
  double intercept = 0.0;  // log10 U at log10 C = 0
  double exponent = 0.0;   // 1/slope: C ~ U^exponent
  double coeff_c = 0.0;    // C(U) = coeff_c * U^exponent
  std::vector<std::pair<double, double>> points;  // (U, C_crit)
};

CritFit fit_crit_powerlaw(const std::vector<std::pair<double, double>>& points);

// Row-major loss-gap grid; infeasible cells empty.
struct HeatmapGrid {
  std::vector<double> u_values;
  std::vector<double> c_values;
  std::vector<std::vector<std::optional<double>>> delta;  // [u][c]
};

HeatmapGrid heatmap_grid(const LawParams& law_diff, const LawParams& law_ar,
                         const std::vector<double>& u_values,
                         const std::vector<double>& c_values,
                         const BestLossOptions& opts = {});

// csv: header row = C values, first column = U values.
std::string heatmap_csv(const HeatmapGrid& grid,
                        const std::string& header_comment = "");

// Repetition trade-off at fixed compute: U = f*D_opt, E = 1/f, N = N_opt.
struct RepetitionPoint {
  double fraction = 0.0;
  double epochs = 0.0;
  double predicted_loss = 0.0;
};

std::vector<RepetitionPoint> repetition_tradeoff(
    const LawParams& law, double flops, const std::vector<double>& fractions);

// Multi-epoch extrapolation anchored at the single-epoch optimum of each
// budget; the hypothetical curve treats repeated data as fresh (D' = U*E).
struct CurvePoint {
  double budget = 0.0;
  int epoch = 0;
  double tokens_seen = 0.0;
  double loss = 0.0;
  double hypothetical_loss = 0.0;
};

std::vector<CurvePoint> extrapolate_curves(const LawParams& law,
                                           const std::vector<double>& c_budgets,
                                           int max_epochs);

}  // namespace dcsl
