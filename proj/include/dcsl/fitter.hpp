#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "dcsl/lawcore.hpp"
#include "dcsl/runstore.hpp"

namespace dcsl {

struct FitBounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct FitConfig {
  double huber_delta = 1e-3;
  int n_starts = 64;
  int max_iters = 4000;
  FitBounds bound_a{1e-2, 1e6};
  FitBounds bound_b{1e-2, 1e6};
  FitBounds bound_alpha{0.05, 1.5};
  FitBounds bound_beta{0.05, 1.5};
  FitBounds bound_e0{1e-3, 10.0};
  FitBounds bound_r{1e-1, 1e5};  // shared by R_D* and R_N*
  std::uint64_t seed = 0;
};

struct FitReport {
  double r_squared = 0.0;      // raw losses
  double r_squared_log = 0.0;  // log losses, for comparison
  double objective_value = 0.0;
  std::size_t n_runs = 0;
  std::vector<double> residuals;  // log(predicted) - log(observed), run order
  int starts_tried = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

struct Stage1Fit {
  double A = 0.0, B = 0.0, alpha = 0.0, beta = 0.0, E0 = 0.0;
  FitReport report;
};

struct Stage2Fit {
  double r_d_star = 0.0, r_n_star = 0.0;
  FitReport report;
};

// Mean over runs of Huber_delta(log predicted - log observed), with
// predictions from predict_loss and the caller-supplied per-run U_N.
double huber_log_objective(const LawParams& law,
                           const std::vector<RunRecord>& runs,
                           const std::vector<double>& u_n_map,
                           double delta = 1e-3);

// Stage 1: single-epoch runs only (N' = N, D' = D); fits {A, B, alpha,
// beta, E0} by multi-start simplex descent from a log-uniform grid.
Stage1Fit fit_stage1(const std::vector<RunRecord>& runs, const FitConfig& cfg,
                     std::vector<double>* best_trace = nullptr);

// Stage 2: stage-1 constants frozen bit-exact; fits {R_D*, R_N*} with U_N
// per run from base_params. Requires at least one run with epochs > 1.
Stage2Fit fit_stage2(const std::vector<RunRecord>& runs, const Stage1Fit& stage1,
                     const FitConfig& cfg,
                     std::vector<double>* best_trace = nullptr);

struct Goodness {
  double r_squared = 0.0;   // raw values
  double mean_huber = 0.0;  // log values
};

Goodness goodness(const std::vector<double>& predicted,
                  const std::vector<double>& observed, double delta = 1e-3);

// (N, U, E) triple for synthetic run generation.
using SynthPoint = std::tuple<double, double, double>;

// final_val_loss = predict_loss(law, N, U, E, base_params(law, U)) * exp(eps),
// eps ~ Normal(0, noise_sigma^2), deterministic under seed.
std::vector<RunRecord> synth_runs(const LawParams& law,
                                  const std::vector<SynthPoint>& grid,
                                  double noise_sigma, std::uint64_t seed,
                                  Family family = Family::ar);

}  // namespace dcsl
