#include "dcsl/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dcsl/errors.hpp"
#include "dcsl/numerics.hpp"
#include "dcsl/rng.hpp"

namespace dcsl {

double huber_log_objective(const LawParams& law,
                           const std::vector<RunRecord>& runs,
                           const std::vector<double>& u_n_map, double delta) {
  if (runs.empty()) throw DomainError("huber_log_objective: no runs");
  if (u_n_map.size() != runs.size())
    throw DomainError("huber_log_objective: u_n_map size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunRecord& r = runs[i];
    double pred = predict_loss(law, static_cast<double>(r.n_params),
                               static_cast<double>(r.unique_tokens), r.epochs,
                               u_n_map[i]);
    if (!(pred > 0.0) || !std::isfinite(pred))
      throw NumericError("huber_log_objective: non-positive prediction for run " +
                         std::to_string(i));
    sum += huber(std::log(pred) - std::log(r.final_val_loss), delta);
  }
  return sum / static_cast<double>(runs.size());
}

namespace {

double clampd(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

double bounds_penalty(const std::vector<double>& x,
                      const std::vector<FitBounds>& b) {
  double p = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < b[i].lo) p += (b[i].lo - x[i]) * (b[i].lo - x[i]);
    if (x[i] > b[i].hi) p += (x[i] - b[i].hi) * (x[i] - b[i].hi);
  }
  return p;
}

struct MultiStartResult {
  std::vector<double> x;
  double fx = std::numeric_limits<double>::infinity();
  int starts_tried = 0;
  bool converged = false;
};

// Deterministic multi-start: log-uniform starts inside the (transformed)
// box, simplex descent plus one polish restart per start, lowest final
// objective wins (ties break by start order).
MultiStartResult multi_start_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<FitBounds>& box, int n_starts, int max_iters,
    std::uint64_t seed, std::vector<double>* best_trace) {
  Rng rng(seed);
  MultiStartResult out;
  std::vector<std::vector<double>> starts;
  starts.reserve(static_cast<std::size_t>(n_starts));
  for (int s = 0; s < n_starts; ++s) {
    std::vector<double> x0(box.size());
    for (std::size_t i = 0; i < box.size(); ++i)
      x0[i] = box[i].lo + (box[i].hi - box[i].lo) * rng.uniform();
    starts.push_back(std::move(x0));
  }
  for (int s = 0; s < n_starts; ++s) {
    NelderMeadOptions opts;
    opts.max_iters = max_iters;
    opts.init_step = 0.5;
    std::vector<double> trace;
    opts.trace = best_trace ? &trace : nullptr;
    MinimizeResult r1 = nelder_mead(f, starts[static_cast<std::size_t>(s)], opts);
    NelderMeadOptions polish = opts;
    polish.init_step = 0.05;
    MinimizeResult r2 = nelder_mead(f, r1.x, polish);
    const MinimizeResult& best = r2.fx < r1.fx ? r2 : r1;
    ++out.starts_tried;
    if (best.fx < out.fx) {
      out.fx = best.fx;
      out.x = best.x;
      out.converged = r1.converged || r2.converged;
      if (best_trace) *best_trace = trace;
    }
  }
  return out;
}

void fill_goodness(FitReport& rep, const std::vector<double>& predicted,
                   const std::vector<double>& observed, double delta) {
  Goodness g = goodness(predicted, observed, delta);
  rep.r_squared = g.r_squared;
  std::vector<double> lp(predicted.size()), lo(observed.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    lp[i] = std::log(predicted[i]);
    lo[i] = std::log(observed[i]);
  }
  rep.r_squared_log = goodness(lp, lo, delta).r_squared;
  rep.residuals.resize(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i)
    rep.residuals[i] = lp[i] - lo[i];
  rep.n_runs = predicted.size();
}

}  // namespace

Stage1Fit fit_stage1(const std::vector<RunRecord>& runs, const FitConfig& cfg,
                     std::vector<double>* best_trace) {
  std::set<std::int64_t> distinct_n, distinct_u;
  for (const RunRecord& r : runs) {
    if (std::fabs(r.epochs - 1.0) > 1e-12)
      throw ConvergenceError("fit_stage1: all runs must have epochs == 1");
    distinct_n.insert(r.n_params);
    distinct_u.insert(r.unique_tokens);
  }
  if (runs.size() < 5 || distinct_n.size() < 2 || distinct_u.size() < 2)
    throw ConvergenceError(
        "fit_stage1: rank-deficient design (need >= 5 single-epoch runs "
        "spanning >= 2 distinct N and >= 2 distinct U; got " +
        std::to_string(runs.size()) + " runs, " +
        std::to_string(distinct_n.size()) + " N values, " +
        std::to_string(distinct_u.size()) + " U values)");

  // Parameters: (ln A, ln B, alpha, beta, ln E0).
  std::vector<FitBounds> box = {
      {std::log(cfg.bound_a.lo), std::log(cfg.bound_a.hi)},
      {std::log(cfg.bound_b.lo), std::log(cfg.bound_b.hi)},
      cfg.bound_alpha,
      cfg.bound_beta,
      {std::log(cfg.bound_e0.lo), std::log(cfg.bound_e0.hi)}};

  auto objective = [&](const std::vector<double>& x) {
    double pen = bounds_penalty(x, box);
    double A = std::exp(clampd(x[0], box[0].lo, box[0].hi));
    double B = std::exp(clampd(x[1], box[1].lo, box[1].hi));
    double alpha = clampd(x[2], box[2].lo, box[2].hi);
    double beta = clampd(x[3], box[3].lo, box[3].hi);
    double E0 = std::exp(clampd(x[4], box[4].lo, box[4].hi));
    double sum = 0.0;
    for (const RunRecord& r : runs) {
      double tokens = static_cast<double>(r.unique_tokens) * r.epochs;
      double pred = chinchilla_loss(A, B, alpha, beta, E0,
                                    static_cast<double>(r.n_params), tokens);
      sum += huber(std::log(pred) - std::log(r.final_val_loss), cfg.huber_delta);
    }
    return sum / static_cast<double>(runs.size()) + pen;
  };

  MultiStartResult ms = multi_start_minimize(objective, box, cfg.n_starts,
                                             cfg.max_iters, cfg.seed, best_trace);
  if (!ms.converged || !std::isfinite(ms.fx))
    throw ConvergenceError("fit_stage1: no start converged after " +
                           std::to_string(ms.starts_tried) + " starts (best objective " +
                           std::to_string(ms.fx) + ")");

  Stage1Fit fit;
  fit.A = std::exp(clampd(ms.x[0], box[0].lo, box[0].hi));
  fit.B = std::exp(clampd(ms.x[1], box[1].lo, box[1].hi));
  fit.alpha = clampd(ms.x[2], box[2].lo, box[2].hi);
  fit.beta = clampd(ms.x[3], box[3].lo, box[3].hi);
  fit.E0 = std::exp(clampd(ms.x[4], box[4].lo, box[4].hi));
  fit.report.objective_value = ms.fx;
  fit.report.starts_tried = ms.starts_tried;
  fit.report.converged = true;

  std::vector<double> pred, obs;
  for (const RunRecord& r : runs) {
    double tokens = static_cast<double>(r.unique_tokens) * r.epochs;
    pred.push_back(chinchilla_loss(fit.A, fit.B, fit.alpha, fit.beta, fit.E0,
                                   static_cast<double>(r.n_params), tokens));
    obs.push_back(r.final_val_loss);
  }
  fill_goodness(fit.report, pred, obs, cfg.huber_delta);
  return fit;
}

Stage2Fit fit_stage2(const std::vector<RunRecord>& runs, const Stage1Fit& stage1,
                     const FitConfig& cfg, std::vector<double>* best_trace) {
  if (runs.empty()) throw ConvergenceError("fit_stage2: no runs");
  double max_epochs = 0.0;
  for (const RunRecord& r : runs) max_epochs = std::max(max_epochs, r.epochs);
  if (max_epochs <= 1.0)
    throw ConvergenceError(
        "fit_stage2: all runs are single-epoch; R_D* is unidentifiable");

  // U_N per run from the frozen stage-1 constants.
  LawParams probe{stage1.A, stage1.B, stage1.alpha, stage1.beta, stage1.E0,
                  1.0, 1.0};
  std::vector<double> u_n_map(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i)
    u_n_map[i] = base_params(probe, static_cast<double>(runs[i].unique_tokens));

  std::vector<FitBounds> box = {
      {std::log(cfg.bound_r.lo), std::log(cfg.bound_r.hi)},
      {std::log(cfg.bound_r.lo), std::log(cfg.bound_r.hi)}};

  auto law_at = [&](const std::vector<double>& x) {
    LawParams law;
    law.A = stage1.A;
    law.B = stage1.B;
    law.alpha = stage1.alpha;
    law.beta = stage1.beta;
    law.E0 = stage1.E0;
    law.r_d_star = std::exp(clampd(x[0], box[0].lo, box[0].hi));
    law.r_n_star = std::exp(clampd(x[1], box[1].lo, box[1].hi));
    return law;
  };
  auto objective = [&](const std::vector<double>& x) {
    return huber_log_objective(law_at(x), runs, u_n_map, cfg.huber_delta) +
           bounds_penalty(x, box);
  };

  MultiStartResult ms = multi_start_minimize(objective, box, cfg.n_starts,
                                             cfg.max_iters, cfg.seed, best_trace);
  if (!ms.converged || !std::isfinite(ms.fx))
    throw ConvergenceError("fit_stage2: no start converged after " +
                           std::to_string(ms.starts_tried) + " starts");

  Stage2Fit fit;
  LawParams law = law_at(ms.x);
  fit.r_d_star = law.r_d_star;
  fit.r_n_star = law.r_n_star;
  fit.report.objective_value = ms.fx;
  fit.report.starts_tried = ms.starts_tried;
  fit.report.converged = true;
  if (max_epochs <= 2.0)
    fit.report.warnings.push_back(
        "weak identification: no run exceeds 2 epochs, decay constants are "
        "poorly constrained");

  std::vector<double> pred, obs;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    pred.push_back(predict_loss(law, static_cast<double>(runs[i].n_params),
                                static_cast<double>(runs[i].unique_tokens),
                                runs[i].epochs, u_n_map[i]));
    obs.push_back(runs[i].final_val_loss);
  }
  fill_goodness(fit.report, pred, obs, cfg.huber_delta);
  return fit;
}

Goodness goodness(const std::vector<double>& predicted,
                  const std::vector<double>& observed, double delta) {
  if (predicted.size() != observed.size() || predicted.empty())
    throw DomainError("goodness: predicted/observed must have equal non-zero length");
  double mean = 0.0;
  for (double o : observed) mean += o;
  mean /= static_cast<double>(observed.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ss_res += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
    ss_tot += (observed[i] - mean) * (observed[i] - mean);
  }
  if (ss_tot == 0.0)
    throw DomainError("goodness: observed values have zero variance, R^2 undefined");
  Goodness g;
  g.r_squared = 1.0 - ss_res / ss_tot;
  double sum = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(predicted[i] > 0.0) || !(observed[i] > 0.0))
      throw DomainError("goodness: log-space Huber needs positive values");
    sum += huber(std::log(predicted[i]) - std::log(observed[i]), delta);
  }
  g.mean_huber = sum / static_cast<double>(observed.size());
  return g;
}

std::vector<RunRecord> synth_runs(const LawParams& law,
                                  const std::vector<SynthPoint>& grid,
                                  double noise_sigma, std::uint64_t seed,
                                  Family family) {
  if (grid.empty()) throw DomainError("synth_runs: empty grid");
  if (noise_sigma < 0.0)
    throw DomainError("synth_runs: noise_sigma must be >= 0");
  Rng rng(seed);
  std::vector<RunRecord> out;
  out.reserve(grid.size());
  for (const auto& [n, u, e] : grid) {
    double u_n = base_params(law, u);
    double loss = predict_loss(law, n, u, e, u_n);
    if (noise_sigma > 0.0) loss *= std::exp(noise_sigma * rng.normal());
    RunRecord r;
    r.family = family;
    r.n_params = static_cast<std::int64_t>(std::llround(n));
    r.unique_tokens = static_cast<std::int64_t>(std::llround(u));
    r.epochs = e;
    r.tokens_seen = static_cast<std::int64_t>(std::floor(u * e));
    r.final_val_loss = loss;
    r.seed = static_cast<std::int64_t>(seed);
    r.tags["origin"] = "synthetic";
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace dcsl
