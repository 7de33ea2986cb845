// Acceptance suite: exercises every shipped guarantee end to end and
// prints one PASS/FAIL line per criterion. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcsl/archcalc.hpp"
#include "dcsl/errors.hpp"
#include "dcsl/fitter.hpp"
#include "dcsl/frontier.hpp"
#include "dcsl/lawcore.hpp"
#include "dcsl/numerics.hpp"
#include "dcsl/rng.hpp"
#include "dcsl/runstore.hpp"
#include "dcsl/toytrain.hpp"

using namespace dcsl;
using nlohmann::json;

namespace {

std::string g_data_dir;
std::string g_bin;

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

struct CriterionResult {
  int id;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0.0;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

std::vector<CriterionResult> g_results;

void check(CriterionResult& cr, const std::string& name, bool ok,
           const std::string& detail = "") {
  cr.checks.push_back({name, ok, detail});
  std::printf("    %-4s %s%s%s\n", ok ? "ok" : "FAIL", name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
}

void run_criterion(int id, const std::string& title, double budget_s,
                   const std::function<void(CriterionResult&)>& body) {
  CriterionResult cr;
  cr.id = id;
  cr.title = title;
  std::printf("criterion %d: %s\n", id, title.c_str());
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(cr);
  } catch (const std::exception& e) {
    cr.checks.push_back({"no unexpected exception", false, e.what()});
    std::printf("    FAIL unexpected exception -- %s\n", e.what());
  }
  cr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  check(cr, "runtime budget", cr.seconds < budget_s,
        fmt9(cr.seconds) + " s of " + fmt9(budget_s) + " s");
  std::printf("criterion %d: %s (%.2f s)\n\n", id,
              cr.pass() ? "PASS" : "FAIL", cr.seconds);
  g_results.push_back(cr);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

int run_cli(const std::string& args, const std::string& tag) {
  std::string cmd = g_bin + " " + args + " >acc_" + tag + ".out 2>acc_" + tag + ".err";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool rel_within(double got, double want, double tol) {
  return std::fabs(got / want - 1.0) <= tol;
}

// ------------------------------------------------------------------------
// shared fixtures

const LawParams kRecoveryLaw{406.4, 410.7, 0.34, 0.28, 1.69, 31.19, 55.16};

std::vector<SynthPoint> recovery_grid() {
  std::vector<SynthPoint> grid;
  for (double n : {1e6, 4e6, 1.6e7, 6.4e7, 1e9})
    for (double u : {1e8, 1e9, 1e10, 1e11})
      for (double e : {1., 2., 5., 12., 30., 100.})
        grid.emplace_back(n, u, e);
  return grid;
}

json two_stage_fit_json(std::uint64_t synth_seed) {
  auto runs = synth_runs(kRecoveryLaw, recovery_grid(), 0.01, synth_seed);
  std::vector<RunRecord> single;
  for (const auto& r : runs)
    if (r.epochs == 1.0) single.push_back(r);
  FitConfig cfg;
  cfg.n_starts = 64;
  cfg.seed = 12;
  cfg.huber_delta = 0.01;  // matched to the generated noise scale
  Stage1Fit s1 = fit_stage1(single, cfg);
  Stage2Fit s2 = fit_stage2(runs, s1, cfg);
  json j;
  j["stage1"] = {{"A", s1.A},       {"B", s1.B},   {"alpha", s1.alpha},
                 {"beta", s1.beta}, {"E0", s1.E0}};
  j["stage2"] = {{"r_d_star", s2.r_d_star}, {"r_n_star", s2.r_n_star}};
  j["r_squared_stage1"] = s1.report.r_squared;
  return j;
}

const char* kDeskGridCorpus =
    R"({"type": "markov", "vocab": 64, "tokens": 65536, "seed": 101})";

std::string desk_grid_config() {
  json runs = json::array();
  int i = 0;
  for (const char* fam : {"ar", "diffusion"}) {
    for (int d : {16, 24, 32})
      for (int u : {2048, 6144})
        for (int e : {1, 8, 64}) {
          runs.push_back({{"family", fam},
                          {"d_model", d},
                          {"unique_tokens", u},
                          {"epochs", e},
                          {"seed", 100 + i},
                          {"model_seed", 200 + i}});
          ++i;
        }
    runs.push_back({{"family", fam},
                    {"d_model", 32},
                    {"unique_tokens", 2048},
                    {"epochs", 200},
                    {"seed", 100 + i},
                    {"model_seed", 200 + i}});
    ++i;
  }
  json cfg;
  cfg["corpus"] = json::parse(kDeskGridCorpus);
  cfg["defaults"] = {{"seq_len", 32},     {"n_layers", 1},
                     {"batch_size", 16},  {"peak_lr", 2e-3},
                     {"min_lr", 2e-4},    {"eval_mask_samples", 8}};
  cfg["runs"] = runs;
  return cfg.dump(1);
}

// ------------------------------------------------------------------------

void criterion1(CriterionResult& cr) {
  auto rows = load_arch_csv(g_data_dir + "/table3.csv");
  check(cr, "fixture has all 54 rows", rows.size() == 54);
  auto checks = table_check(rows);
  bool ffw_all = true, param_all = true;
  for (const auto& e : checks) {
    ffw_all = ffw_all && e.ffw_matches;
    param_all = param_all && e.rel_error < 0.005;
  }
  check(cr, "ffn_hidden reproduces every ffw_size exactly", ffw_all);
  check(cr, "param_count within 0.5% on every row", param_all);
  check(cr, "anchor row 7 = 7,000,448",
        param_count(3, 128, 320, kGpt2Vocab) == 7000448);
  check(cr, "anchor row 14 = 13,614,048",
        param_count(4, 224, 576, kGpt2Vocab) == 13614048);
}

void criterion2(CriterionResult& cr) {
  bool exact = true;
  for (double r : {1.0, 31.19, 493.89, 1000.0})
    for (double u : {1e6, 1e8})
      exact = exact && (effective_data(u, 1.0, r) == u);
  check(cr, "D'(U, 1, R) == U exactly", exact);

  bool asym = true;
  for (double r : {31.19, 493.89})
    asym = asym && rel_within(effective_data(1e8, 1e9, r), 1e8 * (1.0 + r), 1e-6);
  check(cr, "D'(U, E=1e9, R) == U(1+R) within 1e-6", asym);

  std::printf("    exponential vs geometric (delta = 1/(1+R)), per-cell rel deviation:\n");
  bool grid_ok = true;
  for (double r : {1.0, 31.19, 493.89, 1000.0}) {
    std::printf("      R=%-8g", r);
    for (std::int64_t e : {2, 4, 10, 100, 1000}) {
      double a = effective_data(1.0, static_cast<double>(e), r);
      double g = effective_data_geometric(1.0, e, 1.0 / (1.0 + r));
      double dev = std::fabs(a - g) / g;
      grid_ok = grid_ok && dev <= 0.01;
      std::printf(" E=%-5lld %6.3f%%%s", static_cast<long long>(e), 100.0 * dev,
                  dev <= 0.01 ? " " : "*");
    }
    std::printf("\n");
  }
  check(cr, "exponential vs geometric within 1% on the full grid", grid_ok,
        grid_ok ? "" :
        "cells marked * exceed 1%; the exponential form approximates the "
        "geometric sum only to O(1/R), so small R with small E genuinely "
        "diverges (max 8.8% at R=1, E=2); the agreement tightens as R grows");
}

void criterion3(CriterionResult& cr) {
  double f4 = effective_fraction(1e8, 4.0, 31.19);
  double f100 = effective_fraction(1e8, 100.0, 493.89);
  check(cr, "fraction(E=4, R=31.19) in [0.95, 0.98]", f4 >= 0.95 && f4 <= 0.98,
        fmt9(f4));
  check(cr, "fraction(E=100, R=493.89) in [0.89, 0.93]",
        f100 >= 0.89 && f100 <= 0.93, fmt9(f100));
}

void criterion4(CriterionResult& cr) {
  json fit = two_stage_fit_json(3);
  spit("acc_c4_fit.json", fit.dump(2) + "\n");
  double alpha = fit["stage1"]["alpha"].get<double>();
  double beta = fit["stage1"]["beta"].get<double>();
  double e0 = fit["stage1"]["E0"].get<double>();
  double rd = fit["stage2"]["r_d_star"].get<double>();
  double rn = fit["stage2"]["r_n_star"].get<double>();
  double r2 = fit["r_squared_stage1"].get<double>();
  check(cr, "alpha within 5%", rel_within(alpha, kRecoveryLaw.alpha, 0.05),
        fmt9(alpha) + " vs " + fmt9(kRecoveryLaw.alpha));
  check(cr, "beta within 5%", rel_within(beta, kRecoveryLaw.beta, 0.05),
        fmt9(beta) + " vs " + fmt9(kRecoveryLaw.beta));
  check(cr, "E0 within 5%", rel_within(e0, kRecoveryLaw.E0, 0.05),
        fmt9(e0) + " vs " + fmt9(kRecoveryLaw.E0));
  check(cr, "R_D* within 10%", rel_within(rd, kRecoveryLaw.r_d_star, 0.10),
        fmt9(rd) + " vs " + fmt9(kRecoveryLaw.r_d_star));
  check(cr, "R_N* within 10%", rel_within(rn, kRecoveryLaw.r_n_star, 0.10),
        fmt9(rn) + " vs " + fmt9(kRecoveryLaw.r_n_star) +
            (rel_within(rn, kRecoveryLaw.r_n_star, 0.10) ? "" :
             "; the staged protocol computes U_N from stage-1 estimates, "
             "whose exponent-ratio noise is amplified by ln(G*U) into a "
             "systematic 10-50% U_N error that R_N* absorbs directly; no "
             "noise seed passes this clause (0/10 in calibration)"));
  check(cr, "stage-1 R^2 >= 0.94", r2 >= 0.94, fmt9(r2));
}

void criterion5(CriterionResult& cr) {
  // constructed pair with equal E0 and huge decay constants: closed-form
  // crossover C* = 6 * (K1/K2)^(1/(g1-g2))
  LawParams fast{500.0 * 39.86, 1000.0 * 39.86, 0.5, 0.5, 2.0, 1e12, 1e12};
  LawParams slow{300.0, 600.0, 0.3, 0.3, 2.0, 1e12, 1e12};
  auto k_gamma = [](const LawParams& l) {
    double g = std::pow(l.alpha * l.A / (l.beta * l.B), 1.0 / (l.alpha + l.beta));
    return std::pair<double, double>{
        l.A * std::pow(g, -l.alpha) + l.B * std::pow(g, l.beta),
        l.alpha * l.beta / (l.alpha + l.beta)};
  };
  auto [k1, g1] = k_gamma(fast);
  auto [k2, g2] = k_gamma(slow);
  double closed = 6.0 * std::pow(k1 / k2, 1.0 / (g1 - g2));
  double got = critical_compute(slow, fast, 1e8, 1e15, 1e24);
  check(cr, "bisection matches the closed form within 1e-4",
        rel_within(got, closed, 1e-4), fmt9(got) + " vs " + fmt9(closed));

  std::vector<std::pair<double, double>> pts;
  for (double u : {1e7, 1e8, 1e9})
    pts.emplace_back(u, 191.6 * std::pow(u, 2.174));
  CritFit fit = fit_crit_powerlaw(pts);
  check(cr, "power-law exponent 2.174 within 1e-3",
        std::fabs(fit.exponent - 2.174) <= 1e-3, fmt9(fit.exponent));

  double lhs = 2.12 * std::pow(10.0, 1.956);
  double rhs = std::pow(10.0, 1.050 / 0.460);
  check(cr, "printed coefficient forms agree within 0.5%",
        std::fabs(lhs - rhs) / rhs <= 0.005,
        fmt9(lhs) + " vs " + fmt9(rhs));
}

json gradcheck_report() {
  auto corpus = markov_corpus(256, 11, 6);
  Eigen::MatrixXi batch = sequences_from_tokens(corpus, 0, 3 * 8, 8);
  json out;
  for (Family fam : {Family::ar, Family::diffusion}) {
    ToyModelConfig cfg;
    cfg.vocab = 11;
    cfg.seq_len = 8;
    cfg.d_model = 8;
    cfg.n_layers = 1;
    cfg.init_scale = 0.5;
    cfg.attn_mode = fam == Family::ar ? AttnMode::causal : AttnMode::bidirectional;
    cfg.seed = 12;
    ToyModel model = ToyModel::init(cfg);
    out[family_name(fam)] = grad_check(model, batch, fam, 1e-4, 18);
    out["n_params_" + family_name(fam)] = model.n_params();
  }
  return out;
}

void criterion6(CriterionResult& cr) {
  json rep = gradcheck_report();
  spit("acc_c6_gradcheck.json", rep.dump(2) + "\n");
  double ar = rep["ar"].get<double>();
  double diff = rep["diffusion"].get<double>();
  check(cr, "model under 5k parameters",
        rep["n_params_ar"].get<long long>() <= 5000,
        std::to_string(rep["n_params_ar"].get<long long>()) + " params");
  check(cr, "ar objective max rel error < 1e-4", ar < 1e-4, fmt9(ar));
  check(cr, "diffusion objective max rel error < 1e-4", diff < 1e-4, fmt9(diff));
}

void criterion7(CriterionResult& cr) {
  // uniform predictor: zero-initialized model
  const int L = 128, V = 11;
  ToyModelConfig cfg;
  cfg.vocab = V;
  cfg.seq_len = L;
  cfg.d_model = 8;
  cfg.n_layers = 1;
  cfg.attn_mode = AttnMode::causal;
  cfg.seed = 1;
  ToyModel ar_model = ToyModel::init(cfg);
  for (auto& p : ar_model.params) p.setZero();
  Eigen::MatrixXi batch(25, L);
  {
    Rng rng(2);
    for (int i = 0; i < 25; ++i)
      for (int j = 0; j < L; ++j)
        batch(i, j) = static_cast<int>(rng.uniform_int(V));
  }
  double ar = ar_loss(ar_model, batch);
  check(cr, "uniform AR loss equals ln V",
        std::fabs(ar - std::log(V)) < 1e-12, fmt9(ar) + " vs " + fmt9(std::log(V)));

  cfg.attn_mode = AttnMode::bidirectional;
  ToyModel diff_model = ToyModel::init(cfg);
  for (auto& p : diff_model.params) p.setZero();
  Rng rng(3);
  double total = 0.0;
  const int reps = 400;  // 400 x 25 sequences = 10,000 corruption draws
  for (int rep = 0; rep < reps; ++rep)
    total += diffusion_loss(diff_model, corrupt(batch, V, rng));
  double mean = total / reps;
  check(cr, "uniform diffusion loss equals ln V within 2% (10k draws)",
        rel_within(mean, std::log(V), 0.02), fmt9(mean) + " vs " + fmt9(std::log(V)));

  // causal leakage: exact zero
  cfg.attn_mode = AttnMode::causal;
  cfg.init_scale = 0.3;
  cfg.seed = 9;
  ToyModel probe = ToyModel::init(cfg);
  Eigen::VectorXi tokens = batch.row(0).transpose();
  Eigen::MatrixXd before = forward_logits(probe, tokens);
  bool leak_free = true;
  for (int j = 1; j < L; j += 13) {
    Eigen::VectorXi pert = tokens;
    pert(j) = (pert(j) + 1) % V;
    Eigen::MatrixXd after = forward_logits(probe, pert);
    for (int t = 0; t < j && leak_free; ++t)
      leak_free = (after.row(t) - before.row(t)).cwiseAbs().maxCoeff() == 0.0;
  }
  check(cr, "causal leakage exactly zero", leak_free);

  // mask-rate Monte Carlo at L = 64
  Eigen::MatrixXi b64(100, 64);
  {
    Rng r2(4);
    for (int i = 0; i < 100; ++i)
      for (int j = 0; j < 64; ++j) b64(i, j) = static_cast<int>(r2.uniform_int(V));
  }
  Rng r3(5);
  std::int64_t masked = 0, cells = 0;
  for (int rep = 0; rep < 100; ++rep) {
    CorruptedBatch cb = corrupt(b64, V, r3);
    for (const auto& ms : cb.mask_sets) masked += ms.size();
    cells += 100 * 64;
  }
  double rate = static_cast<double>(masked) / static_cast<double>(cells);
  check(cr, "mask rate within 2% of 0.5", rel_within(rate, 0.5, 0.02), fmt9(rate));
}

void criterion8(CriterionResult& cr) {
  spit("acc_c8_grid.json", desk_grid_config());
  int rc = run_cli(
      "train-toy --config acc_c8_grid.json --out acc_c8_runs.jsonl "
      "--metrics acc_c8_metrics.csv --seed 9", "c8_train");
  check(cr, "train-toy grid completes", rc == 0, "exit " + std::to_string(rc));
  if (rc != 0) return;

  IngestResult ing = ingest_runs("acc_c8_runs.jsonl", RunFormat::jsonl);
  check(cr, ">= 24 run records (2 families x sizes x epochs)",
        ing.records.size() >= 24, std::to_string(ing.records.size()) + " records");

  int rc_ar = run_cli("fit --runs acc_c8_runs.jsonl --family ar --seed 5 "
                      "--out acc_c8_fit_ar.json", "c8_fit_ar");
  int rc_diff = run_cli("fit --runs acc_c8_runs.jsonl --family diffusion --seed 5 "
                        "--out acc_c8_fit_diffusion.json", "c8_fit_diff");
  check(cr, "cmd_fit converges on the ar family", rc_ar == 0,
        "exit " + std::to_string(rc_ar));
  check(cr, "cmd_fit converges on the diffusion family", rc_diff == 0,
        "exit " + std::to_string(rc_diff));

  // the high-epoch pair: last run of each family block (indices 18 and 37)
  auto curve_stats = [&](const RunRecord& r) {
    double mn = 1e300;
    std::size_t argmn = 0;
    for (std::size_t i = 0; i < r.loss_curve.size(); ++i)
      if (r.loss_curve[i].second < mn) {
        mn = r.loss_curve[i].second;
        argmn = i;
      }
    return std::tuple<double, std::size_t, std::size_t>{mn, argmn,
                                                        r.loss_curve.size()};
  };
  const RunRecord& ar_run = ing.records[18];
  const RunRecord& diff_run = ing.records[37];
  bool pair_ok = ar_run.family == Family::ar && ar_run.epochs == 200.0 &&
                 diff_run.family == Family::diffusion && diff_run.epochs == 200.0;
  check(cr, "high-epoch pair present (U=2048, E=200)", pair_ok);
  auto [ar_min, ar_argmin, ar_len] = curve_stats(ar_run);
  auto [diff_min, diff_argmin, diff_len] = curve_stats(diff_run);
  double ar_rise = ar_run.final_val_loss / ar_min - 1.0;
  double diff_rise = diff_run.final_val_loss / diff_min - 1.0;
  check(cr, "ar validation loss has its minimum before the final epoch",
        ar_argmin + 1 < ar_len && ar_rise > 0.02,
        "min at epoch " + std::to_string(ar_argmin + 1) + "/" +
            std::to_string(ar_len) + ", final " + fmt9(100.0 * ar_rise) +
            "% above it");
  check(cr, "diffusion final validation loss within 2% of its own minimum",
        diff_rise <= 0.02, "final " + fmt9(100.0 * diff_rise) + "% above min");
}

void criterion9(CriterionResult& cr) {
  // criterion 4 pipeline repeated
  json fit_again = two_stage_fit_json(3);
  spit("acc_c9_fit.json", fit_again.dump(2) + "\n");
  check(cr, "criterion-4 fit byte-identical on rerun",
        slurp("acc_c4_fit.json") == slurp("acc_c9_fit.json") &&
            !slurp("acc_c4_fit.json").empty());

  // criterion 6 pipeline repeated
  json gc_again = gradcheck_report();
  spit("acc_c9_gradcheck.json", gc_again.dump(2) + "\n");
  check(cr, "criterion-6 gradcheck byte-identical on rerun",
        slurp("acc_c6_gradcheck.json") == slurp("acc_c9_gradcheck.json") &&
            !slurp("acc_c6_gradcheck.json").empty());

  // criterion 8 pipeline repeated through the CLI
  int rc = run_cli(
      "train-toy --config acc_c8_grid.json --out acc_c9_runs.jsonl "
      "--metrics acc_c9_metrics.csv --seed 9", "c9_train");
  check(cr, "train-toy rerun completes", rc == 0, "exit " + std::to_string(rc));
  check(cr, "criterion-8 run records byte-identical on rerun",
        slurp("acc_c8_runs.jsonl") == slurp("acc_c9_runs.jsonl") &&
            !slurp("acc_c8_runs.jsonl").empty());
  check(cr, "criterion-8 metrics byte-identical on rerun",
        slurp("acc_c8_metrics.csv") == slurp("acc_c9_metrics.csv"));
}

}  // namespace

int main() {
  const char* data = std::getenv("DCSL_DATA");
  const char* bin = std::getenv("DCSL_BIN");
  if (!data || !bin) {
    std::fprintf(stderr, "DCSL_DATA and DCSL_BIN must be set\n");
    return 64;
  }
  g_data_dir = data;
  g_bin = bin;

  run_criterion(1, "architecture table regression", 1.0, criterion1);
  run_criterion(2, "effective-data identities", 1.0, criterion2);
  run_criterion(3, "effective-fraction anchors", 1.0, criterion3);
  run_criterion(4, "two-stage fit recovery", 300.0, criterion4);
  run_criterion(5, "crossover machinery", 10.0, criterion5);
  run_criterion(6, "gradient correctness", 30.0, criterion6);
  run_criterion(7, "objective identities", 60.0, criterion7);
  run_criterion(8, "end-to-end desk pipeline", 1800.0, criterion8);
  run_criterion(9, "determinism", 1800.0, criterion9);

  int failures = 0;
  std::printf("==== acceptance summary ====\n");
  for (const auto& cr : g_results) {
    bool ok = cr.pass();
    failures += !ok;
    std::printf("criterion %d [%s] %s (%.2f s)\n", cr.id, ok ? "PASS" : "FAIL",
                cr.title.c_str(), cr.seconds);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(g_results.size()) - failures,
              g_results.size());
  return failures;
}
