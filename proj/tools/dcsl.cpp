#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcsl/archcalc.hpp"
#include "dcsl/errors.hpp"
#include "dcsl/fitter.hpp"
#include "dcsl/frontier.hpp"
#include "dcsl/lawcore.hpp"
#include "dcsl/numerics.hpp"
#include "dcsl/runstore.hpp"
#include "dcsl/toytrain.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;
using namespace dcsl;

std::string meta_comment(std::int64_t seed) {
  return std::string("dcsl ") + kVersion + " seed=" + std::to_string(seed);
}

json meta_object(std::int64_t seed) {
  return json{{"tool", "dcsl"}, {"version", kVersion}, {"seed", seed}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open output file " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

// "1,2,3" or "lo:hi:n" (log-spaced, n >= 2)
std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double lo, hi;
    int n;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 2 ||
        lo <= 0.0 || hi <= lo)
      throw InputError("bad grid spec '" + spec + "' (want lo:hi:count, log-spaced)");
    for (int i = 0; i < n; ++i)
      out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return out;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw InputError("bad numeric value '" + tok + "' in grid spec");
    }
  }
  if (out.empty()) throw InputError("empty grid spec");
  return out;
}

RunFormat parse_format(const std::string& f) {
  if (f == "jsonl" || f == "json") return RunFormat::jsonl;
  if (f == "csv") return RunFormat::csv;
  throw InputError("unknown runs format '" + f + "' (jsonl or csv)");
}

std::vector<RunRecord> load_family_runs(const std::string& path,
                                        const std::string& format,
                                        const std::string& family) {
  IngestResult res = ingest_runs(path, parse_format(format));
  for (const auto& w : res.warnings) std::cerr << "[dcsl] warning: " << w << "\n";
  if (family.empty()) return res.records;
  Family f = family_from_string(family);
  std::vector<RunRecord> out;
  for (const auto& r : res.records)
    if (r.family == f) out.push_back(r);
  return out;
}

FitConfig fit_config_from_json(const std::string& config_path,
                               std::int64_t seed) {
  FitConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(seed);
  if (config_path.empty()) return cfg;
  std::ifstream in(config_path);
  if (!in) throw InputError("cannot open config " + config_path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);  // allow comments
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config parse error: ") + e.what());
  }
  if (j.contains("huber_delta")) cfg.huber_delta = j["huber_delta"].get<double>();
  if (j.contains("n_starts")) cfg.n_starts = j["n_starts"].get<int>();
  if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  auto bound = [&](const char* name, FitBounds& b) {
    if (j.contains(name)) {
      b.lo = j[name][0].get<double>();
      b.hi = j[name][1].get<double>();
      if (!(b.lo < b.hi)) throw InputError(std::string("bad bounds for ") + name);
    }
  };
  bound("bound_a", cfg.bound_a);
  bound("bound_b", cfg.bound_b);
  bound("bound_alpha", cfg.bound_alpha);
  bound("bound_beta", cfg.bound_beta);
  bound("bound_e0", cfg.bound_e0);
  bound("bound_r", cfg.bound_r);
  return cfg;
}

json report_to_json(const FitReport& rep) {
  json j;
  j["r_squared"] = rep.r_squared;
  j["r_squared_log"] = rep.r_squared_log;
  j["objective_value"] = rep.objective_value;
  j["n_runs"] = rep.n_runs;
  j["starts_tried"] = rep.starts_tried;
  j["converged"] = rep.converged;
  if (!rep.warnings.empty()) j["warnings"] = rep.warnings;
  return j;
}

// ---------------------------------------------------------------- fit ----

int cmd_fit(const std::string& runs_path, const std::string& format,
            const std::string& family, const std::string& config_path,
            const std::string& out_path, const std::string& residuals_path,
            bool stage1_only, std::int64_t seed) {
  std::vector<RunRecord> runs = load_family_runs(runs_path, format, family);
  if (runs.empty()) throw InputError("no runs to fit (after family filter)");
  FitConfig cfg = fit_config_from_json(config_path, seed);
  std::cerr << "[dcsl fit] runs=" << runs.size() << " family="
            << (family.empty() ? "all" : family) << " n_starts=" << cfg.n_starts
            << " huber_delta=" << cfg.huber_delta << " seed=" << cfg.seed << "\n";

  std::vector<RunRecord> single;
  for (const auto& r : runs)
    if (r.epochs == 1.0) single.push_back(r);
  Stage1Fit s1 = fit_stage1(single, cfg);

  json out;
  out["meta"] = meta_object(static_cast<std::int64_t>(cfg.seed));
  out["stage1"] = {{"A", s1.A},       {"B", s1.B},   {"alpha", s1.alpha},
                   {"beta", s1.beta}, {"E0", s1.E0}};
  out["report"]["stage1"] = report_to_json(s1.report);

  std::vector<double> residuals_log = s1.report.residuals;
  std::vector<RunRecord> residual_runs = single;

  if (!stage1_only) {
    Stage2Fit s2 = fit_stage2(runs, s1, cfg);
    out["stage2"] = {{"r_d_star", s2.r_d_star}, {"r_n_star", s2.r_n_star}};
    out["report"]["stage2"] = report_to_json(s2.report);
    residuals_log = s2.report.residuals;
    residual_runs = runs;
  }

  if (!out_path.empty()) write_json(out_path, out);
  std::cout << out.dump(2) << "\n";

  if (!residuals_path.empty()) {
    std::string csv = "# " + meta_comment(static_cast<std::int64_t>(cfg.seed)) + "\n";
    csv += "run,n_params,unique_tokens,epochs,observed,residual_log,residual_raw\n";
    for (std::size_t i = 0; i < residual_runs.size(); ++i) {
      const RunRecord& r = residual_runs[i];
      double pred = r.final_val_loss * std::exp(residuals_log[i]);
      csv += std::to_string(i) + "," + std::to_string(r.n_params) + "," +
             std::to_string(r.unique_tokens) + "," + fmt9(r.epochs) + "," +
             fmt9(r.final_val_loss) + "," + fmt9(residuals_log[i]) + "," +
             fmt9(pred - r.final_val_loss) + "\n";
    }
    write_text(residuals_path, csv);
  }
  return 0;
}

// ---------------------------------------------------------- crossover ----

int cmd_crossover(const std::string& law_a_path, const std::string& law_b_path,
                  const std::string& u_spec, double c_lo, double c_hi,
                  const std::string& out_path, const std::string& fit_out_path,
                  std::int64_t seed) {
  LawParams law_diff = load_law_file(law_a_path);
  LawParams law_ar = load_law_file(law_b_path);
  std::vector<double> us = parse_grid(u_spec);
  std::cerr << "[dcsl crossover] u_count=" << us.size() << " bracket=["
            << fmt9(c_lo) << ", " << fmt9(c_hi) << "] seed=" << seed << "\n";

  std::string csv = "# " + meta_comment(seed) + "\n";
  csv += "u,c_crit,status,reason\n";
  std::vector<std::pair<double, double>> points;
  for (double u : us) {
    try {
      double c = critical_compute(law_diff, law_ar, u, c_lo, c_hi);
      points.emplace_back(u, c);
      csv += fmt9(u) + "," + fmt9(c) + ",ok,\n";
    } catch (const InfeasibleError& e) {
      csv += fmt9(u) + ",,no_crossover,\"" + std::string(e.what()) + "\"\n";
    }
  }
  if (!out_path.empty()) write_text(out_path, csv);
  std::cout << csv;

  if (points.size() >= 2) try {
    CritFit fit = fit_crit_powerlaw(points);
    json j;
    j["meta"] = meta_object(seed);
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["exponent"] = fit.exponent;
    j["coeff_c"] = fit.coeff_c;
    json pts = json::array();
    for (const auto& [u, c] : points) pts.push_back({u, c});
    j["points"] = pts;
    if (!fit_out_path.empty()) write_json(fit_out_path, j);
    std::cerr << "[dcsl crossover] power law: log10(U) = " << fit.slope
              << " * log10(C) + " << fit.intercept << " (exponent "
              << fit.exponent << ")\n";
  } catch (const InputError& e) {
    std::cerr << "[dcsl crossover] warning: power-law fit skipped (" << e.what()
              << ")\n";
  } else {
    std::cerr << "[dcsl crossover] warning: fewer than two crossover points, "
                 "power-law fit skipped\n";
  }
  return 0;
}

// ------------------------------------------------------------- pareto ----

int cmd_pareto(const std::string& runs_path, const std::string& format,
               const std::string& family, bool use_curve,
               const std::string& out_path, std::int64_t seed) {
  if (family.empty()) throw InputError("--family is required for pareto");
  IngestResult res = ingest_runs(runs_path, parse_format(format));
  for (const auto& w : res.warnings) std::cerr << "[dcsl] warning: " << w << "\n";
  std::cerr << "[dcsl pareto] runs=" << res.records.size() << " family=" << family
            << " use_curve=" << use_curve << " seed=" << seed << "\n";
  auto frontier =
      pareto_frontier(res.records, family_from_string(family), use_curve);
  std::string csv = "# " + meta_comment(seed) + "\n";
  csv += "flops,best_loss,run_id\n";
  for (const auto& p : frontier)
    csv += fmt9(p.flops) + "," + fmt9(p.best_loss) + "," +
           std::to_string(p.run_id) + "\n";
  if (!out_path.empty()) write_text(out_path, csv);
  std::cout << csv;
  return 0;
}

// ------------------------------------------------------------ heatmap ----

int cmd_heatmap(const std::string& law_a_path, const std::string& law_b_path,
                const std::string& grid_u, const std::string& grid_c,
                const std::string& out_path, std::int64_t seed) {
  LawParams law_diff = load_law_file(law_a_path);
  LawParams law_ar = load_law_file(law_b_path);
  auto us = parse_grid(grid_u);
  auto cs = parse_grid(grid_c);
  std::cerr << "[dcsl heatmap] grid=" << us.size() << "x" << cs.size()
            << " seed=" << seed << "\n";
  HeatmapGrid grid = heatmap_grid(law_diff, law_ar, us, cs);
  std::string csv = heatmap_csv(grid, meta_comment(seed));
  if (!out_path.empty()) write_text(out_path, csv);
  std::cout << csv;
  return 0;
}

// ------------------------------------------------------------- curves ----

int cmd_curves(const std::string& law_path, const std::string& grid_c,
               int max_epochs, const std::string& out_path, std::int64_t seed) {
  LawParams law = load_law_file(law_path);
  auto budgets = parse_grid(grid_c);
  std::cerr << "[dcsl curves] budgets=" << budgets.size()
            << " max_epochs=" << max_epochs << " seed=" << seed << "\n";
  auto curves = extrapolate_curves(law, budgets, max_epochs);
  std::string csv = "# " + meta_comment(seed) + "\n";
  csv += "budget,epoch,tokens,loss,hypothetical_loss\n";
  for (const auto& p : curves)
    csv += fmt9(p.budget) + "," + std::to_string(p.epoch) + "," +
           fmt9(p.tokens_seen) + "," + fmt9(p.loss) + "," +
           fmt9(p.hypothetical_loss) + "\n";
  if (!out_path.empty()) write_text(out_path, csv);
  std::cout << csv;
  return 0;
}

// --------------------------------------------------------- repetition ----

int cmd_repetition(const std::string& law_path, double flops,
                   const std::string& fractions_spec,
                   const std::string& out_path, std::int64_t seed) {
  LawParams law = load_law_file(law_path);
  auto fractions = parse_grid(fractions_spec);
  std::cerr << "[dcsl repetition] c=" << fmt9(flops)
            << " fractions=" << fractions.size() << " seed=" << seed << "\n";
  auto pts = repetition_tradeoff(law, flops, fractions);
  std::string csv = "# " + meta_comment(seed) + "\n";
  csv += "fraction,epochs,predicted_loss\n";
  for (const auto& p : pts)
    csv += fmt9(p.fraction) + "," + fmt9(p.epochs) + "," +
           fmt9(p.predicted_loss) + "\n";
  if (!out_path.empty()) write_text(out_path, csv);
  std::cout << csv;
  return 0;
}

// -------------------------------------------------------------- synth ----

int cmd_synth(const std::string& law_path, const std::string& grid_n,
              const std::string& grid_u, const std::string& grid_e,
              double sigma, const std::string& family,
              const std::string& out_path, std::int64_t seed) {
  LawParams law = load_law_file(law_path);
  auto ns = parse_grid(grid_n);
  auto us = parse_grid(grid_u);
  auto es = parse_grid(grid_e);
  std::vector<SynthPoint> grid;
  for (double n : ns)
    for (double u : us)
      for (double e : es) grid.emplace_back(n, u, e);
  std::cerr << "[dcsl synth] grid=" << ns.size() << "x" << us.size() << "x"
            << es.size() << " sigma=" << sigma << " seed=" << seed << "\n";
  Family fam = family.empty() ? Family::ar : family_from_string(family);
  auto runs = synth_runs(law, grid, sigma, static_cast<std::uint64_t>(seed), fam);
  if (!out_path.empty())
    write_runs(out_path, runs, meta_comment(seed));
  else
    std::cout << serialize_runs(runs);
  return 0;
}

// ---------------------------------------------------------- train-toy ----

ToyModelConfig model_cfg_from_json(const json& j) {
  ToyModelConfig cfg;
  if (j.contains("vocab")) cfg.vocab = j["vocab"].get<int>();
  if (j.contains("seq_len")) cfg.seq_len = j["seq_len"].get<int>();
  if (j.contains("d_model")) cfg.d_model = j["d_model"].get<int>();
  if (j.contains("n_layers")) cfg.n_layers = j["n_layers"].get<int>();
  if (j.contains("init_scale")) cfg.init_scale = j["init_scale"].get<double>();
  if (j.contains("model_seed")) cfg.seed = j["model_seed"].get<std::uint64_t>();
  if (j.contains("family"))
    cfg.attn_mode = family_from_string(j["family"].get<std::string>()) == Family::ar
                        ? AttnMode::causal
                        : AttnMode::bidirectional;
  return cfg;
}

TrainConfig train_cfg_from_json(const json& j) {
  TrainConfig cfg;
  if (j.contains("unique_tokens")) cfg.unique_tokens = j["unique_tokens"].get<std::int64_t>();
  if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
  if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
  if (j.contains("peak_lr")) cfg.peak_lr = j["peak_lr"].get<double>();
  if (j.contains("min_lr")) cfg.min_lr = j["min_lr"].get<double>();
  if (j.contains("warmup_frac")) cfg.warmup_frac = j["warmup_frac"].get<double>();
  if (j.contains("weight_decay")) cfg.weight_decay = j["weight_decay"].get<double>();
  if (j.contains("grad_clip")) cfg.grad_clip = j["grad_clip"].get<double>();
  if (j.contains("eval_mask_samples")) cfg.eval_mask_samples = j["eval_mask_samples"].get<int>();
  if (j.contains("val_tokens")) cfg.val_tokens = j["val_tokens"].get<std::int64_t>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  return cfg;
}

int cmd_train_toy(const std::string& config_path, const std::string& out_path,
                  const std::string& metrics_path, std::int64_t seed) {
  if (config_path.empty()) throw InputError("train-toy requires --config");
  std::ifstream in(config_path);
  if (!in) throw InputError("cannot open config " + config_path);
  json cfg;
  try {
    cfg = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config parse error: ") + e.what());
  }

  // corpus
  std::vector<int> corpus;
  int corpus_vocab = 256;
  if (!cfg.contains("corpus")) throw InputError("config missing 'corpus'");
  const json& cj = cfg["corpus"];
  std::string ctype = cj.value("type", "markov");
  if (ctype == "markov") {
    corpus_vocab = cj.value("vocab", 256);
    std::int64_t tokens = cj.value("tokens", std::int64_t{1} << 20);
    std::uint64_t cseed = cj.value("seed", std::uint64_t(seed));
    corpus = markov_corpus(tokens, corpus_vocab, cseed);
  } else if (ctype == "file") {
    std::string path = cj.at("path").get<std::string>();
    corpus_vocab = cj.value("vocab", 256);
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open corpus file " + path);
    char byte;
    while (f.get(byte)) {
      int tok = static_cast<unsigned char>(byte);
      if (tok >= corpus_vocab)
        throw InputError("corpus byte " + std::to_string(tok) +
                         " outside vocab " + std::to_string(corpus_vocab));
      corpus.push_back(tok);
    }
  } else if (ctype == "jsonl") {
    // one json array of token ids per line, concatenated in order
    std::string path = cj.at("path").get<std::string>();
    corpus_vocab = cj.value("vocab", 256);
    std::ifstream f(path);
    if (!f) throw InputError("cannot open corpus file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      json arr;
      try {
        arr = json::parse(line);
      } catch (const json::parse_error& e) {
        throw InputError("corpus line " + std::to_string(lineno) + ": " + e.what());
      }
      if (!arr.is_array())
        throw InputError("corpus line " + std::to_string(lineno) +
                         ": expected a json array of token ids");
      for (const auto& t : arr) {
        int tok = t.get<int>();
        if (tok < 0 || tok >= corpus_vocab)
          throw InputError("corpus line " + std::to_string(lineno) + ": token " +
                           std::to_string(tok) + " outside vocab " +
                           std::to_string(corpus_vocab));
        corpus.push_back(tok);
      }
    }
  } else {
    throw InputError("unknown corpus type '" + ctype + "'");
  }

  json defaults = cfg.value("defaults", json::object());
  json run_list = cfg.value("runs", json::array());
  if (run_list.empty()) throw InputError("config has no runs");

  std::cerr << "[dcsl train-toy] corpus=" << corpus.size() << " tokens, vocab="
            << corpus_vocab << ", runs=" << run_list.size() << " seed=" << seed
            << "\n";

  std::vector<RunRecord> records;
  std::string metrics_csv = "# " + meta_comment(seed) + "\n";
  metrics_csv += "run,family,epoch,tokens_seen,train_loss,val_loss\n";
  for (std::size_t i = 0; i < run_list.size(); ++i) {
    json merged = defaults;
    for (auto& [k, v] : run_list[i].items()) merged[k] = v;
    ToyModelConfig mcfg = model_cfg_from_json(merged);
    mcfg.vocab = corpus_vocab;
    TrainConfig tcfg = train_cfg_from_json(merged);
    TrainResult res = train(mcfg, tcfg, corpus);
    std::cerr << "[dcsl train-toy] run " << i << " "
              << family_name(res.record.family) << " d=" << mcfg.d_model
              << " U=" << tcfg.unique_tokens << " E=" << tcfg.epochs
              << " final_val=" << fmt9(res.record.final_val_loss) << "\n";
    for (const auto& m : res.metrics)
      metrics_csv += std::to_string(i) + "," + family_name(res.record.family) +
                     "," + std::to_string(m.epoch) + "," +
                     std::to_string(m.tokens_seen) + "," + fmt9(m.train_loss) +
                     "," + fmt9(m.val_loss) + "\n";
    records.push_back(res.record);
  }
  if (!out_path.empty())
    write_runs(out_path, records, meta_comment(seed));
  else
    std::cout << serialize_runs(records);
  if (!metrics_path.empty()) write_text(metrics_path, metrics_csv);
  return 0;
}

// --------------------------------------------------------------- arch ----

int cmd_arch(const std::string& table_path, const std::string& out_path,
             std::int64_t vocab, std::int64_t seed) {
  auto rows = load_arch_csv(table_path);
  auto checks = table_check(rows, vocab);
  std::cerr << "[dcsl arch] rows=" << rows.size() << " vocab=" << vocab
            << " seed=" << seed << "\n";
  std::string csv = "# " + meta_comment(seed) + "\n";
  csv += "name,computed_ffw,reported_ffw,ffw_matches,computed_params,reported_params_m,rel_error,flagged\n";
  int flagged = 0;
  for (const auto& e : checks) {
    csv += e.row.name + "," + std::to_string(e.computed_ffw) + "," +
           std::to_string(e.row.ffw_size) + "," +
           (e.ffw_matches ? "yes" : "NO") + "," +
           std::to_string(e.computed_params) + "," +
           fmt9(e.row.reported_params_m) + "," + fmt9(e.rel_error) + "," +
           (e.flagged ? "YES" : "no") + "\n";
    flagged += e.flagged || !e.ffw_matches;
  }
  if (!out_path.empty()) write_text(out_path, csv);
  std::cout << csv;
  std::cerr << "[dcsl arch] flagged rows: " << flagged << "\n";
  return 0;
}

// ---------------------------------------------------------- gradcheck ----

int cmd_gradcheck(const std::string& objective, double eps, double threshold,
                  const std::string& out_path, std::int64_t seed) {
  std::cerr << "[dcsl gradcheck] objective=" << objective << " eps=" << eps
            << " threshold=" << threshold << " seed=" << seed << "\n";
  auto corpus = markov_corpus(256, 11, static_cast<std::uint64_t>(seed) + 1);
  Eigen::MatrixXi batch = sequences_from_tokens(corpus, 0, 3 * 8, 8);

  json out;
  out["meta"] = meta_object(seed);
  double worst = 0.0;
  auto run_one = [&](Family fam) {
    ToyModelConfig cfg;
    cfg.vocab = 11;
    cfg.seq_len = 8;
    cfg.d_model = 8;
    cfg.n_layers = 1;
    cfg.init_scale = 0.5;
    cfg.attn_mode = fam == Family::ar ? AttnMode::causal : AttnMode::bidirectional;
    cfg.seed = static_cast<std::uint64_t>(seed) + 7;
    ToyModel model = ToyModel::init(cfg);
    double rel = grad_check(model, batch, fam, eps,
                            static_cast<std::uint64_t>(seed) + 13);
    std::cerr << "[dcsl gradcheck] " << family_name(fam)
              << " max rel error = " << rel << " (n_params "
              << model.n_params() << ")\n";
    out[family_name(fam)] = rel;
    worst = std::max(worst, rel);
  };
  if (objective == "ar" || objective == "both") run_one(Family::ar);
  if (objective == "diffusion" || objective == "both") run_one(Family::diffusion);
  if (!(objective == "ar" || objective == "diffusion" || objective == "both"))
    throw InputError("objective must be ar, diffusion or both");

  out["max_rel_error"] = worst;
  out["threshold"] = threshold;
  out["pass"] = worst < threshold;
  if (!out_path.empty()) write_json(out_path, out);
  std::cout << out.dump(2) << "\n";
  if (worst >= threshold)
    throw NumericError("gradient check exceeded threshold: " + fmt9(worst));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data-constrained scaling-law laboratory"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string runs_path, format = "jsonl", family, config_path, out_path;
  std::string law_a, law_b, u_spec, grid_u, grid_c, grid_n, grid_e;
  std::string residuals_path, fit_out, metrics_path, table_path, objective = "both";
  std::string fractions = "1,0.5,0.25,0.125";
  double c_lo = 1e15, c_hi = 1e24, sigma = 0.0, flops = 1e19;
  double eps = 1e-4, threshold = 1e-4;
  int max_epochs = 100;
  std::int64_t seed = 0, vocab = kGpt2Vocab;
  bool use_curve = false, stage1_only = false;

  auto* fit = app.add_subcommand("fit", "two-stage scaling-law fit from run records");
  fit->add_option("--runs", runs_path, "run records file")->required();
  fit->add_option("--format", format, "runs format: jsonl|csv");
  fit->add_option("--family", family, "family filter: ar|diffusion");
  fit->add_option("--config", config_path, "fit config json");
  fit->add_option("--out", out_path, "fit result json");
  fit->add_option("--residuals", residuals_path, "residuals csv");
  fit->add_flag("--stage1-only", stage1_only, "skip the stage-2 decay fit");
  fit->add_option("--seed", seed, "multi-start seed");

  auto* crossover = app.add_subcommand("crossover", "critical compute per unique-token budget");
  crossover->add_option("--law-a", law_a, "diffusion-side law json")->required();
  crossover->add_option("--law-b", law_b, "ar-side law json")->required();
  crossover->add_option("--u", u_spec, "unique-token values (list or lo:hi:n)")->required();
  crossover->add_option("--c-lo", c_lo, "bracket low end (flops)");
  crossover->add_option("--c-hi", c_hi, "bracket high end (flops)");
  crossover->add_option("--out", out_path, "crossover csv");
  crossover->add_option("--fit-out", fit_out, "power-law fit json");
  crossover->add_option("--seed", seed, "echoed in outputs");

  auto* pareto = app.add_subcommand("pareto", "loss-vs-flops frontier from run records");
  pareto->add_option("--runs", runs_path, "run records file")->required();
  pareto->add_option("--format", format, "runs format: jsonl|csv");
  pareto->add_option("--family", family, "family: ar|diffusion")->required();
  pareto->add_flag("--use-curve", use_curve, "include intermediate loss-curve points");
  pareto->add_option("--out", out_path, "frontier csv");
  pareto->add_option("--seed", seed, "echoed in outputs");

  auto* heatmap = app.add_subcommand("heatmap", "loss-gap grid over (U, C)");
  heatmap->add_option("--law-a", law_a, "diffusion-side law json")->required();
  heatmap->add_option("--law-b", law_b, "ar-side law json")->required();
  heatmap->add_option("--grid-u", grid_u, "U grid (list or lo:hi:n)")->required();
  heatmap->add_option("--grid-c", grid_c, "C grid (list or lo:hi:n)")->required();
  heatmap->add_option("--out", out_path, "heatmap csv");
  heatmap->add_option("--seed", seed, "echoed in outputs");

  auto* curves = app.add_subcommand("curves", "multi-epoch extrapolation per budget");
  curves->add_option("--law-a", law_a, "law json")->required();
  curves->add_option("--grid-c", grid_c, "compute budgets (list or lo:hi:n)")->required();
  curves->add_option("--max-epochs", max_epochs, "epochs to sweep");
  curves->add_option("--out", out_path, "curves csv");
  curves->add_option("--seed", seed, "echoed in outputs");

  auto* repetition = app.add_subcommand("repetition", "unique-data fraction trade-off at fixed compute");
  repetition->add_option("--law-a", law_a, "law json")->required();
  repetition->add_option("--c", flops, "compute budget (flops)")->required();
  repetition->add_option("--fractions", fractions, "unique-data fractions in (0,1]");
  repetition->add_option("--out", out_path, "csv output");
  repetition->add_option("--seed", seed, "echoed in outputs");

  auto* synth = app.add_subcommand("synth", "synthetic run records from a law");
  synth->add_option("--law-a", law_a, "law json")->required();
  synth->add_option("--grid-n", grid_n, "N grid (list or lo:hi:n)")->required();
  synth->add_option("--grid-u", grid_u, "U grid (list or lo:hi:n)")->required();
  synth->add_option("--grid-e", grid_e, "E grid (list or lo:hi:n)")->required();
  synth->add_option("--sigma", sigma, "log-loss noise");
  synth->add_option("--family", family, "family label: ar|diffusion");
  synth->add_option("--out", out_path, "output jsonl");
  synth->add_option("--seed", seed, "noise seed");

  auto* train_toy = app.add_subcommand("train-toy", "desk-scale trainer for both objectives");
  train_toy->add_option("--config", config_path, "training grid json")->required();
  train_toy->add_option("--out", out_path, "run records jsonl");
  train_toy->add_option("--metrics", metrics_path, "per-epoch metrics csv");
  train_toy->add_option("--seed", seed, "default corpus seed, echoed in outputs");

  auto* arch = app.add_subcommand("arch", "parameter-count regression over an architecture table");
  arch->add_option("--table", table_path, "architecture csv")->required();
  arch->add_option("--vocab", vocab, "vocabulary size");
  arch->add_option("--out", out_path, "report csv");
  arch->add_option("--seed", seed, "echoed in outputs");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient gate");
  gradcheck->add_option("--objective", objective, "ar|diffusion|both");
  gradcheck->add_option("--eps", eps, "central-difference step");
  gradcheck->add_option("--threshold", threshold, "max allowed rel error");
  gradcheck->add_option("--out", out_path, "report json");
  gradcheck->add_option("--seed", seed, "model/batch seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (fit->parsed())
      return cmd_fit(runs_path, format, family, config_path, out_path,
                     residuals_path, stage1_only, seed);
    if (crossover->parsed())
      return cmd_crossover(law_a, law_b, u_spec, c_lo, c_hi, out_path, fit_out,
                           seed);
    if (pareto->parsed())
      return cmd_pareto(runs_path, format, family, use_curve, out_path, seed);
    if (heatmap->parsed())
      return cmd_heatmap(law_a, law_b, grid_u, grid_c, out_path, seed);
    if (curves->parsed())
      return cmd_curves(law_a, grid_c, max_epochs, out_path, seed);
    if (repetition->parsed())
      return cmd_repetition(law_a, flops, fractions, out_path, seed);
    if (synth->parsed())
      return cmd_synth(law_a, grid_n, grid_u, grid_e, sigma, family, out_path,
                       seed);
    if (train_toy->parsed())
      return cmd_train_toy(config_path, out_path, metrics_path, seed);
    if (arch->parsed()) return cmd_arch(table_path, out_path, vocab, seed);
    if (gradcheck->parsed())
      return cmd_gradcheck(objective, eps, threshold, out_path, seed);
  } catch (const dcsl::Error& e) {
    std::cerr << "[dcsl] error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "[dcsl] unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
