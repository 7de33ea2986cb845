#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dcsl/archcalc.hpp"
#include "dcsl/errors.hpp"
#include "dcsl/fitter.hpp"
#include "dcsl/frontier.hpp"
#include "dcsl/lawcore.hpp"
#include "dcsl/runstore.hpp"
#include "dcsl/toytrain.hpp"

namespace py = pybind11;
using namespace dcsl;

namespace {

py::dict record_to_dict(const RunRecord& r) {
  py::dict d;
  d["family"] = family_name(r.family);
  d["n_params"] = r.n_params;
  d["unique_tokens"] = r.unique_tokens;
  d["epochs"] = r.epochs;
  d["tokens_seen"] = r.tokens_seen;
  d["final_val_loss"] = r.final_val_loss;
  d["loss_curve"] = r.loss_curve;
  d["seed"] = r.seed;
  d["tags"] = r.tags;
  return d;
}

RunRecord record_from_dict(const py::dict& d) {
  RunRecord r;
  r.family = family_from_string(d["family"].cast<std::string>());
  r.n_params = d["n_params"].cast<std::int64_t>();
  r.unique_tokens = d["unique_tokens"].cast<std::int64_t>();
  r.epochs = d["epochs"].cast<double>();
  if (d.contains("tokens_seen"))
    r.tokens_seen = d["tokens_seen"].cast<std::int64_t>();
  else
    r.tokens_seen = static_cast<std::int64_t>(
        std::floor(static_cast<double>(r.unique_tokens) * r.epochs));
  r.final_val_loss = d["final_val_loss"].cast<double>();
  if (d.contains("loss_curve"))
    r.loss_curve =
        d["loss_curve"].cast<std::vector<std::pair<std::int64_t, double>>>();
  if (d.contains("seed")) r.seed = d["seed"].cast<std::int64_t>();
  validate_record(r);
  return r;
}

std::vector<RunRecord> records_from_list(const py::list& runs) {
  std::vector<RunRecord> out;
  for (const auto& item : runs) out.push_back(record_from_dict(item.cast<py::dict>()));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "data-constrained scaling-law laboratory (C++ core)";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);

  py::class_<LawParams>(m, "LawParams")
      .def(py::init([](double A, double B, double alpha, double beta, double E0,
                       double r_d_star, double r_n_star) {
             LawParams law{A, B, alpha, beta, E0, r_d_star, r_n_star};
             law.validate();
             return law;
           }),
           py::arg("A"), py::arg("B"), py::arg("alpha"), py::arg("beta"),
           py::arg("E0"), py::arg("r_d_star"), py::arg("r_n_star"))
      .def_readonly("A", &LawParams::A)
      .def_readonly("B", &LawParams::B)
      .def_readonly("alpha", &LawParams::alpha)
      .def_readonly("beta", &LawParams::beta)
      .def_readonly("E0", &LawParams::E0)
      .def_readonly("r_d_star", &LawParams::r_d_star)
      .def_readonly("r_n_star", &LawParams::r_n_star)
      .def("to_json", &law_to_json)
      .def_static("from_json", &law_from_json_text)
      .def("__repr__", [](const LawParams& l) {
        return "LawParams(" + law_to_json(l) + ")";
      });

  // lawcore
  m.def("effective_data", &effective_data, py::arg("unique_tokens"),
        py::arg("epochs"), py::arg("r_d_star"));
  m.def("effective_data_geometric", &effective_data_geometric,
        py::arg("unique_tokens"), py::arg("epochs"), py::arg("delta"));
  m.def("effective_params", &effective_params, py::arg("n_params"),
        py::arg("u_n"), py::arg("r_n_star"));
  m.def("predict_loss", &predict_loss, py::arg("law"), py::arg("n_params"),
        py::arg("unique_tokens"), py::arg("epochs"), py::arg("u_n"));
  m.def("effective_fraction", &effective_fraction, py::arg("unique_tokens"),
        py::arg("epochs"), py::arg("r_d_star"));
  m.def(
      "optimal_allocation",
      [](const LawParams& law, double flops) {
        Allocation a = optimal_allocation(law, flops);
        return py::make_tuple(a.n_opt, a.d_opt);
      },
      py::arg("law"), py::arg("flops"));
  m.def("base_params", &base_params, py::arg("law"), py::arg("unique_tokens"));

  // archcalc
  m.def("ffn_hidden", &ffn_hidden, py::arg("d_model"));
  m.def("param_count", &param_count, py::arg("n_layers"), py::arg("d_model"),
        py::arg("ffw_size"), py::arg("vocab") = kGpt2Vocab);

  // runstore
  m.def(
      "load_runs",
      [](const std::string& path, const std::string& format) {
        IngestResult res = ingest_runs(
            path, format == "csv" ? RunFormat::csv : RunFormat::jsonl);
        py::list out;
        for (const auto& r : res.records) out.append(record_to_dict(r));
        return out;
      },
      py::arg("path"), py::arg("format") = "jsonl");
  m.def("compute_flops", &compute_flops, py::arg("n_params"),
        py::arg("tokens_seen"));
  m.def(
      "pareto_frontier",
      [](const py::list& runs, const std::string& family, bool use_curve) {
        auto records = records_from_list(runs);
        auto frontier =
            pareto_frontier(records, family_from_string(family), use_curve);
        py::list out;
        for (const auto& p : frontier)
          out.append(py::make_tuple(p.flops, p.best_loss, p.run_id));
        return out;
      },
      py::arg("runs"), py::arg("family"), py::arg("use_curve") = false);

  // fitter
  m.def(
      "synth_runs",
      [](const LawParams& law, const std::vector<SynthPoint>& grid,
         double noise_sigma, std::uint64_t seed, const std::string& family) {
        auto runs =
            synth_runs(law, grid, noise_sigma, seed, family_from_string(family));
        py::list out;
        for (const auto& r : runs) out.append(record_to_dict(r));
        return out;
      },
      py::arg("law"), py::arg("grid"), py::arg("noise_sigma") = 0.0,
      py::arg("seed") = 0, py::arg("family") = "ar");
  m.def(
      "fit_two_stage",
      [](const py::list& runs, double huber_delta, int n_starts,
         std::uint64_t seed) {
        auto records = records_from_list(runs);
        FitConfig cfg;
        cfg.huber_delta = huber_delta;
        cfg.n_starts = n_starts;
        cfg.seed = seed;
        std::vector<RunRecord> single;
        for (const auto& r : records)
          if (r.epochs == 1.0) single.push_back(r);
        Stage1Fit s1 = fit_stage1(single, cfg);
        Stage2Fit s2 = fit_stage2(records, s1, cfg);
        py::dict out;
        py::dict stage1;
        stage1["A"] = s1.A;
        stage1["B"] = s1.B;
        stage1["alpha"] = s1.alpha;
        stage1["beta"] = s1.beta;
        stage1["E0"] = s1.E0;
        stage1["r_squared"] = s1.report.r_squared;
        stage1["objective_value"] = s1.report.objective_value;
        py::dict stage2;
        stage2["r_d_star"] = s2.r_d_star;
        stage2["r_n_star"] = s2.r_n_star;
        stage2["r_squared"] = s2.report.r_squared;
        stage2["objective_value"] = s2.report.objective_value;
        out["stage1"] = stage1;
        out["stage2"] = stage2;
        return out;
      },
      py::arg("runs"), py::arg("huber_delta") = 1e-3, py::arg("n_starts") = 64,
      py::arg("seed") = 0);
  m.def(
      "goodness",
      [](const std::vector<double>& predicted, const std::vector<double>& observed,
         double delta) {
        Goodness g = goodness(predicted, observed, delta);
        return py::make_tuple(g.r_squared, g.mean_huber);
      },
      py::arg("predicted"), py::arg("observed"), py::arg("delta") = 1e-3);

  // frontier
  m.def(
      "best_loss_at",
      [](const LawParams& law, double flops, double unique_tokens) {
        BestLossPoint p = best_loss_at(law, flops, unique_tokens);
        py::dict d;
        d["flops"] = p.flops;
        d["unique_tokens"] = p.unique_tokens;
        d["loss"] = p.loss;
        d["n_star"] = p.n_star;
        d["e_star"] = p.e_star;
        return d;
      },
      py::arg("law"), py::arg("flops"), py::arg("unique_tokens"));
  m.def(
      "loss_gap",
      [](const LawParams& law_diff, const LawParams& law_ar, double flops,
         double unique_tokens) {
        return loss_gap(law_diff, law_ar, flops, unique_tokens);
      },
      py::arg("law_diff"), py::arg("law_ar"), py::arg("flops"),
      py::arg("unique_tokens"));
  m.def(
      "critical_compute",
      [](const LawParams& law_diff, const LawParams& law_ar,
         double unique_tokens, double c_lo, double c_hi) {
        return critical_compute(law_diff, law_ar, unique_tokens, c_lo, c_hi);
      },
      py::arg("law_diff"), py::arg("law_ar"), py::arg("unique_tokens"),
      py::arg("c_lo") = 1e15, py::arg("c_hi") = 1e24);
  m.def(
      "fit_crit_powerlaw",
      [](const std::vector<std::pair<double, double>>& points) {
        CritFit fit = fit_crit_powerlaw(points);
        py::dict d;
        d["slope"] = fit.slope;
        d["intercept"] = fit.intercept;
        d["exponent"] = fit.exponent;
        d["coeff_c"] = fit.coeff_c;
        return d;
      },
      py::arg("points"));
  m.def(
      "repetition_tradeoff",
      [](const LawParams& law, double flops, const std::vector<double>& fractions) {
        auto pts = repetition_tradeoff(law, flops, fractions);
        py::list out;
        for (const auto& p : pts)
          out.append(py::make_tuple(p.fraction, p.epochs, p.predicted_loss));
        return out;
      },
      py::arg("law"), py::arg("flops"), py::arg("fractions"));

  // toytrain
  m.def(
      "train_toy",
      [](const std::string& family, int vocab, int seq_len, int d_model,
         int n_layers, std::int64_t unique_tokens, int epochs, int batch_size,
         double peak_lr, double min_lr, std::uint64_t seed,
         std::uint64_t model_seed, std::int64_t corpus_tokens,
         std::uint64_t corpus_seed) {
        ToyModelConfig mcfg;
        mcfg.vocab = vocab;
        mcfg.seq_len = seq_len;
        mcfg.d_model = d_model;
        mcfg.n_layers = n_layers;
        mcfg.attn_mode = family_from_string(family) == Family::ar
                             ? AttnMode::causal
                             : AttnMode::bidirectional;
        mcfg.seed = model_seed;
        TrainConfig tcfg;
        tcfg.unique_tokens = unique_tokens;
        tcfg.epochs = epochs;
        tcfg.batch_size = batch_size;
        tcfg.peak_lr = peak_lr;
        tcfg.min_lr = min_lr;
        tcfg.seed = seed;
        auto corpus = markov_corpus(corpus_tokens, vocab, corpus_seed);
        TrainResult res = train(mcfg, tcfg, corpus);
        return record_to_dict(res.record);
      },
      py::arg("family"), py::arg("vocab") = 64, py::arg("seq_len") = 32,
      py::arg("d_model") = 16, py::arg("n_layers") = 1,
      py::arg("unique_tokens") = 2048, py::arg("epochs") = 1,
      py::arg("batch_size") = 16, py::arg("peak_lr") = 2e-3,
      py::arg("min_lr") = 2e-4, py::arg("seed") = 0, py::arg("model_seed") = 1,
      py::arg("corpus_tokens") = 16384, py::arg("corpus_seed") = 7);
  m.def(
      "grad_check_toy",
      [](const std::string& objective, double epsilon, std::uint64_t seed) {
        Family fam = family_from_string(objective);
        ToyModelConfig cfg;
        cfg.vocab = 11;
        cfg.seq_len = 8;
        cfg.d_model = 8;
        cfg.n_layers = 1;
        cfg.init_scale = 0.5;
        cfg.attn_mode =
            fam == Family::ar ? AttnMode::causal : AttnMode::bidirectional;
        cfg.seed = seed;
        ToyModel model = ToyModel::init(cfg);
        auto corpus = markov_corpus(256, 11, seed + 1);
        Eigen::MatrixXi batch = sequences_from_tokens(corpus, 0, 3 * 8, 8);
        return grad_check(model, batch, fam, epsilon, seed + 13);
      },
      py::arg("objective"), py::arg("epsilon") = 1e-4, py::arg("seed") = 12);

  m.attr("__version__") = "0.1.0";
}
