#include "dcsl/runstore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dcsl/errors.hpp"

namespace dcsl {

std::string family_name(Family f) {
  return f == Family::ar ? "ar" : "diffusion";
}

Family family_from_string(const std::string& s) {
  if (s == "ar") return Family::ar;
  if (s == "diffusion") return Family::diffusion;
  throw InputError("unknown family '" + s + "' (expected 'ar' or 'diffusion')");
}

void validate_record(const RunRecord& r, const std::string& where) {
  auto fail = [&](const std::string& msg) { throw InputError(where + msg); };
  if (r.n_params <= 0) fail("n_params must be > 0");
  if (r.unique_tokens <= 0) fail("unique_tokens must be > 0");
  if (!(r.epochs > 0.0)) fail("epochs must be > 0");
  if (!(r.final_val_loss > 0.0)) fail("final_val_loss must be > 0");
  double expect = std::floor(static_cast<double>(r.unique_tokens) * r.epochs);
  if (std::fabs(static_cast<double>(r.tokens_seen) - expect) > 1.0)
    fail("tokens_seen " + std::to_string(r.tokens_seen) +
         " inconsistent with floor(unique_tokens*epochs) = " +
         std::to_string(static_cast<std::int64_t>(expect)));
  std::int64_t prev = -1;
  for (const auto& [tok, loss] : r.loss_curve) {
    if (!(loss > 0.0)) fail("loss_curve entries must be > 0");
    if (tok <= prev) fail("loss_curve must be strictly increasing in tokens_seen");
    prev = tok;
  }
}

namespace {

RunRecord record_from_json(const nlohmann::json& j, const std::string& where) {
  auto need = [&](const char* name) -> const nlohmann::json& {
    if (!j.contains(name))
      throw InputError(where + "missing field '" + name + "'");
    return j[name];
  };
  RunRecord r;
  r.family = family_from_string(need("family").get<std::string>());
  r.n_params = need("n_params").get<std::int64_t>();
  r.unique_tokens = need("unique_tokens").get<std::int64_t>();
  r.epochs = need("epochs").get<double>();
  r.final_val_loss = need("final_val_loss").get<double>();
  if (j.contains("tokens_seen"))
    r.tokens_seen = j["tokens_seen"].get<std::int64_t>();
  else
    r.tokens_seen = static_cast<std::int64_t>(
        std::floor(static_cast<double>(r.unique_tokens) * r.epochs));
  if (j.contains("loss_curve")) {
    for (const auto& e : j["loss_curve"]) {
      if (!e.is_array() || e.size() != 2)
        throw InputError(where + "loss_curve entries must be [tokens, loss] pairs");
      r.loss_curve.emplace_back(e[0].get<std::int64_t>(), e[1].get<double>());
    }
  }
  if (j.contains("seed")) r.seed = j["seed"].get<std::int64_t>();
  if (j.contains("tags")) {
    for (auto& [k, v] : j["tags"].items())
      r.tags[k] = v.get<std::string>();
  }
  validate_record(r, where);
  return r;
}

IngestResult ingest_jsonl(std::istream& in) {
  IngestResult res;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::string where = "line " + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(where + "json parse error: " + e.what());
    }
    res.records.push_back(record_from_json(j, where));
  }
  if (res.records.empty())
    res.warnings.push_back("no records ingested (empty input)");
  return res;
}

IngestResult ingest_csv(std::istream& in) {
  IngestResult res;
  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (header.empty()) {
      header = fields;
      continue;
    }
    std::string where = "line " + std::to_string(lineno) + ": ";
    if (fields.size() != header.size())
      throw InputError(where + "expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    RunRecord r;
    bool has_tokens_seen = false;
    try {
      for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string& key = header[i];
        const std::string& val = fields[i];
        if (key == "family") r.family = family_from_string(val);
        else if (key == "n_params") r.n_params = std::stoll(val);
        else if (key == "unique_tokens") r.unique_tokens = std::stoll(val);
        else if (key == "epochs") r.epochs = std::stod(val);
        else if (key == "final_val_loss") r.final_val_loss = std::stod(val);
        else if (key == "tokens_seen") { r.tokens_seen = std::stoll(val); has_tokens_seen = true; }
        else if (key == "seed") r.seed = std::stoll(val);
        else throw InputError(where + "unknown csv column '" + key + "'");
      }
    } catch (const InputError&) {
      throw;
    } catch (const std::exception&) {
      throw InputError(where + "malformed numeric field");
    }
    if (!has_tokens_seen)
      r.tokens_seen = static_cast<std::int64_t>(
          std::floor(static_cast<double>(r.unique_tokens) * r.epochs));
    validate_record(r, where);
    res.records.push_back(r);
  }
  if (res.records.empty())
    res.warnings.push_back("no records ingested (empty input)");
  return res;
}

}  // namespace

IngestResult ingest_runs(const std::string& path, RunFormat format) {
  std::ifstream in(path);
  if (!in) throw InputError("ingest_runs: cannot open " + path);
  return format == RunFormat::jsonl ? ingest_jsonl(in) : ingest_csv(in);
}

std::string serialize_run(const RunRecord& r) {
  nlohmann::json j;
  j["family"] = family_name(r.family);
  j["n_params"] = r.n_params;
  j["unique_tokens"] = r.unique_tokens;
  j["epochs"] = r.epochs;
  j["tokens_seen"] = r.tokens_seen;
  j["final_val_loss"] = r.final_val_loss;
  if (!r.loss_curve.empty()) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [tok, loss] : r.loss_curve)
      curve.push_back(nlohmann::json::array({tok, loss}));
    j["loss_curve"] = curve;
  }
  j["seed"] = r.seed;
  j["tags"] = r.tags;
  return j.dump();  // nlohmann objects iterate in sorted key order
}

std::string serialize_runs(const std::vector<RunRecord>& records) {
  std::string out;
  for (const RunRecord& r : records) {
    out += serialize_run(r);
    out += '\n';
  }
  return out;
}

void write_runs(const std::string& path, const std::vector<RunRecord>& records,
                const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw InputError("write_runs: cannot open " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << serialize_runs(records);
}

double compute_flops(double n_params, double tokens_seen) {
  if (!(n_params > 0.0) || !(tokens_seen > 0.0))
    throw DomainError("compute_flops: arguments must be > 0");
  return 6.0 * n_params * tokens_seen;
}

std::vector<ParetoPoint> pareto_frontier(const std::vector<RunRecord>& runs,
                                         Family family, bool use_curve) {
  struct Candidate {
    double flops;
    double loss;
    std::size_t run_id;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunRecord& r = runs[i];
    if (r.family != family) continue;
    cands.push_back({compute_flops(static_cast<double>(r.n_params),
                                   static_cast<double>(r.tokens_seen)),
                     r.final_val_loss, i});
    if (use_curve) {
      for (const auto& [tok, loss] : r.loss_curve)
        cands.push_back({compute_flops(static_cast<double>(r.n_params),
                                       static_cast<double>(tok)),
                         loss, i});
    }
  }
  if (cands.empty())
    throw InputError("pareto_frontier: no runs of family '" +
                     family_name(family) + "'");
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.flops < b.flops;
                   });
  std::vector<ParetoPoint> frontier;
  double best = std::numeric_limits<double>::infinity();
  for (const Candidate& c : cands) {
    if (c.loss < best) {
      best = c.loss;
      if (!frontier.empty() && frontier.back().flops == c.flops)
        frontier.back() = {c.flops, c.loss, c.run_id};
      else
        frontier.push_back({c.flops, c.loss, c.run_id});
    }
  }
  return frontier;
}

}  // namespace dcsl
