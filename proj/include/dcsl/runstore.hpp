#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dcsl {

enum class Family { ar, diffusion };

std::string family_name(Family f);
Family family_from_string(const std::string& s);

// One training run. tokens_seen == floor(unique_tokens * epochs) within
// one token; loss_curve, if present, is strictly increasing in tokens.
struct RunRecord {
  Family family = Family::ar;
  std::int64_t n_params = 0;
  std::int64_t unique_tokens = 0;
  double epochs = 0.0;
  std::int64_t tokens_seen = 0;
  double final_val_loss = 0.0;
  std::vector<std::pair<std::int64_t, double>> loss_curve;
  std::int64_t seed = 0;
  std::map<std::string, std::string> tags;
};

// Throws ValidationError-style InputError naming the offending field;
// `where` is prefixed to messages (e.g. "line 12: ").
void validate_record(const RunRecord& r, const std::string& where = "");

struct IngestResult {
  std::vector<RunRecord> records;
  std::vector<std::string> warnings;
};

enum class RunFormat { jsonl, csv };

// Strict ingestion: the first malformed or invariant-violating record
// throws with a line-numbered diagnostic. Lines starting with '#' are
// treated as comments. Missing tokens_seen is recomputed.
IngestResult ingest_runs(const std::string& path, RunFormat format);

// Canonical jsonl form (sorted keys, shortest round-trip floats, one
// record per line). ingest(serialize(ingest(x))) is byte-identical.
std::string serialize_run(const RunRecord& r);
std::string serialize_runs(const std::vector<RunRecord>& records);
void write_runs(const std::string& path, const std::vector<RunRecord>& records,
                const std::string& header_comment = "");

// C = 6 * N * D for both families.
double compute_flops(double n_params, double tokens_seen);

struct ParetoPoint {
  double flops = 0.0;
  double best_loss = 0.0;
  std::size_t run_id = 0;  // index into the ingested record list
};

// Best final validation loss achievable at or below each distinct FLOPs
// value, dominated points removed: flops strictly increasing, best_loss
// strictly decreasing. With use_curve, intermediate loss_curve entries
// participate as candidate points at their own FLOPs.
std::vector<ParetoPoint> pareto_frontier(const std::vector<RunRecord>& runs,
                                         Family family, bool use_curve = false);

}  // namespace dcsl
