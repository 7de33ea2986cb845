#include "dcsl/archcalc.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dcsl/errors.hpp"

namespace dcsl {

std::int64_t ffn_hidden(std::int64_t d_model) {
  if (d_model <= 0) throw DomainError("ffn_hidden: d_model must be positive");
  std::int64_t h_f = (8 * d_model) / (3 * 64) * 64;
  if (h_f == 0)
    throw DomainError("ffn_hidden: d_model " + std::to_string(d_model) +
                      " too small (needs >= 24)");
  return h_f;
}

std::int64_t param_count(std::int64_t n_layers, std::int64_t d_model,
                         std::int64_t ffw_size, std::int64_t vocab) {
  if (n_layers < 0)
    throw DomainError("param_count: n_layers must be non-negative");
  if (d_model <= 0 || ffw_size <= 0 || vocab <= 0)
    throw DomainError("param_count: d_model, ffw_size and vocab must be positive");
  using wide = unsigned __int128;
  wide l = static_cast<wide>(n_layers);
  wide h = static_cast<wide>(d_model);
  wide hf = static_cast<wide>(ffw_size);
  wide v = static_cast<wide>(vocab);
  wide p = 4 * l * h * h + 3 * l * h * hf + 6 * l * h + v * h;
  if (p > static_cast<wide>(std::numeric_limits<std::int64_t>::max()))
    throw NumericError("param_count: result exceeds int64 range");
  return static_cast<std::int64_t>(p);
}

std::vector<TableCheckEntry> table_check(const std::vector<ArchRow>& rows,
                                         std::int64_t vocab, double tol) {
  std::vector<TableCheckEntry> out;
  out.reserve(rows.size());
  for (const ArchRow& row : rows) {
    TableCheckEntry e;
    e.row = row;
    e.computed_ffw = ffn_hidden(row.d_model);
    e.ffw_matches = (e.computed_ffw == row.ffw_size);
    e.computed_params = param_count(row.n_layers, row.d_model, row.ffw_size, vocab);
    double reported = row.reported_params_m * 1e6;
    e.rel_error = reported > 0.0
                      ? std::fabs(static_cast<double>(e.computed_params) - reported) / reported
                      : std::numeric_limits<double>::infinity();
    e.flagged = e.rel_error > tol;
    out.push_back(e);
  }
  return out;
}

std::vector<ArchRow> load_arch_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("load_arch_csv: cannot open " + path);
  std::vector<ArchRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("name,", 0) == 0) continue;  // header
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8)
      throw InputError("load_arch_csv: line " + std::to_string(lineno) +
                       ": expected 8 fields, got " + std::to_string(fields.size()));
    ArchRow r;
    try {
      r.name = fields[0];
      r.reported_params_m = std::stod(fields[1]);
      r.d_model = std::stoll(fields[2]);
      r.origin_ffw_size = std::stoll(fields[3]);
      r.ffw_size = std::stoll(fields[4]);
      r.kv_size = std::stoll(fields[5]);
      r.n_heads = std::stoll(fields[6]);
      r.n_layers = std::stoll(fields[7]);
    } catch (const std::exception&) {
      throw InputError("load_arch_csv: line " + std::to_string(lineno) +
                       ": malformed numeric field");
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dcsl
