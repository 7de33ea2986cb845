#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dcsl {

inline constexpr std::int64_t kGpt2Vocab = 50257;

// Feed-forward hidden size rounded down to a multiple of 64:
// floor(8*d_model / (3*64)) * 64. Throws DomainError when the result
// would be zero (d_model < 24).
std::int64_t ffn_hidden(std::int64_t d_model);

// P = 4*l*h^2 + 3*l*h*h_f + 6*l*h + V*h, evaluated exactly in 128-bit
// intermediates. Throws DomainError on non-positive h/h_f/V, NumericError
// if the result exceeds int64 range.
std::int64_t param_count(std::int64_t n_layers, std::int64_t d_model,
                         std::int64_t ffw_size, std::int64_t vocab);

struct ArchRow {
  std::string name;
  double reported_params_m = 0.0;  // param column, millions
  std::int64_t d_model = 0;
  std::int64_t origin_ffw_size = 0;
  std::int64_t ffw_size = 0;
  std::int64_t kv_size = 0;
  std::int64_t n_heads = 0;
  std::int64_t n_layers = 0;
};

struct TableCheckEntry {
  ArchRow row;
  std::int64_t computed_ffw = 0;
  std::int64_t computed_params = 0;
  double rel_error = 0.0;  // vs reported params
  bool ffw_matches = false;
  bool flagged = false;  // rel_error > tolerance
};

// Recomputes every row with the given vocabulary and flags rows whose
// parameter count deviates more than `tol` from the reported value.
std::vector<TableCheckEntry> table_check(const std::vector<ArchRow>& rows,
                                         std::int64_t vocab = kGpt2Vocab,
                                         double tol = 0.005);

// CSV fixture: name,param_m,d_model,origin_ffw_size,ffw_size,kv_size,n_heads,n_layers
std::vector<ArchRow> load_arch_csv(const std::string& path);

}  // namespace dcsl
