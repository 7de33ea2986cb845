#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "dcsl/rng.hpp"
#include "dcsl/runstore.hpp"

namespace dcsl {

enum class AttnMode { causal, bidirectional };

// Tiny sequence model: token embedding + learned position embedding +
// n_layers of {single-head self-attention -> two-layer tanh feed-forward},
// residual connections, biases on every live path, no normalization
// layers. The key projection carries no bias: a shared key offset shifts
// each softmax row uniformly and cancels exactly, so the parameter is
// inert. Input-side vocabulary is vocab+1: id == vocab is the mask token.
struct ToyModelConfig {
  int vocab = 256;
  int seq_len = 64;
  int d_model = 64;
  int n_layers = 1;
  AttnMode attn_mode = AttnMode::causal;
  std::uint64_t seed = 0;
  double init_scale = 0.02;  // weight init std; biases start at zero

  int mask_token() const { return vocab; }
  int ffn_dim() const { return 4 * d_model; }
};

// Parameter tensors in a fixed flat order so the optimizer and the
// finite-difference checker can walk them generically. Biases are 1-row.
struct ToyModel {
  ToyModelConfig cfg;
  std::vector<Eigen::MatrixXd> params;

  static ToyModel init(const ToyModelConfig& cfg);
  std::int64_t n_params() const;

  // layout indices
  static constexpr int kEmb = 0;
  static constexpr int kPos = 1;
  static constexpr int kPerLayer = 11;  // Wq bq Wk Wv bv Wo bo W1 b1 W2 b2
  int layer_base(int layer) const { return 2 + kPerLayer * layer; }
  int out_w_index() const { return 2 + kPerLayer * cfg.n_layers; }
  int out_b_index() const { return out_w_index() + 1; }
};

using GradSet = std::vector<Eigen::MatrixXd>;
GradSet zero_grads(const ToyModel& model);

// Logits for one sequence of input token ids (length seq_len), row t =
// distribution parameters over the clean vocabulary at position t.
Eigen::MatrixXd forward_logits(const ToyModel& model,
                               const Eigen::VectorXi& tokens);

struct CorruptedBatch {
  Eigen::MatrixXi clean;      // batch x L
  Eigen::MatrixXi corrupted;  // mask substitutions applied
  std::vector<std::vector<int>> mask_sets;
  std::vector<double> ratios;  // the drawn r per sequence
};

// One masking ratio r ~ U(0,1) per sequence, each position masked
// independently with probability r; empty-mask draws are resampled
// (bounded retries). forced_r pins r for tests.
CorruptedBatch corrupt(const Eigen::MatrixXi& clean, int mask_token, Rng& rng,
                       std::optional<double> forced_r = std::nullopt,
                       int max_retries = 100);

// Mean over the batch of sum_{j>=2} -log p(x_j | x_<j) / (L-1).
// Requires causal attention. Gradients accumulate into *grads if given.
double ar_loss(const ToyModel& model, const Eigen::MatrixXi& batch,
               GradSet* grads = nullptr);

// Mean over the batch of (1/r) * sum_{i in M} -log p(x_i | x~) / L.
// Requires bidirectional attention.
double diffusion_loss(const ToyModel& model, const CorruptedBatch& batch,
                      GradSet* grads = nullptr);

// Central finite differences over every parameter; returns the max over
// parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// For the diffusion objective the corruption is drawn once (mask_seed).
double grad_check(ToyModel& model, const Eigen::MatrixXi& batch,
                  Family objective, double epsilon = 1e-4,
                  std::uint64_t mask_seed = 1234);

struct TrainConfig {
  std::int64_t unique_tokens = 4096;
  int epochs = 1;
  int batch_size = 32;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double adam_eps = 1e-8;
  double peak_lr = 2e-4;
  double min_lr = 2e-5;
  double warmup_frac = 0.01;
  double weight_decay = 0.1;
  double grad_clip = 1.0;
  int eval_mask_samples = 8;     // K
  std::int64_t val_tokens = 0;   // 0 -> max(batch*L, unique_tokens/4)
  std::uint64_t seed = 0;
};

struct EpochMetrics {
  int epoch = 0;
  std::int64_t tokens_seen = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  RunRecord record;
  std::vector<EpochMetrics> metrics;
};

// AdamW with warmup + cosine decay over the full planned horizon, fresh
// shuffling per epoch, fresh mask draws per pass for diffusion, per-epoch
// validation on a held-out split after the training span.
TrainResult train(const ToyModelConfig& model_cfg, const TrainConfig& train_cfg,
                  const std::vector<int>& corpus);

// K-sample masked validation loss with a fixed evaluation seed.
double eval_diffusion_nll(const ToyModel& model,
                          const std::vector<Eigen::MatrixXi>& val_batches,
                          int mask_samples, std::uint64_t seed);

// Mean AR validation loss over the split (no gradients).
double eval_ar_nll(const ToyModel& model,
                   const std::vector<Eigen::MatrixXi>& val_batches);

// Order-1 Markov chain over `vocab` symbols, `branching` likely successors
// per symbol; license-free synthetic training data.
std::vector<int> markov_corpus(std::int64_t n_tokens, int vocab,
                               std::uint64_t seed, int branching = 4);

// Chops tokens into floor(n/L) rows of length L (row-major, no overlap).
Eigen::MatrixXi sequences_from_tokens(const std::vector<int>& tokens,
                                      std::int64_t offset, std::int64_t count,
                                      int seq_len);

}  // namespace dcsl
