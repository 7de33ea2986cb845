#include "dcsl/toytrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dcsl/errors.hpp"

namespace dcsl {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores) {
  Eigen::MatrixXd out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    double m = scores.row(i).maxCoeff();
    Eigen::ArrayXd e = (scores.row(i).array() - m).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  return out;
}
}  // namespace

ToyModel ToyModel::init(const ToyModelConfig& cfg) {
  if (cfg.seq_len < 2) throw DomainError("ToyModel: seq_len must be >= 2");
  if (cfg.vocab < 2) throw DomainError("ToyModel: vocab must be >= 2");
  if (cfg.n_layers < 1) throw DomainError("ToyModel: n_layers must be >= 1");
  ToyModel m;
  m.cfg = cfg;
  Rng rng(cfg.seed);
  const int d = cfg.d_model;
  const int ff = cfg.ffn_dim();
  auto weight = [&](int rows, int cols) {
    Eigen::MatrixXd w(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(i, j) = cfg.init_scale * rng.normal();
    return w;
  };
  auto bias = [&](int cols) { return Eigen::MatrixXd::Zero(1, cols).eval(); };

  m.params.push_back(weight(cfg.vocab + 1, d));  // emb, mask token row included
  m.params.push_back(weight(cfg.seq_len, d));    // pos
  for (int l = 0; l < cfg.n_layers; ++l) {
    m.params.push_back(weight(d, d));  // Wq
    m.params.push_back(bias(d));
    m.params.push_back(weight(d, d));  // Wk
    m.params.push_back(weight(d, d));  // Wv
    m.params.push_back(bias(d));
    m.params.push_back(weight(d, d));  // Wo
    m.params.push_back(bias(d));
    m.params.push_back(weight(d, ff));  // W1
    m.params.push_back(bias(ff));
    m.params.push_back(weight(ff, d));  // W2
    m.params.push_back(bias(d));
  }
  m.params.push_back(weight(d, cfg.vocab));  // Wout
  m.params.push_back(bias(cfg.vocab));       // bout
  return m;
}

std::int64_t ToyModel::n_params() const {
  std::int64_t total = 0;
  for (const auto& p : params) total += p.size();
  return total;
}

GradSet zero_grads(const ToyModel& model) {
  GradSet g;
  g.reserve(model.params.size());
  for (const auto& p : model.params)
    g.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
  return g;
}

namespace {

struct LayerCache {
  Eigen::MatrixXd x_in, q, k, v, attn_w, attn_out, x_mid, h;
};

struct ForwardCache {
  Eigen::MatrixXd x_final;
  std::vector<LayerCache> layers;
};

Eigen::MatrixXd forward_seq(const ToyModel& m, const Eigen::VectorXi& tokens,
                            ForwardCache* cache) {
  const auto& cfg = m.cfg;
  const int L = cfg.seq_len;
  const int d = cfg.d_model;
  if (tokens.size() != L) throw DomainError("forward: sequence length mismatch");
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  Eigen::MatrixXd x(L, d);
  for (int t = 0; t < L; ++t) {
    int tok = tokens(t);
    if (tok < 0 || tok > cfg.vocab)
      throw DomainError("forward: token id out of range");
    x.row(t) = m.params[ToyModel::kEmb].row(tok) + m.params[ToyModel::kPos].row(t);
  }
  if (cache) cache->layers.resize(cfg.n_layers);

  for (int l = 0; l < cfg.n_layers; ++l) {
    int b = m.layer_base(l);
    const auto& Wq = m.params[b + 0];
    const auto& bq = m.params[b + 1];
    const auto& Wk = m.params[b + 2];
    const auto& Wv = m.params[b + 3];
    const auto& bv = m.params[b + 4];
    const auto& Wo = m.params[b + 5];
    const auto& bo = m.params[b + 6];
    const auto& W1 = m.params[b + 7];
    const auto& b1 = m.params[b + 8];
    const auto& W2 = m.params[b + 9];
    const auto& b2 = m.params[b + 10];

    Eigen::MatrixXd q = (x * Wq).rowwise() + bq.row(0);
    Eigen::MatrixXd k = x * Wk;
    Eigen::MatrixXd v = (x * Wv).rowwise() + bv.row(0);
    Eigen::MatrixXd scores = q * k.transpose() * scale;
    if (cfg.attn_mode == AttnMode::causal) {
      for (int i = 0; i < L; ++i)
        for (int j = i + 1; j < L; ++j) scores(i, j) = kNegInf;
    }
    Eigen::MatrixXd w = softmax_rows(scores);
    Eigen::MatrixXd attn_out = w * v;
    Eigen::MatrixXd proj = (attn_out * Wo).rowwise() + bo.row(0);
    Eigen::MatrixXd x_mid = x + proj;
    Eigen::MatrixXd h = ((x_mid * W1).rowwise() + b1.row(0)).array().tanh();
    Eigen::MatrixXd ffn_out = (h * W2).rowwise() + b2.row(0);
    Eigen::MatrixXd x_out = x_mid + ffn_out;

    if (cache) {
      LayerCache& lc = cache->layers[l];
      lc.x_in = x;
      lc.q = q;
      lc.k = k;
      lc.v = v;
      lc.attn_w = w;
      lc.attn_out = attn_out;
      lc.x_mid = x_mid;
      lc.h = h;
    }
    x = std::move(x_out);
  }
  if (cache) cache->x_final = x;
  return (x * m.params[m.out_w_index()]).rowwise() +
         m.params[m.out_b_index()].row(0);
}

// Backpropagates d(loss)/d(logits) through the cached forward pass.
void backward_seq(const ToyModel& m, const Eigen::VectorXi& tokens,
                  const ForwardCache& cache, const Eigen::MatrixXd& dlogits,
                  GradSet& g) {
  const auto& cfg = m.cfg;
  const int L = cfg.seq_len;
  const int d = cfg.d_model;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  g[m.out_w_index()] += cache.x_final.transpose() * dlogits;
  g[m.out_b_index()] += dlogits.colwise().sum();
  Eigen::MatrixXd dx = dlogits * m.params[m.out_w_index()].transpose();

  for (int l = cfg.n_layers - 1; l >= 0; --l) {
    int b = m.layer_base(l);
    const LayerCache& lc = cache.layers[l];
    const auto& Wq = m.params[b + 0];
    const auto& Wk = m.params[b + 2];
    const auto& Wv = m.params[b + 3];
    const auto& Wo = m.params[b + 5];
    const auto& W1 = m.params[b + 7];
    const auto& W2 = m.params[b + 9];

    // x_out = x_mid + tanh(x_mid W1 + b1) W2 + b2
    Eigen::MatrixXd df = dx;  // gradient wrt the FFN output term
    g[b + 9] += lc.h.transpose() * df;
    g[b + 10] += df.colwise().sum();
    Eigen::MatrixXd dh = df * W2.transpose();
    Eigen::MatrixXd dpre = dh.array() * (1.0 - lc.h.array().square());
    g[b + 7] += lc.x_mid.transpose() * dpre;
    g[b + 8] += dpre.colwise().sum();
    Eigen::MatrixXd dx_mid = dx + dpre * W1.transpose();

    // x_mid = x_in + (attn_w v) Wo + bo
    g[b + 5] += lc.attn_out.transpose() * dx_mid;
    g[b + 6] += dx_mid.colwise().sum();
    Eigen::MatrixXd dattn_out = dx_mid * Wo.transpose();
    Eigen::MatrixXd dw = dattn_out * lc.v.transpose();
    Eigen::MatrixXd dv = lc.attn_w.transpose() * dattn_out;
    Eigen::MatrixXd dscores(L, L);
    for (int i = 0; i < L; ++i) {
      double dot = dw.row(i).dot(lc.attn_w.row(i));
      dscores.row(i) =
          (lc.attn_w.row(i).array() * (dw.row(i).array() - dot)).matrix();
    }
    Eigen::MatrixXd dq = dscores * lc.k * scale;
    Eigen::MatrixXd dk = dscores.transpose() * lc.q * scale;

    g[b + 0] += lc.x_in.transpose() * dq;
    g[b + 1] += dq.colwise().sum();
    g[b + 2] += lc.x_in.transpose() * dk;
    g[b + 3] += lc.x_in.transpose() * dv;
    g[b + 4] += dv.colwise().sum();

    dx = dx_mid + dq * Wq.transpose() + dk * Wk.transpose() + dv * Wv.transpose();
  }

  for (int t = 0; t < L; ++t) {
    g[ToyModel::kEmb].row(tokens(t)) += dx.row(t);
    g[ToyModel::kPos].row(t) += dx.row(t);
  }
}

Eigen::VectorXd row_softmax(const Eigen::RowVectorXd& logits) {
  double m = logits.maxCoeff();
  Eigen::ArrayXd e = (logits.array() - m).exp();
  return (e / e.sum()).matrix();
}

}  // namespace

Eigen::MatrixXd forward_logits(const ToyModel& model,
                               const Eigen::VectorXi& tokens) {
  return forward_seq(model, tokens, nullptr);
}

CorruptedBatch corrupt(const Eigen::MatrixXi& clean, int mask_token, Rng& rng,
                       std::optional<double> forced_r, int max_retries) {
  const Eigen::Index B = clean.rows();
  const Eigen::Index L = clean.cols();
  if (L < 1) throw DomainError("corrupt: empty sequences");
  for (Eigen::Index i = 0; i < B; ++i)
    for (Eigen::Index j = 0; j < L; ++j)
      if (clean(i, j) == mask_token)
        throw DomainError("corrupt: mask token present in clean input");

  CorruptedBatch out;
  out.clean = clean;
  out.corrupted = clean;
  out.mask_sets.resize(static_cast<std::size_t>(B));
  out.ratios.resize(static_cast<std::size_t>(B));
  for (Eigen::Index i = 0; i < B; ++i) {
    bool ok = false;
    for (int attempt = 0; attempt < max_retries && !ok; ++attempt) {
      double r = forced_r ? *forced_r : rng.uniform_open();
      std::vector<int> masked;
      for (Eigen::Index j = 0; j < L; ++j)
        if (rng.uniform() < r) masked.push_back(static_cast<int>(j));
      if (masked.empty()) continue;
      out.ratios[static_cast<std::size_t>(i)] = r;
      out.mask_sets[static_cast<std::size_t>(i)] = std::move(masked);
      ok = true;
    }
    if (!ok)
      throw NumericError("corrupt: retry budget exhausted without a non-empty "
                         "mask set (sequence " + std::to_string(i) + ")");
    for (int j : out.mask_sets[static_cast<std::size_t>(i)])
      out.corrupted(i, j) = mask_token;
  }
  return out;
}

double ar_loss(const ToyModel& model, const Eigen::MatrixXi& batch,
               GradSet* grads) {
  if (model.cfg.attn_mode != AttnMode::causal)
    throw DomainError("ar_loss: model must use causal attention");
  const Eigen::Index B = batch.rows();
  const int L = model.cfg.seq_len;
  const int V = model.cfg.vocab;
  if (B == 0) throw DomainError("ar_loss: empty batch");
  const double norm = 1.0 / (static_cast<double>(B) * (L - 1));

  double loss = 0.0;
  for (Eigen::Index s = 0; s < B; ++s) {
    Eigen::VectorXi tokens = batch.row(s).transpose();
    ForwardCache cache;
    Eigen::MatrixXd logits = forward_seq(model, tokens, grads ? &cache : nullptr);
    Eigen::MatrixXd dlogits;
    if (grads) dlogits = Eigen::MatrixXd::Zero(L, V);
    for (int t = 0; t + 1 < L; ++t) {
      int target = tokens(t + 1);
      Eigen::VectorXd p = row_softmax(logits.row(t));
      loss -= norm * std::log(std::max(p(target), 1e-300));
      if (grads) {
        dlogits.row(t) = (norm * p).transpose();
        dlogits(t, target) -= norm;
      }
    }
    if (grads) backward_seq(model, tokens, cache, dlogits, *grads);
  }
  return loss;
}

double diffusion_loss(const ToyModel& model, const CorruptedBatch& batch,
                      GradSet* grads) {
  if (model.cfg.attn_mode != AttnMode::bidirectional)
    throw DomainError("diffusion_loss: model must use bidirectional attention");
  const Eigen::Index B = batch.clean.rows();
  const int L = model.cfg.seq_len;
  const int V = model.cfg.vocab;
  if (B == 0) throw DomainError("diffusion_loss: empty batch");

  double loss = 0.0;
  for (Eigen::Index s = 0; s < B; ++s) {
    const auto& mask = batch.mask_sets[static_cast<std::size_t>(s)];
    if (mask.empty())
      throw DomainError("diffusion_loss: empty mask set (sequence " +
                        std::to_string(s) + ")");
    double r = batch.ratios[static_cast<std::size_t>(s)];
    const double w = 1.0 / (static_cast<double>(B) * r * L);
    Eigen::VectorXi tokens = batch.corrupted.row(s).transpose();
    ForwardCache cache;
    Eigen::MatrixXd logits = forward_seq(model, tokens, grads ? &cache : nullptr);
    Eigen::MatrixXd dlogits;
    if (grads) dlogits = Eigen::MatrixXd::Zero(L, V);
    for (int i : mask) {
      int target = batch.clean(s, i);
      Eigen::VectorXd p = row_softmax(logits.row(i));
      loss -= w * std::log(std::max(p(target), 1e-300));
      if (grads) {
        dlogits.row(i) = (w * p).transpose();
        dlogits(i, target) -= w;
      }
    }
    if (grads) backward_seq(model, tokens, cache, dlogits, *grads);
  }
  return loss;
}

double grad_check(ToyModel& model, const Eigen::MatrixXi& batch,
                  Family objective, double epsilon, std::uint64_t mask_seed) {
  std::optional<CorruptedBatch> corrupted;
  if (objective == Family::diffusion) {
    Rng rng(mask_seed);
    corrupted = corrupt(batch, model.cfg.mask_token(), rng);
  }
  auto eval = [&](GradSet* g) {
    return objective == Family::ar ? ar_loss(model, batch, g)
                                   : diffusion_loss(model, *corrupted, g);
  };
  GradSet analytic = zero_grads(model);
  eval(&analytic);

  double max_rel = 0.0;
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    Eigen::MatrixXd& mat = model.params[p];
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      for (Eigen::Index j = 0; j < mat.cols(); ++j) {
        double orig = mat(i, j);
        mat(i, j) = orig + epsilon;
        double fp = eval(nullptr);
        mat(i, j) = orig - epsilon;
        double fm = eval(nullptr);
        mat(i, j) = orig;
        double numeric = (fp - fm) / (2.0 * epsilon);
        double a = analytic[p](i, j);
        double rel = std::fabs(a - numeric) /
                     std::max({std::fabs(a), std::fabs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
      }
    }
  }
  return max_rel;
}

namespace {

double lr_at_step(const TrainConfig& cfg, std::int64_t step,
                  std::int64_t total_steps) {
  std::int64_t warmup = std::max<std::int64_t>(
      1, std::llround(cfg.warmup_frac * static_cast<double>(total_steps)));
  if (step < warmup)
    return cfg.peak_lr * static_cast<double>(step + 1) /
           static_cast<double>(warmup);
  double denom = std::max<std::int64_t>(1, total_steps - warmup);
  double progress = static_cast<double>(step - warmup) / denom;
  return cfg.min_lr +
         0.5 * (cfg.peak_lr - cfg.min_lr) * (1.0 + std::cos(M_PI * progress));
}

struct AdamState {
  GradSet m, v;
  std::int64_t t = 0;
};

void adamw_step(ToyModel& model, const GradSet& grads, AdamState& st,
                const TrainConfig& cfg, double lr) {
  ++st.t;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    st.m[p] = cfg.beta1 * st.m[p] + (1.0 - cfg.beta1) * grads[p];
    st.v[p] = (cfg.beta2 * st.v[p].array() +
               (1.0 - cfg.beta2) * grads[p].array().square())
                  .matrix();
    Eigen::ArrayXXd mhat = st.m[p].array() / bc1;
    Eigen::ArrayXXd vhat = st.v[p].array() / bc2;
    Eigen::ArrayXXd update = mhat / (vhat.sqrt() + cfg.adam_eps);
    if (model.params[p].rows() > 1)  // decoupled decay on weights, not biases
      update += cfg.weight_decay * model.params[p].array();
    model.params[p].array() -= lr * update;
  }
}

double clip_grads(GradSet& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.squaredNorm();
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    double s = max_norm / norm;
    for (auto& g : grads) g *= s;
  }
  return norm;
}

}  // namespace

double eval_ar_nll(const ToyModel& model,
                   const std::vector<Eigen::MatrixXi>& val_batches) {
  double total = 0.0;
  std::int64_t n_seq = 0;
  for (const auto& b : val_batches) {
    total += ar_loss(model, b) * static_cast<double>(b.rows());
    n_seq += b.rows();
  }
  if (n_seq == 0) throw DomainError("eval_ar_nll: empty split");
  return total / static_cast<double>(n_seq);
}

double eval_diffusion_nll(const ToyModel& model,
                          const std::vector<Eigen::MatrixXi>& val_batches,
                          int mask_samples, std::uint64_t seed) {
  if (mask_samples < 1)
    throw DomainError("eval_diffusion_nll: mask_samples must be >= 1");
  Rng rng(seed);
  double total = 0.0;
  std::int64_t n = 0;
  for (int k = 0; k < mask_samples; ++k) {
    for (const auto& b : val_batches) {
      CorruptedBatch cb = corrupt(b, model.cfg.mask_token(), rng);
      total += diffusion_loss(model, cb) * static_cast<double>(b.rows());
      n += b.rows();
    }
  }
  if (n == 0) throw DomainError("eval_diffusion_nll: empty split");
  return total / static_cast<double>(n);
}

std::vector<int> markov_corpus(std::int64_t n_tokens, int vocab,
                               std::uint64_t seed, int branching) {
  if (n_tokens <= 0) throw DomainError("markov_corpus: n_tokens must be > 0");
  if (vocab < 2) throw DomainError("markov_corpus: vocab must be >= 2");
  branching = std::min(branching, vocab);
  Rng rng(seed);
  // successor table: per symbol, `branching` candidates with fixed weights
  std::vector<std::vector<int>> next(static_cast<std::size_t>(vocab));
  std::vector<std::vector<double>> cum(static_cast<std::size_t>(vocab));
  for (int s = 0; s < vocab; ++s) {
    std::vector<double> w(static_cast<std::size_t>(branching));
    double total = 0.0;
    for (int b = 0; b < branching; ++b) {
      next[s].push_back(static_cast<int>(rng.uniform_int(vocab)));
      w[static_cast<std::size_t>(b)] = 0.1 + rng.uniform();
      total += w[static_cast<std::size_t>(b)];
    }
    double acc = 0.0;
    for (int b = 0; b < branching; ++b) {
      acc += w[static_cast<std::size_t>(b)] / total;
      cum[s].push_back(acc);
    }
    cum[s].back() = 1.0;
  }
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n_tokens));
  int state = static_cast<int>(rng.uniform_int(vocab));
  for (std::int64_t i = 0; i < n_tokens; ++i) {
    out.push_back(state);
    double u = rng.uniform();
    const auto& c = cum[static_cast<std::size_t>(state)];
    std::size_t pick = 0;
    while (pick + 1 < c.size() && u > c[pick]) ++pick;
    state = next[static_cast<std::size_t>(state)][pick];
  }
  return out;
}

Eigen::MatrixXi sequences_from_tokens(const std::vector<int>& tokens,
                                      std::int64_t offset, std::int64_t count,
                                      int seq_len) {
  if (offset < 0 || offset + count > static_cast<std::int64_t>(tokens.size()))
    throw InputError("sequences_from_tokens: range out of bounds");
  std::int64_t n_seq = count / seq_len;
  Eigen::MatrixXi m(n_seq, seq_len);
  for (std::int64_t s = 0; s < n_seq; ++s)
    for (int t = 0; t < seq_len; ++t)
      m(s, t) = tokens[static_cast<std::size_t>(offset + s * seq_len + t)];
  return m;
}

TrainResult train(const ToyModelConfig& model_cfg, const TrainConfig& train_cfg,
                  const std::vector<int>& corpus) {
  const int L = model_cfg.seq_len;
  const std::int64_t U = train_cfg.unique_tokens;
  if (train_cfg.epochs < 1) throw DomainError("train: epochs must be >= 1");
  std::int64_t val_tokens = train_cfg.val_tokens > 0
                                ? train_cfg.val_tokens
                                : std::max<std::int64_t>(
                                      static_cast<std::int64_t>(train_cfg.batch_size) * L,
                                      U / 4);
  if (static_cast<std::int64_t>(corpus.size()) < U + val_tokens)
    throw InputError("train: corpus too small (need " +
                     std::to_string(U + val_tokens) + " tokens for " +
                     std::to_string(U) + " training + " +
                     std::to_string(val_tokens) + " validation, have " +
                     std::to_string(corpus.size()) + ")");

  Eigen::MatrixXi train_seqs = sequences_from_tokens(corpus, 0, U, L);
  Eigen::MatrixXi val_seqs = sequences_from_tokens(corpus, U, val_tokens, L);
  if (train_seqs.rows() < train_cfg.batch_size)
    throw InputError("train: fewer training sequences than batch_size");
  if (val_seqs.rows() < 1) throw InputError("train: empty validation split");

  std::vector<Eigen::MatrixXi> val_batches;
  for (Eigen::Index s = 0; s < val_seqs.rows(); s += train_cfg.batch_size) {
    Eigen::Index n = std::min<Eigen::Index>(train_cfg.batch_size,
                                            val_seqs.rows() - s);
    val_batches.push_back(val_seqs.middleRows(s, n));
  }

  ToyModel model = ToyModel::init(model_cfg);
  const bool is_ar = model_cfg.attn_mode == AttnMode::causal;
  Rng rng(train_cfg.seed);
  const std::uint64_t eval_seed = train_cfg.seed ^ 0x9e3779b97f4a7c15ULL;

  AdamState adam;
  adam.m = zero_grads(model);
  adam.v = zero_grads(model);

  const std::int64_t steps_per_epoch = train_seqs.rows() / train_cfg.batch_size;
  const std::int64_t total_steps = steps_per_epoch * train_cfg.epochs;

  std::vector<std::size_t> order(static_cast<std::size_t>(train_seqs.rows()));
  std::iota(order.begin(), order.end(), 0);

  TrainResult res;
  std::int64_t step = 0;
  for (int epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::int64_t bstart = 0; bstart + train_cfg.batch_size <=
                                  train_seqs.rows();
         bstart += train_cfg.batch_size) {
      Eigen::MatrixXi batch(train_cfg.batch_size, L);
      for (int i = 0; i < train_cfg.batch_size; ++i)
        batch.row(i) =
            train_seqs.row(static_cast<Eigen::Index>(order[static_cast<std::size_t>(bstart + i)]));
      GradSet grads = zero_grads(model);
      double loss;
      if (is_ar) {
        loss = ar_loss(model, batch, &grads);
      } else {
        CorruptedBatch cb = corrupt(batch, model_cfg.mask_token(), rng);
        loss = diffusion_loss(model, cb, &grads);
      }
      clip_grads(grads, train_cfg.grad_clip);
      adamw_step(model, grads, adam, train_cfg, lr_at_step(train_cfg, step, total_steps));
      epoch_loss += loss;
      ++step;
    }
    double val = is_ar ? eval_ar_nll(model, val_batches)
                       : eval_diffusion_nll(model, val_batches,
                                            train_cfg.eval_mask_samples, eval_seed);
    EpochMetrics em;
    em.epoch = epoch;
    em.tokens_seen = U * epoch;
    em.train_loss = epoch_loss / static_cast<double>(steps_per_epoch);
    em.val_loss = val;
    res.metrics.push_back(em);
  }

  RunRecord rec;
  rec.family = is_ar ? Family::ar : Family::diffusion;
  rec.n_params = model.n_params();
  rec.unique_tokens = U;
  rec.epochs = static_cast<double>(train_cfg.epochs);
  rec.tokens_seen = U * train_cfg.epochs;
  rec.final_val_loss = res.metrics.back().val_loss;
  for (const EpochMetrics& em : res.metrics)
    rec.loss_curve.emplace_back(em.tokens_seen, em.val_loss);
  rec.seed = static_cast<std::int64_t>(train_cfg.seed);
  rec.tags["d_model"] = std::to_string(model_cfg.d_model);
  rec.tags["n_layers"] = std::to_string(model_cfg.n_layers);
  rec.tags["seq_len"] = std::to_string(model_cfg.seq_len);
  rec.tags["vocab"] = std::to_string(model_cfg.vocab);
  res.record = std::move(rec);
  return res;
}

}  // namespace dcsl
