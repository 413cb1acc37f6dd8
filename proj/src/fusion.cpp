#include "actionret/fusion.hpp"

#include <cmath>
#include <limits>
#include <algorithm>
#include <stdexcept>

#include "actionret/kernels.hpp"

namespace actionret {

void FusionConfig::validate() const {
  if (feature_dim < 1) throw std::invalid_argument("fusion: feature_dim must be positive");
  if (blocks < 1) throw std::invalid_argument("fusion: blocks must be >= 1");
  if (heads < 1 || feature_dim % heads != 0) {
    throw std::invalid_argument("fusion: feature_dim must be divisible by heads");
  }
  if (num_contextual < 1) throw std::invalid_argument("fusion: num_contextual must be >= 1");
  if (ffn_multiplier < 1) throw std::invalid_argument("fusion: ffn_multiplier must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("fusion: dropout outside [0,1)");
  if (positional_enabled && feature_dim % 2 != 0) {
    throw std::invalid_argument("fusion: positional embedding requires an even feature_dim");
  }
}

std::vector<double> positional_embedding(int t, int dim) {
  if (t < 0) throw std::invalid_argument("positional_embedding: t must be >= 0");
  if (dim < 2 || dim % 2 != 0) {
    throw std::invalid_argument("positional_embedding: dim must be even and >= 2");
  }
  std::vector<double> out(static_cast<size_t>(dim));
  for (int i = 0; i < dim / 2; ++i) {
    double w = std::pow(10000.0, -2.0 * i / dim);
    out[static_cast<size_t>(2 * i)] = std::sin(w * t);
    out[static_cast<size_t>(2 * i + 1)] = std::cos(w * t);
  }
  return out;
}

template <typename T>
TokenSequence<T> build_token_sequence(const std::vector<T>* anchored,
                                      const std::vector<T>* global_feat,
                                      const std::vector<std::vector<T>>& contextual,
                                      const Tensor<T>& type_embeddings,
                                      const FusionConfig& config) {
  const int d = config.feature_dim;
  std::vector<const std::vector<T>*> feats;
  std::vector<Aspect> tags;
  if (anchored) {
    feats.push_back(anchored);
    tags.push_back(Aspect::kAnchored);
  }
  if (global_feat) {
    feats.push_back(global_feat);
    tags.push_back(Aspect::kGlobal);
  }
  for (const auto& f : contextual) {
    feats.push_back(&f);
    tags.push_back(Aspect::kContextual);
  }
  if (feats.empty()) throw std::invalid_argument("build_token_sequence: no aspects enabled");

  TokenSequence<T> seq;
  seq.tags = tags;
  seq.tokens = Tensor<T>({static_cast<int>(feats.size()), d});
  for (size_t t = 0; t < feats.size(); ++t) {
    if (static_cast<int>(feats[t]->size()) != d) {
      throw std::invalid_argument("build_token_sequence: feature dimension mismatch");
    }
    T* row = seq.tokens.ptr() + static_cast<int64_t>(t) * d;
    const T* src = feats[t]->data();
    for (int j = 0; j < d; ++j) row[j] = src[j];
    if (config.type_enabled) {
      const T* typ = type_embeddings.ptr() + static_cast<int64_t>(static_cast<int>(tags[t])) * d;
      for (int j = 0; j < d; ++j) row[j] += typ[j];
    }
    if (config.positional_enabled) {
      std::vector<double> pos = positional_embedding(static_cast<int>(t), d);
      for (int j = 0; j < d; ++j) row[j] += static_cast<T>(pos[static_cast<size_t>(j)]);
    }
  }
  return seq;
}

template <typename T>
TokenSequence<T> assemble_tokens(const std::vector<T>& anchored,
                                 const std::vector<T>& global_feat,
                                 const std::vector<std::vector<T>>& contextual,
                                 const Tensor<T>& type_embeddings,
                                 const FusionConfig& config) {
  if (static_cast<int>(contextual.size()) != config.num_contextual) {
    throw std::invalid_argument("assemble_tokens: expected exactly k contextual features");
  }
  return build_token_sequence(&anchored, &global_feat, contextual, type_embeddings, config);
}

template <typename T>
MultiHeadSelfAttention<T>::MultiHeadSelfAttention(const std::string& name, int dim, int heads)
    : dim_(dim), heads_(heads), head_dim_(dim / heads),
      wq_(name + ".wq", dim, dim), wk_(name + ".wk", dim, dim),
      wv_(name + ".wv", dim, dim), wo_(name + ".wo", dim, dim) {
  if (dim % heads != 0) throw std::invalid_argument("attention: dim must divide by heads");
}

template <typename T>
void MultiHeadSelfAttention<T>::init(Rng& rng) {
  wq_.init(rng);
  wk_.init(rng);
  wv_.init(rng);
  wo_.init(rng);
}

namespace {

template <typename T>
Tensor<T> as_rows(const Tensor<T>& x3d) {
  Tensor<T> flat;
  flat.shape = {x3d.dim(0) * x3d.dim(1), x3d.dim(2)};
  flat.data = x3d.data;
  return flat;
}

template <typename T>
Tensor<T> as_bsd(Tensor<T> flat, int b, int s, int d) {
  flat.shape = {b, s, d};
  return flat;
}

}  // namespace

template <typename T>
Tensor<T> MultiHeadSelfAttention<T>::forward(const Tensor<T>& x) {
  if (x.ndim() != 3 || x.dim(2) != dim_) {
    throw std::invalid_argument("attention: expected [B,S,D] input");
  }
  batch_ = x.dim(0);
  seq_ = x.dim(1);
  Tensor<T> flat = as_rows(x);
  q_ = wq_.forward(flat);
  k_ = wk_.forward(flat);
  v_ = wv_.forward(flat);

  attn_ = Tensor<T>({batch_, heads_, seq_, seq_});
  Tensor<T> ctx({batch_ * seq_, dim_});
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(head_dim_)));

#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch_; ++b) {
    for (int h = 0; h < heads_; ++h) {
      T* probs = attn_.ptr() + ((static_cast<int64_t>(b) * heads_ + h) * seq_) * seq_;
      for (int s = 0; s < seq_; ++s) {
        const T* qr = q_.ptr() + (static_cast<int64_t>(b) * seq_ + s) * dim_ + h * head_dim_;
        T* prow = probs + static_cast<int64_t>(s) * seq_;
        T maxv = -std::numeric_limits<T>::infinity();
        for (int t = 0; t < seq_; ++t) {
          const T* kr = k_.ptr() + (static_cast<int64_t>(b) * seq_ + t) * dim_ + h * head_dim_;
          T dot = T(0);
          for (int j = 0; j < head_dim_; ++j) dot += qr[j] * kr[j];
          prow[t] = dot * scale;
          if (prow[t] > maxv) maxv = prow[t];
        }
        T denom = T(0);
        for (int t = 0; t < seq_; ++t) {
          prow[t] = std::exp(prow[t] - maxv);
          denom += prow[t];
        }
        for (int t = 0; t < seq_; ++t) prow[t] /= denom;
        T* cr = ctx.ptr() + (static_cast<int64_t>(b) * seq_ + s) * dim_ + h * head_dim_;
        for (int j = 0; j < head_dim_; ++j) {
          T acc = T(0);
          for (int t = 0; t < seq_; ++t) {
            acc += prow[t] *
                   v_.ptr()[(static_cast<int64_t>(b) * seq_ + t) * dim_ + h * head_dim_ + j];
          }
          cr[j] = acc;
        }
      }
    }
  }
  Tensor<T> y = wo_.forward(ctx);
  return as_bsd(std::move(y), batch_, seq_, dim_);
}

template <typename T>
Tensor<T> MultiHeadSelfAttention<T>::backward(const Tensor<T>& d_out) {
  Tensor<T> d_ctx = wo_.backward(as_rows(d_out));
  Tensor<T> d_q({batch_ * seq_, dim_});
  Tensor<T> d_k({batch_ * seq_, dim_});
  Tensor<T> d_v({batch_ * seq_, dim_});
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(head_dim_)));

#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch_; ++b) {
    for (int h = 0; h < heads_; ++h) {
      const T* probs = attn_.ptr() + ((static_cast<int64_t>(b) * heads_ + h) * seq_) * seq_;
      std::vector<T> d_scores(static_cast<size_t>(seq_) * seq_);
      // d_probs and softmax backward per query row
      for (int s = 0; s < seq_; ++s) {
        const T* prow = probs + static_cast<int64_t>(s) * seq_;
        const T* dcr = d_ctx.ptr() + (static_cast<int64_t>(b) * seq_ + s) * dim_ + h * head_dim_;
        T* dsr = d_scores.data() + static_cast<size_t>(s) * seq_;
        T dot_sum = T(0);
        for (int t = 0; t < seq_; ++t) {
          const T* vr = v_.ptr() + (static_cast<int64_t>(b) * seq_ + t) * dim_ + h * head_dim_;
          T dp = T(0);
          for (int j = 0; j < head_dim_; ++j) dp += dcr[j] * vr[j];
          dsr[t] = dp;
          dot_sum += dp * prow[t];
        }
        for (int t = 0; t < seq_; ++t) dsr[t] = prow[t] * (dsr[t] - dot_sum);
      }
      // d_v[t] += sum_s probs[s,t] * d_ctx[s]
      for (int t = 0; t < seq_; ++t) {
        T* dvr = d_v.ptr() + (static_cast<int64_t>(b) * seq_ + t) * dim_ + h * head_dim_;
        for (int j = 0; j < head_dim_; ++j) {
          T acc = T(0);
          for (int s = 0; s < seq_; ++s) {
            acc += probs[static_cast<int64_t>(s) * seq_ + t] *
                   d_ctx.ptr()[(static_cast<int64_t>(b) * seq_ + s) * dim_ + h * head_dim_ + j];
          }
          dvr[j] = acc;
        }
      }
      // d_q[s] = scale * sum_t d_scores[s,t] * k[t];  d_k[t] = scale * sum_s d_scores[s,t] * q[s]
      for (int s = 0; s < seq_; ++s) {
        T* dqr = d_q.ptr() + (static_cast<int64_t>(b) * seq_ + s) * dim_ + h * head_dim_;
        const T* dsr = d_scores.data() + static_cast<size_t>(s) * seq_;
        for (int j = 0; j < head_dim_; ++j) {
          T acc = T(0);
          for (int t = 0; t < seq_; ++t) {
            acc += dsr[t] *
                   k_.ptr()[(static_cast<int64_t>(b) * seq_ + t) * dim_ + h * head_dim_ + j];
          }
          dqr[j] = acc * scale;
        }
      }
      for (int t = 0; t < seq_; ++t) {
        T* dkr = d_k.ptr() + (static_cast<int64_t>(b) * seq_ + t) * dim_ + h * head_dim_;
        for (int j = 0; j < head_dim_; ++j) {
          T acc = T(0);
          for (int s = 0; s < seq_; ++s) {
            acc += d_scores[static_cast<size_t>(s) * seq_ + t] *
                   q_.ptr()[(static_cast<int64_t>(b) * seq_ + s) * dim_ + h * head_dim_ + j];
          }
          dkr[j] = acc * scale;
        }
      }
    }
  }

  Tensor<T> d_x = wq_.backward(d_q);
  Tensor<T> d_xk = wk_.backward(d_k);
  Tensor<T> d_xv = wv_.backward(d_v);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < d_x.size(); ++i) d_x[i] += d_xk[i] + d_xv[i];
  return as_bsd(std::move(d_x), batch_, seq_, dim_);
}

template <typename T>
void MultiHeadSelfAttention<T>::collect_params(std::vector<Param<T>*>& out) {
  wq_.collect_params(out);
  wk_.collect_params(out);
  wv_.collect_params(out);
  wo_.collect_params(out);
}

template <typename T>
FeedForward<T>::FeedForward(const std::string& name, int dim, int hidden)
    : lin1_(name + ".lin1", dim, hidden), lin2_(name + ".lin2", hidden, dim) {}

template <typename T>
void FeedForward<T>::init(Rng& rng) {
  lin1_.init(rng);
  lin2_.init(rng);
}

template <typename T>
Tensor<T> FeedForward<T>::forward(const Tensor<T>& x) {
  Tensor<T> h = lin1_.forward(x);
  relu_inplace(h);
  hidden_act_ = h;
  return lin2_.forward(h);
}

template <typename T>
Tensor<T> FeedForward<T>::backward(const Tensor<T>& d_out) {
  Tensor<T> d_h = lin2_.backward(d_out);
  d_h = relu_backward(hidden_act_, d_h);
  return lin1_.backward(d_h);
}

template <typename T>
void FeedForward<T>::collect_params(std::vector<Param<T>*>& out) {
  lin1_.collect_params(out);
  lin2_.collect_params(out);
}

template <typename T>
TransformerBlock<T>::TransformerBlock(const std::string& name, const FusionConfig& config)
    : ln1_(name + ".ln1", config.feature_dim),
      ln2_(name + ".ln2", config.feature_dim),
      attn_(name + ".attn", config.feature_dim, config.heads),
      ffn_(name + ".ffn", config.feature_dim, config.feature_dim * config.ffn_multiplier),
      drop1_(config.dropout), drop2_(config.dropout) {}

template <typename T>
void TransformerBlock<T>::init(Rng& rng) {
  attn_.init(rng);
  ffn_.init(rng);
}

template <typename T>
Tensor<T> TransformerBlock<T>::forward(const Tensor<T>& x, bool train, Rng& rng) {
  int b = x.dim(0), s = x.dim(1), d = x.dim(2);
  Tensor<T> a = ln1_.forward(as_rows(x));
  a = attn_.forward(as_bsd(std::move(a), b, s, d));
  a = drop1_.forward(a, train, rng);
  Tensor<T> h(x.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < x.size(); ++i) h[i] = x[i] + a[i];

  Tensor<T> f = ln2_.forward(as_rows(h));
  f = ffn_.forward(f);
  f = drop2_.forward(f, train, rng);
  Tensor<T> y(x.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < x.size(); ++i) y[i] = h[i] + f[i];
  return y;
}

template <typename T>
Tensor<T> TransformerBlock<T>::backward(const Tensor<T>& d_out) {
  int b = d_out.dim(0), s = d_out.dim(1), d = d_out.dim(2);
  Tensor<T> d_f = drop2_.backward(as_rows(d_out));
  d_f = ffn_.backward(d_f);
  Tensor<T> d_h_branch = ln2_.backward(d_f);
  Tensor<T> d_h(d_out.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < d_out.size(); ++i) d_h[i] = d_out[i] + d_h_branch[i];

  Tensor<T> d_a = drop1_.backward(d_h);
  d_a = attn_.backward(as_bsd(std::move(d_a), b, s, d));
  Tensor<T> d_x_branch = ln1_.backward(as_rows(d_a));
  Tensor<T> d_x(d_out.shape);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < d_out.size(); ++i) d_x[i] = d_h[i] + d_x_branch[i];
  return d_x;
}

template <typename T>
void TransformerBlock<T>::collect_params(std::vector<Param<T>*>& out) {
  ln1_.collect_params(out);
  attn_.collect_params(out);
  ln2_.collect_params(out);
  ffn_.collect_params(out);
}

template <typename T>
FusionEncoder<T>::FusionEncoder(const FusionConfig& config)
    : config_(config), final_norm_("fusion.final_norm", config.feature_dim) {
  config_.validate();
  for (int i = 0; i < config_.blocks; ++i) {
    blocks_.emplace_back("fusion.block" + std::to_string(i), config_);
  }
}

template <typename T>
void FusionEncoder<T>::init(Rng& rng) {
  for (auto& b : blocks_) b.init(rng);
}

template <typename T>
Tensor<T> FusionEncoder<T>::forward(const Tensor<T>& tokens, bool train, Rng& rng) {
  if (tokens.ndim() != 3 || tokens.dim(2) != config_.feature_dim) {
    throw std::invalid_argument("fusion: expected [B,S,D] token tensor");
  }
  batch_ = tokens.dim(0);
  seq_ = tokens.dim(1);
  Tensor<T> x = tokens;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    x = blocks_[i].forward(x, train, rng);
    if (!all_finite(x)) {
      throw std::runtime_error("fusion: non-finite activation after block " + std::to_string(i));
    }
  }
  Tensor<T> normed = final_norm_.forward(as_rows(x));
  Tensor<T> fused({batch_, config_.feature_dim});
  const T inv_s = static_cast<T>(1.0 / seq_);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < batch_; ++b) {
    T* out = fused.ptr() + static_cast<int64_t>(b) * config_.feature_dim;
    for (int s = 0; s < seq_; ++s) {
      const T* row = normed.ptr() + (static_cast<int64_t>(b) * seq_ + s) * config_.feature_dim;
      for (int j = 0; j < config_.feature_dim; ++j) {
        out[j] = (s == 0 ? T(0) : out[j]) + row[j];
      }
    }
    for (int j = 0; j < config_.feature_dim; ++j) out[j] *= inv_s;
  }
  return fused;
}

template <typename T>
Tensor<T> FusionEncoder<T>::backward(const Tensor<T>& d_fused) {
  const int d = config_.feature_dim;
  Tensor<T> d_norm({batch_ * seq_, d});
  const T inv_s = static_cast<T>(1.0 / seq_);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < batch_; ++b) {
    const T* src = d_fused.ptr() + static_cast<int64_t>(b) * d;
    for (int s = 0; s < seq_; ++s) {
      T* row = d_norm.ptr() + (static_cast<int64_t>(b) * seq_ + s) * d;
      for (int j = 0; j < d; ++j) row[j] = src[j] * inv_s;
    }
  }
  Tensor<T> g = final_norm_.backward(d_norm);
  g = as_bsd(std::move(g), batch_, seq_, d);
  for (size_t i = blocks_.size(); i-- > 0;) {
    g = blocks_[i].backward(g);
  }
  return g;
}

template <typename T>
std::vector<T> FusionEncoder<T>::fuse(const TokenSequence<T>& seq) {
  Tensor<T> batch({1, seq.count(), config_.feature_dim});
  std::copy(seq.tokens.data.begin(), seq.tokens.data.end(), batch.data.begin());
  Rng rng(0);  // eval mode: dropout inactive
  Tensor<T> fused = forward(batch, false, rng);
  return std::vector<T>(fused.data.begin(), fused.data.end());
}

template <typename T>
void FusionEncoder<T>::collect_params(std::vector<Param<T>*>& out) {
  for (auto& b : blocks_) b.collect_params(out);
  final_norm_.collect_params(out);
}

template <typename T>
BnNeck<T>::BnNeck(int dim, double momentum, double eps)
    : gamma("bn_neck.gamma", {dim}, false),
      beta("bn_neck.beta", {dim}, false),
      running_mean("bn_neck.running_mean", {dim}, false, false),
      running_var("bn_neck.running_var", {dim}, false, false),
      dim_(dim), momentum_(momentum), eps_(eps) {
  gamma.value.fill(T(1));
  running_var.value.fill(T(1));
}

template <typename T>
Tensor<T> BnNeck<T>::forward(const Tensor<T>& x, bool train) {
  if (x.ndim() != 2 || x.dim(1) != dim_) {
    throw std::invalid_argument("bn_neck: expected [B,D] input");
  }
  int b = x.dim(0);
  Tensor<T> y(x.shape);
  train_cached_ = train;
  if (!train) {
    const T* rm = running_mean.value.ptr();
    const T* rv = running_var.value.ptr();
#pragma omp parallel for schedule(static)
    for (int j = 0; j < dim_; ++j) {
      T rstd = T(1) / std::sqrt(rv[j] + static_cast<T>(eps_));
      for (int r = 0; r < b; ++r) {
        y.ptr()[static_cast<int64_t>(r) * dim_ + j] =
            gamma.value[j] * (x.ptr()[static_cast<int64_t>(r) * dim_ + j] - rm[j]) * rstd +
            beta.value[j];
      }
    }
    return y;
  }
  if (b < 2) throw std::invalid_argument("bn_neck: train mode requires batch size >= 2");
  xhat_cache_ = Tensor<T>(x.shape);
  rstd_cache_.assign(static_cast<size_t>(dim_), T(0));
#pragma omp parallel for schedule(static)
  for (int j = 0; j < dim_; ++j) {
    T mean = T(0);
    for (int r = 0; r < b; ++r) mean += x.ptr()[static_cast<int64_t>(r) * dim_ + j];
    mean /= static_cast<T>(b);
    T var = T(0);
    for (int r = 0; r < b; ++r) {
      T dv = x.ptr()[static_cast<int64_t>(r) * dim_ + j] - mean;
      var += dv * dv;
    }
    var /= static_cast<T>(b);
    T rstd = T(1) / std::sqrt(var + static_cast<T>(eps_));
    rstd_cache_[static_cast<size_t>(j)] = rstd;
    for (int r = 0; r < b; ++r) {
      T h = (x.ptr()[static_cast<int64_t>(r) * dim_ + j] - mean) * rstd;
      xhat_cache_.ptr()[static_cast<int64_t>(r) * dim_ + j] = h;
      y.ptr()[static_cast<int64_t>(r) * dim_ + j] = gamma.value[j] * h + beta.value[j];
    }
    // EMA update; running variance uses the unbiased estimate
    T unbiased = var * static_cast<T>(b) / static_cast<T>(b - 1);
    running_mean.value[j] =
        static_cast<T>(1.0 - momentum_) * running_mean.value[j] + static_cast<T>(momentum_) * mean;
    running_var.value[j] =
        static_cast<T>(1.0 - momentum_) * running_var.value[j] + static_cast<T>(momentum_) * unbiased;
  }
  return y;
}

template <typename T>
Tensor<T> BnNeck<T>::backward(const Tensor<T>& d_out) {
  if (!train_cached_) throw std::logic_error("bn_neck: backward requires a train-mode forward");
  int b = d_out.dim(0);
  Tensor<T> d_in(d_out.shape);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < dim_; ++j) {
    T g = gamma.value[j];
    T rstd = rstd_cache_[static_cast<size_t>(j)];
    T sum_dh = T(0), sum_dhh = T(0), sum_dy = T(0), sum_dyh = T(0);
    for (int r = 0; r < b; ++r) {
      int64_t off = static_cast<int64_t>(r) * dim_ + j;
      T dy = d_out.ptr()[off];
      T dh = dy * g;
      sum_dh += dh;
      sum_dhh += dh * xhat_cache_.ptr()[off];
      sum_dy += dy;
      sum_dyh += dy * xhat_cache_.ptr()[off];
    }
    T inv_b = T(1) / static_cast<T>(b);
    for (int r = 0; r < b; ++r) {
      int64_t off = static_cast<int64_t>(r) * dim_ + j;
      T dh = d_out.ptr()[off] * g;
      d_in.ptr()[off] =
          rstd * (dh - sum_dh * inv_b - xhat_cache_.ptr()[off] * sum_dhh * inv_b);
    }
    gamma.grad[j] += sum_dyh;
    beta.grad[j] += sum_dy;
  }
  return d_in;
}

template <typename T>
void BnNeck<T>::collect_params(std::vector<Param<T>*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
  out.push_back(&running_mean);
  out.push_back(&running_var);
}

#define ACTIONRET_INSTANTIATE_FUSION(T)                                                     \
  template struct TokenSequence<T>;                                                         \
  template TokenSequence<T> build_token_sequence<T>(                                        \
      const std::vector<T>*, const std::vector<T>*, const std::vector<std::vector<T>>&,     \
      const Tensor<T>&, const FusionConfig&);                                               \
  template TokenSequence<T> assemble_tokens<T>(                                             \
      const std::vector<T>&, const std::vector<T>&, const std::vector<std::vector<T>>&,     \
      const Tensor<T>&, const FusionConfig&);                                               \
  template class MultiHeadSelfAttention<T>;                                                 \
  template class FeedForward<T>;                                                            \
  template class TransformerBlock<T>;                                                       \
  template class FusionEncoder<T>;                                                          \
  template class BnNeck<T>;

ACTIONRET_INSTANTIATE_FUSION(float)
ACTIONRET_INSTANTIATE_FUSION(double)

#undef ACTIONRET_INSTANTIATE_FUSION

}  // namespace actionret
