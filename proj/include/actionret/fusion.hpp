#ifndef ACTIONRET_FUSION_HPP
#define ACTIONRET_FUSION_HPP

#include <optional>
#include <string>
#include <vector>

#include "actionret/layers.hpp"
#include "actionret/tensor.hpp"

namespace actionret {

enum class Aspect { kAnchored = 0, kGlobal = 1, kContextual = 2 };

struct FusionConfig {
  int feature_dim = 2048;    // D
  int num_contextual = 10;   // k
  int blocks = 3;            // N
  int heads = 8;
  int ffn_multiplier = 4;
  double dropout = 0.1;
  bool positional_enabled = true;  // per-token sinusoidal embedding
  bool type_enabled = true;        // learned per-aspect embedding

  int token_count() const { return num_contextual + 2; }
  void validate() const;  // throws std::invalid_argument on bad combinations
};

// Sinusoidal positional embedding: component 2i = sin(w_i t),
// component 2i+1 = cos(w_i t), w_i = 10000^(-2i/D). D must be even.
std::vector<double> positional_embedding(int t, int dim);

template <typename T>
struct TokenSequence {
  Tensor<T> tokens;          // [S, D]
  std::vector<Aspect> tags;  // size S

  int count() const { return tokens.dim(0); }
};

// Builds the fused input sequence in the order [anchored, global,
// contextual...], skipping absent aspects, and adds emb = typ + pos per
// token. `type_embeddings` is the learned [3, D] table indexed by Aspect.
template <typename T>
TokenSequence<T> build_token_sequence(const std::vector<T>* anchored,
                                      const std::vector<T>* global_feat,
                                      const std::vector<std::vector<T>>& contextual,
                                      const Tensor<T>& type_embeddings,
                                      const FusionConfig& config);

// Full assembly: all three aspects present, contextual list length
// must equal config.num_contextual; result has k+2 tokens.
template <typename T>
TokenSequence<T> assemble_tokens(const std::vector<T>& anchored,
                                 const std::vector<T>& global_feat,
                                 const std::vector<std::vector<T>>& contextual,
                                 const Tensor<T>& type_embeddings,
                                 const FusionConfig& config);

template <typename T>
class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(const std::string& name, int dim, int heads);

  void init(Rng& rng);
  Tensor<T> forward(const Tensor<T>& x);   // [B,S,D] -> [B,S,D]
  Tensor<T> backward(const Tensor<T>& d_out);
  void collect_params(std::vector<Param<T>*>& out);

  // probabilities from the last forward, [B, heads, S, S]
  const Tensor<T>& last_attention() const { return attn_; }

 private:
  int dim_ = 0, heads_ = 0, head_dim_ = 0;
  Linear<T> wq_, wk_, wv_, wo_;
  Tensor<T> q_, k_, v_;   // [B*S, D]
  Tensor<T> attn_;        // [B, heads, S, S]
  int batch_ = 0, seq_ = 0;
};

template <typename T>
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(const std::string& name, int dim, int hidden);

  void init(Rng& rng);
  Tensor<T> forward(const Tensor<T>& x);  // [R,D] -> [R,D]
  Tensor<T> backward(const Tensor<T>& d_out);
  void collect_params(std::vector<Param<T>*>& out);

 private:
  Linear<T> lin1_, lin2_;
  Tensor<T> hidden_act_;
};

// Pre-norm block: x + Attn(LN(x)), then h + FFN(LN(h)), dropout on both
// residual branches.
template <typename T>
class TransformerBlock {
 public:
  TransformerBlock() = default;
  TransformerBlock(const std::string& name, const FusionConfig& config);

  void init(Rng& rng);
  Tensor<T> forward(const Tensor<T>& x, bool train, Rng& rng);  // [B,S,D]
  Tensor<T> backward(const Tensor<T>& d_out);
  void collect_params(std::vector<Param<T>*>& out);

  const MultiHeadSelfAttention<T>& attention() const { return attn_; }

 private:
  LayerNorm<T> ln1_, ln2_;
  MultiHeadSelfAttention<T> attn_;
  FeedForward<T> ffn_;
  Dropout<T> drop1_, drop2_;
};

// N transformer blocks, a final layer norm, then the arithmetic mean over
// all tokens. Non-finite intermediates raise with the offending block index.
template <typename T>
class FusionEncoder {
 public:
  FusionEncoder() = default;
  explicit FusionEncoder(const FusionConfig& config);

  void init(Rng& rng);
  Tensor<T> forward(const Tensor<T>& tokens, bool train, Rng& rng);  // [B,S,D] -> [B,D]
  Tensor<T> backward(const Tensor<T>& d_fused);                      // [B,D] -> [B,S,D]
  void collect_params(std::vector<Param<T>*>& out);

  // Single-sequence fusion (eval mode); the TokenSequence must already carry
  // its embeddings.
  std::vector<T> fuse(const TokenSequence<T>& seq);

  const TransformerBlock<T>& block(int i) const { return blocks_[static_cast<size_t>(i)]; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }

 private:
  FusionConfig config_;
  std::vector<TransformerBlock<T>> blocks_;
  LayerNorm<T> final_norm_;
  int batch_ = 0, seq_ = 0;
};

// Batch-norm neck over [B, D] embeddings. Train mode uses batch statistics
// (batch size >= 2) and updates running statistics by EMA; eval mode is a
// fixed affine map from the running statistics.
template <typename T>
class BnNeck {
 public:
  BnNeck() = default;
  explicit BnNeck(int dim, double momentum = 0.1, double eps = 1e-5);

  Tensor<T> forward(const Tensor<T>& x, bool train);
  Tensor<T> backward(const Tensor<T>& d_out);  // valid after a train-mode forward
  void collect_params(std::vector<Param<T>*>& out);

  Param<T> gamma, beta;
  Param<T> running_mean, running_var;  // trainable=false, tracked in checkpoints

 private:
  int dim_ = 0;
  double momentum_ = 0.1, eps_ = 1e-5;
  bool train_cached_ = false;
  Tensor<T> xhat_cache_;
  std::vector<T> rstd_cache_;
};

}  // namespace actionret

#endif  // ACTIONRET_FUSION_HPP
