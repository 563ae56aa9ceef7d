#pragma once

#include <cstddef>
#include <vector>

#include "yamlsmith/quant.hpp"

namespace yamlsmith::quant {

struct AttentionParams {
  double tau = 1.0;
  std::size_t d_k = 1;
  std::size_t d_v = 1;
  std::size_t d_h = 1;
  std::size_t heads = 1;
  // Added to every logit before the softmax; the result must not change.
  double logit_shift = 0.0;
};

void validate(const AttentionParams& params);

/// Row-major rows(Q) x rows(K) softmax(Q K^T / (tau sqrt(d_k))), each row
/// stabilized by subtracting its maximum.
std::vector<double> attention_weights(const Matrix& q, const Matrix& k, const AttentionParams& params);

/// attention_weights(Q, K) V. Throws QuantError on shape mismatch.
Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v, const AttentionParams& params);

/// Per-head projections W_Q[i], W_K[i] (d_model x d_k), W_V[i] (d_model x
/// d_v), and the output map W_O (heads*d_v x d_model).
struct HeadWeights {
  std::vector<Matrix> w_q;
  std::vector<Matrix> w_k;
  std::vector<Matrix> w_v;
  Matrix w_o;

  std::size_t heads() const noexcept { return w_q.size(); }
};

/// Concat(head_1, ..., head_h) W_O with head_i = attention(Q W_Q[i], K W_K[i], V W_V[i]).
Matrix multi_head_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                            const HeadWeights& weights, const AttentionParams& params);

/// p(t, c) looked up by the offset c - t clipped to [-max_offset, max_offset].
/// An empty table is all zeros.
struct PositionTable {
  std::size_t max_offset = 0;
  std::vector<double> values;  // 2 * max_offset + 1 entries, offset -max first

  double operator()(std::size_t t, std::size_t c) const;
};

/// One query position t of the feed-forward memory: context indices C_t,
/// value rows V (row c is V_c), scores S_tc parallel to `context`.
struct MemoryContext {
  std::size_t t = 0;
  std::vector<std::size_t> context;
  Matrix values;
  std::vector<double> scores;
  PositionTable position;
};

/// a_tc = softmax over C_t of S_tc / sqrt(d_h).
std::vector<double> memory_weights(const MemoryContext& ctx, std::size_t d_h);

/// y_t = sum over C_t of a_tc (V_c + p(t, c)). Throws QuantError for an
/// empty context or mismatched sizes.
std::vector<double> neural_memory_forward(const MemoryContext& ctx, std::size_t d_h);

}  // namespace yamlsmith::quant
