#include "yamlsmith/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace yamlsmith::quant {

namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void softmax_in_place(double* row, std::size_t n) {
  const double peak = *std::max_element(row, row + n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    row[i] = std::exp(row[i] - peak);
    total += row[i];
  }
  for (std::size_t i = 0; i < n; ++i) row[i] /= total;
}

}  // namespace

void validate(const AttentionParams& params) {
  if (!(params.tau > 0.0) || !std::isfinite(params.tau)) throw QuantError("tau must be positive");
  if (params.d_k == 0 || params.d_v == 0 || params.d_h == 0 || params.heads == 0) {
    throw QuantError("attention dimensions must be positive");
  }
  if (!std::isfinite(params.logit_shift)) throw QuantError("logit shift must be finite");
}

namespace {

// Double-precision working matrix; multi-head attention rounds to float once.
struct Dense {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

Dense to_dense(const Matrix& m) {
  Dense d{m.rows(), m.cols(), std::vector<double>(m.values().begin(), m.values().end())};
  return d;
}

Matrix to_matrix(const Dense& d) {
  Matrix m(d.rows, d.cols);
  for (std::size_t r = 0; r < d.rows; ++r) {
    for (std::size_t c = 0; c < d.cols; ++c) m(r, c) = static_cast<float>(d(r, c));
  }
  return m;
}

Dense product(const Dense& a, const Dense& b) {
  Dense out{a.rows, b.cols, std::vector<double>(a.rows * b.cols, 0.0)};
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) sum += a(i, k) * b(k, j);
      out(i, j) = sum;
    }
  }
  return out;
}

std::vector<double> weights_of(const Dense& q, const Dense& k, const AttentionParams& params) {
  const double scale = params.tau * std::sqrt(static_cast<double>(params.d_k));
  std::vector<double> weights(q.rows * k.rows);
  for (std::size_t i = 0; i < q.rows; ++i) {
    double* row = weights.data() + i * k.rows;
    for (std::size_t j = 0; j < k.rows; ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < q.cols; ++c) dot += q(i, c) * k(j, c);
      row[j] = dot / scale + params.logit_shift;
    }
    softmax_in_place(row, k.rows);
  }
  return weights;
}

Dense attend(const Dense& q, const Dense& k, const Dense& v, const AttentionParams& params) {
  const auto weights = weights_of(q, k, params);
  Dense out{q.rows, v.cols, std::vector<double>(q.rows * v.cols, 0.0)};
  for (std::size_t i = 0; i < q.rows; ++i) {
    for (std::size_t c = 0; c < v.cols; ++c) {
      double sum = 0.0;
      for (std::size_t j = 0; j < k.rows; ++j) sum += weights[i * k.rows + j] * v(j, c);
      out(i, c) = sum;
    }
  }
  return out;
}

void check_qk(const Matrix& q, const Matrix& k, const AttentionParams& params) {
  validate(params);
  if (q.cols() != params.d_k || k.cols() != params.d_k) {
    throw QuantError("Q " + shape(q) + " and K " + shape(k) + " need d_k=" + std::to_string(params.d_k) + " columns");
  }
  if (k.rows() == 0) throw QuantError("K has no rows");
}

}  // namespace

std::vector<double> attention_weights(const Matrix& q, const Matrix& k, const AttentionParams& params) {
  check_qk(q, k, params);
  return weights_of(to_dense(q), to_dense(k), params);
}

Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v, const AttentionParams& params) {
  if (k.rows() != v.rows()) throw QuantError("K " + shape(k) + " and V " + shape(v) + " differ in rows");
  if (v.cols() != params.d_v) throw QuantError("V " + shape(v) + " needs d_v=" + std::to_string(params.d_v) + " columns");
  check_qk(q, k, params);
  return to_matrix(attend(to_dense(q), to_dense(k), to_dense(v), params));
}

Matrix multi_head_attention(const Matrix& q, const Matrix& k, const Matrix& v, const HeadWeights& weights,
                            const AttentionParams& params) {
  validate(params);
  const auto h = weights.heads();
  if (h == 0 || h != params.heads || weights.w_k.size() != h || weights.w_v.size() != h) {
    throw QuantError("head weights must hold " + std::to_string(params.heads) + " W_Q, W_K and W_V matrices");
  }
  const auto d_model = q.cols();
  if (k.cols() != d_model || v.cols() != d_model) throw QuantError("Q, K and V must share d_model columns");
  if (k.rows() != v.rows()) throw QuantError("K " + shape(k) + " and V " + shape(v) + " differ in rows");
  if (k.rows() == 0) throw QuantError("K has no rows");
  for (std::size_t i = 0; i < h; ++i) {
    const bool ok = weights.w_q[i].rows() == d_model && weights.w_q[i].cols() == params.d_k &&
                    weights.w_k[i].rows() == d_model && weights.w_k[i].cols() == params.d_k &&
                    weights.w_v[i].rows() == d_model && weights.w_v[i].cols() == params.d_v;
    if (!ok) throw QuantError("projection shapes of head " + std::to_string(i + 1) + " do not match params");
  }
  if (weights.w_o.rows() != h * params.d_v || weights.w_o.cols() != d_model) {
    throw QuantError("W_O " + shape(weights.w_o) + " must be " + std::to_string(h * params.d_v) + "x" +
                     std::to_string(d_model));
  }

  const auto dq = to_dense(q);
  const auto dk = to_dense(k);
  const auto dv = to_dense(v);
  Dense concat{q.rows(), h * params.d_v, std::vector<double>(q.rows() * h * params.d_v, 0.0)};
  for (std::size_t i = 0; i < h; ++i) {
    const auto head = attend(product(dq, to_dense(weights.w_q[i])), product(dk, to_dense(weights.w_k[i])),
                             product(dv, to_dense(weights.w_v[i])), params);
    for (std::size_t r = 0; r < head.rows; ++r) {
      for (std::size_t c = 0; c < head.cols; ++c) concat(r, i * params.d_v + c) = head(r, c);
    }
  }
  return to_matrix(product(concat, to_dense(weights.w_o)));
}

double PositionTable::operator()(std::size_t t, std::size_t c) const {
  if (values.empty()) return 0.0;
  const auto limit = static_cast<long long>(max_offset);
  const auto offset = std::clamp(static_cast<long long>(c) - static_cast<long long>(t), -limit, limit);
  return values[static_cast<std::size_t>(offset + limit)];
}

std::vector<double> memory_weights(const MemoryContext& ctx, std::size_t d_h) {
  if (ctx.context.empty()) throw QuantError("context set C_t is empty");
  if (ctx.scores.size() != ctx.context.size()) throw QuantError("one score per context index is required");
  if (d_h == 0) throw QuantError("d_h must be positive");
  const double scale = std::sqrt(static_cast<double>(d_h));
  std::vector<double> weights(ctx.scores.size());
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = ctx.scores[i] / scale;
  softmax_in_place(weights.data(), weights.size());
  return weights;
}

std::vector<double> neural_memory_forward(const MemoryContext& ctx, std::size_t d_h) {
  const auto weights = memory_weights(ctx, d_h);
  if (!ctx.position.values.empty() && ctx.position.values.size() != 2 * ctx.position.max_offset + 1) {
    throw QuantError("position table needs 2*max_offset+1 entries");
  }
  std::vector<double> y(ctx.values.cols(), 0.0);
  for (std::size_t i = 0; i < ctx.context.size(); ++i) {
    const auto c = ctx.context[i];
    if (c >= ctx.values.rows()) throw QuantError("context index " + std::to_string(c) + " has no value row");
    const double p = ctx.position(ctx.t, c);
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += weights[i] * (ctx.values(c, j) + p);
  }
  return y;
}

}  // namespace yamlsmith::quant
