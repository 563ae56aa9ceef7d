#include "yamlsmith/quant.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace yamlsmith::quant {

namespace {

void require_finite(const std::vector<float>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw QuantError("non-finite value at flat index " + std::to_string(i));
    }
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0.0f) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw QuantError("matrix " + std::to_string(rows) + "x" + std::to_string(cols) + " needs " +
                     std::to_string(rows * cols) + " values, got " + std::to_string(values_.size()));
  }
  require_finite(values_);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0f;
  return out;
}

Matrix Matrix::filled(std::size_t rows, std::size_t cols, float value) {
  return Matrix(rows, cols, std::vector<float>(rows * cols, value));
}

Matrix Matrix::random_uniform(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo, double hi) {
  // Manual conversion: std::uniform_real_distribution differs across
  // standard libraries.
  std::mt19937_64 rng(seed);
  std::vector<float> values(rows * cols);
  for (auto& value : values) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    value = static_cast<float>(lo + (hi - lo) * unit);
  }
  return Matrix(rows, cols, std::move(values));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw QuantError("matmul shape mismatch: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " @ " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) sum += static_cast<double>(a(i, k)) * b(k, j);
      out(i, j) = static_cast<float>(sum);
    }
  }
  return out;
}

double QuantizedTensor::half_step() const noexcept {
  return (static_cast<double>(w_max) - w_min) / (2.0 * max_code());
}

bool supported_bits(int bits) noexcept { return bits == 4 || bits == 8; }

QuantizedTensor quantize(const Matrix& w, int bits, std::optional<Range> range) {
  if (!supported_bits(bits)) throw QuantError("unsupported bit width " + std::to_string(bits) + " (use 4 or 8)");
  require_finite(w.values());

  QuantizedTensor q;
  q.rows = w.rows();
  q.cols = w.cols();
  q.bits = bits;
  q.codes.assign(w.values().size(), 0);
  if (range) {
    if (!std::isfinite(range->min) || !std::isfinite(range->max) || range->min > range->max) {
      throw QuantError("calibration range must be finite with min <= max");
    }
    q.w_min = range->min;
    q.w_max = range->max;
  } else if (!w.values().empty()) {
    const auto [lo, hi] = std::minmax_element(w.values().begin(), w.values().end());
    q.w_min = *lo;
    q.w_max = *hi;
  }
  if (q.w_min == q.w_max) return q;

  const double lo = q.w_min;
  const double span = static_cast<double>(q.w_max) - lo;
  const double levels = q.max_code();
  for (std::size_t i = 0; i < q.codes.size(); ++i) {
    const double value = std::clamp<double>(w.values()[i], lo, q.w_max);
    // std::round rounds halfway cases away from zero.
    const double code = std::round((value - lo) * levels / span);
    q.codes[i] = static_cast<std::uint16_t>(std::clamp(code, 0.0, levels));
  }
  return q;
}

Matrix dequantize(const QuantizedTensor& q) {
  std::vector<float> values(q.codes.size(), q.w_min);
  if (q.w_min != q.w_max) {
    const double step = (static_cast<double>(q.w_max) - q.w_min) / q.max_code();
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = static_cast<float>(q.w_min + q.codes[i] * step);
    }
  }
  return Matrix(q.rows, q.cols, std::move(values));
}

}  // namespace yamlsmith::quant
