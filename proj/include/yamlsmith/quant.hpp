#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace yamlsmith::quant {

class QuantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Row-major float32 matrix; every entry finite.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  /// Throws QuantError on a length mismatch or a non-finite value.
  Matrix(std::size_t rows, std::size_t cols, std::vector<float> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const std::vector<float>& values() const noexcept { return values_; }

  float operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  float& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

  static Matrix identity(std::size_t n);
  static Matrix filled(std::size_t rows, std::size_t cols, float value);
  /// Uniform in [lo, hi) from mt19937_64(seed); identical on every platform.
  static Matrix random_uniform(std::size_t rows, std::size_t cols, std::uint64_t seed,
                               double lo = -1.0, double hi = 1.0);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

/// A @ B with double accumulation.
Matrix matmul(const Matrix& a, const Matrix& b);

struct QuantizedTensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint16_t> codes;
  int bits = 8;
  float w_min = 0.0f;
  float w_max = 0.0f;

  std::uint32_t max_code() const noexcept { return (1u << bits) - 1u; }
  /// (w_max - w_min) / (2 * (2^n - 1)): the worst round-trip error.
  double half_step() const noexcept;
};

bool supported_bits(int bits) noexcept;

/// Caller-supplied (min, max) for static quantization; values outside are
/// clamped before coding.
struct Range {
  float min = 0.0f;
  float max = 0.0f;
};

/// code = round((w - min) * (2^n - 1) / (max - min)), rounding half away
/// from zero. min == max gives all-zero codes. Throws QuantError for
/// unsupported bits or an invalid range.
QuantizedTensor quantize(const Matrix& w, int bits, std::optional<Range> range = std::nullopt);

/// w' = w_min + code * (w_max - w_min) / (2^n - 1).
Matrix dequantize(const QuantizedTensor& q);

}  // namespace yamlsmith::quant
