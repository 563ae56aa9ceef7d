#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "yamlsmith/attention.hpp"
#include "yamlsmith/quant.hpp"

namespace yamlsmith::quant {

struct AttentionProbe {
  Matrix q;
  Matrix k;
  Matrix v;
  AttentionParams params;
};

struct BitsError {
  int bits = 8;
  double max_abs = 0.0;
  double rel_frob = 0.0;
  double half_step = 0.0;
  std::optional<double> probe_cosine;
};

struct ErrorReport {
  std::string mode;  // "dynamic", or "static" with a caller range
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<BitsError> entries;  // in bit_list order
};

/// Flattened cosine similarity; 1 when both are zero, 0 when only one is.
double cosine_similarity(const Matrix& a, const Matrix& b);

/// Round-trip error of W per bit width; with a probe, the cosine between
/// attention on the original and on the dequantized Q, K, V.
ErrorReport quant_error_report(const Matrix& w, const std::vector<int>& bit_list,
                               const std::optional<AttentionProbe>& probe = std::nullopt,
                               std::optional<Range> range = std::nullopt);

/// Seeded benchmark: W uniform [-1, 1] of size x size from `seed`, probe Q,
/// K, V of the same size from seed+1, seed+2, seed+3.
ErrorReport quant_bench(std::size_t size, std::uint64_t seed, const std::vector<int>& bit_list,
                        std::optional<Range> range = std::nullopt);

std::string render_error_report(const ErrorReport& report, bool json);

}  // namespace yamlsmith::quant
