#include "yamlsmith/quant_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace yamlsmith::quant {

namespace {

std::string format_number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.6e", value);
  return buffer;
}

Matrix round_trip(const Matrix& m, int bits, std::optional<Range> range) {
  return dequantize(quantize(m, bits, range));
}

}  // namespace

double cosine_similarity(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw QuantError("cosine of differently shaped matrices");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    const double x = a.values()[i];
    const double y = b.values()[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

ErrorReport quant_error_report(const Matrix& w, const std::vector<int>& bit_list,
                               const std::optional<AttentionProbe>& probe, std::optional<Range> range) {
  ErrorReport report;
  report.mode = range ? "static" : "dynamic";
  report.rows = w.rows();
  report.cols = w.cols();

  std::optional<Matrix> reference;
  if (probe) reference = attention(probe->q, probe->k, probe->v, probe->params);

  for (const int bits : bit_list) {
    const auto q = quantize(w, bits, range);
    const auto restored = dequantize(q);
    BitsError entry;
    entry.bits = bits;
    entry.half_step = q.half_step();
    double diff2 = 0.0;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < w.values().size(); ++i) {
      const double original = w.values()[i];
      const double delta = original - restored.values()[i];
      entry.max_abs = std::max(entry.max_abs, std::fabs(delta));
      diff2 += delta * delta;
      norm2 += original * original;
    }
    entry.rel_frob = norm2 > 0.0 ? std::sqrt(diff2 / norm2) : 0.0;
    if (probe) {
      // The probe inputs get their own dynamic ranges.
      const auto approx = attention(round_trip(probe->q, bits, std::nullopt), round_trip(probe->k, bits, std::nullopt),
                                    round_trip(probe->v, bits, std::nullopt), probe->params);
      entry.probe_cosine = cosine_similarity(*reference, approx);
    }
    report.entries.push_back(entry);
  }
  return report;
}

ErrorReport quant_bench(std::size_t size, std::uint64_t seed, const std::vector<int>& bit_list,
                        std::optional<Range> range) {
  const auto w = Matrix::random_uniform(size, size, seed);
  AttentionProbe probe{Matrix::random_uniform(size, size, seed + 1), Matrix::random_uniform(size, size, seed + 2),
                       Matrix::random_uniform(size, size, seed + 3), {}};
  probe.params.d_k = size;
  probe.params.d_v = size;
  return quant_error_report(w, bit_list, probe, range);
}

std::string render_error_report(const ErrorReport& report, bool json) {
  if (json) {
    nlohmann::ordered_json doc;
    doc["mode"] = report.mode;
    doc["rows"] = report.rows;
    doc["cols"] = report.cols;
    auto& entries = doc["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : report.entries) {
      nlohmann::ordered_json item;
      item["bits"] = e.bits;
      item["max_abs"] = e.max_abs;
      item["half_step"] = e.half_step;
      item["rel_frob"] = e.rel_frob;
      item["probe_cosine"] = e.probe_cosine ? nlohmann::ordered_json(*e.probe_cosine) : nlohmann::ordered_json();
      entries.push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "quantization: " << report.mode << ", " << report.rows << "x" << report.cols << "\n";
  out << "bits  max_abs       half_step     rel_frob      probe_cosine\n";
  for (const auto& e : report.entries) {
    char bits[8];
    std::snprintf(bits, sizeof bits, "%-4d", e.bits);
    out << bits << "  " << format_number(e.max_abs) << "  " << format_number(e.half_step) << "  "
        << format_number(e.rel_frob) << "  " << (e.probe_cosine ? format_number(*e.probe_cosine) : "-") << "\n";
  }
  return out.str();
}

}  // namespace yamlsmith::quant
