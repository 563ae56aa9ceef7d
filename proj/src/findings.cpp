#include "yamlsmith/findings.hpp"

#include <algorithm>
#include <tuple>

#include <json.hpp>

namespace yamlsmith::validate {

LineIndex::LineIndex(std::string_view text) : size_(text.size()) {
  starts_.push_back(0);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') starts_.push_back(i + 1);
  }
}

Span LineIndex::span(std::size_t begin, std::size_t end) const {
  begin = std::min(begin, size_);
  end = std::clamp(end, begin, size_);
  auto locate = [&](std::size_t offset) {
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
    const auto line = static_cast<std::size_t>(it - starts_.begin());
    return std::pair{line, offset - starts_[line - 1] + 1};
  };
  Span out;
  out.begin = begin;
  out.end = end;
  std::tie(out.line, out.column) = locate(begin);
  std::tie(out.end_line, out.end_column) = locate(end);
  return out;
}

std::size_t LineIndex::offset(std::size_t line0, std::size_t column0) const {
  if (line0 >= starts_.size()) return size_;
  const auto start = starts_[line0];
  const auto stop = line0 + 1 < starts_.size() ? starts_[line0 + 1] - 1 : size_;
  return std::min(start + column0, stop);
}

std::size_t LineIndex::line_end(std::size_t offset) const {
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
  if (it == starts_.end()) return size_;
  return *it - 1;
}

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::error:
      return "error";
    case Severity::warning:
      return "warning";
    case Severity::info:
      return "info";
  }
  return "error";
}

void sort_findings(std::vector<Finding>& findings) {
  std::stable_sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
    return std::tie(a.span.begin, a.span.end, a.code, a.message) <
           std::tie(b.span.begin, b.span.end, b.code, b.message);
  });
}

std::size_t count_severity(const std::vector<Finding>& findings, Severity severity) {
  return static_cast<std::size_t>(std::count_if(
      findings.begin(), findings.end(), [&](const Finding& f) { return f.severity == severity; }));
}

std::string findings_to_json(const std::vector<Finding>& findings,
                             std::string_view catalog_version, int indent) {
  nlohmann::ordered_json doc;
  doc["catalog_version"] = std::string(catalog_version);
  doc["errors"] = count_severity(findings, Severity::error);
  doc["warnings"] = count_severity(findings, Severity::warning);
  auto& list = doc["findings"] = nlohmann::ordered_json::array();
  for (const auto& finding : findings) {
    nlohmann::ordered_json item;
    item["severity"] = std::string(to_string(finding.severity));
    item["code"] = finding.code;
    item["message"] = finding.message;
    item["span"] = {
        {"begin", finding.span.begin},   {"end", finding.span.end},
        {"line", finding.span.line},     {"column", finding.span.column},
        {"end_line", finding.span.end_line}, {"end_column", finding.span.end_column},
    };
    list.push_back(std::move(item));
  }
  return doc.dump(indent) + "\n";
}

std::string findings_to_text(const std::vector<Finding>& findings) {
  std::string out;
  for (const auto& finding : findings) {
    out += std::to_string(finding.span.line) + ":" + std::to_string(finding.span.column) + ": " +
           std::string(to_string(finding.severity)) + " " + finding.code + ": " +
           finding.message + "\n";
  }
  return out;
}

}  // namespace yamlsmith::validate
