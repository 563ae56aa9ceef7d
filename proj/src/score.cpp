#include "yamlsmith/score.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "yamlsmith/playbook.hpp"

namespace yamlsmith::score {

namespace {

using validate::Severity;

std::string format_fixed(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3f", value);
  return buffer;
}

// The annexe part of "annexeN.tirM".
std::string_view annexe_of(std::string_view fixture) {
  return fixture.substr(0, fixture.find('.'));
}

}  // namespace

void validate_weights(const Weights& w) {
  for (const double value : {w.parse, w.errors, w.warnings, w.echo}) {
    if (!std::isfinite(value) || value < 0.0) {
      throw std::invalid_argument("composite weights must be non-negative");
    }
  }
  const double sum = w.parse + w.errors + w.warnings + w.echo;
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("composite weights must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

double composite(const ScoreCard& card, const Weights& w) {
  if (!card.extraction_success) return 0.0;
  const double tasks = static_cast<double>(std::max<std::size_t>(card.tasks, 1));
  const double errors = static_cast<double>(card.structure_errors + card.module_errors);
  const double warnings = static_cast<double>(card.warnings);
  return w.parse * (card.parse_success ? 1.0 : 0.0) +
         w.errors * (1.0 - std::min(1.0, errors / tasks)) +
         w.warnings * (1.0 - std::min(1.0, warnings / tasks)) +
         w.echo * (card.echo_flag ? 0.0 : 1.0);
}

ScoreCard score_candidate(std::string_view prompt, const backend::ModelResponse& response,
                          const validate::SchemaCatalog& catalog, const ScoreOptions& options) {
  ScoreCard card;
  if (response.finish_reason == backend::FinishReason::error) return card;
  const auto blocks = extract::extract_all(response.text);
  if (blocks.empty()) return card;
  card.extraction_success = true;
  card.echo_flag = extract::detect_echo(prompt, blocks, options.echo_threshold).any_echo;

  const auto candidate = extract::select_candidates(blocks, extract::Policy::largest).front();
  const auto parsed = validate::parse_playbook(candidate.content);
  if (!parsed.ok()) {
    card.structure_errors = validate::count_severity(parsed.findings, Severity::error);
    card.warnings = validate::count_severity(parsed.findings, Severity::warning);
  } else {
    card.parse_success = true;
    const auto structure = validate::validate_structure(*parsed.ast);
    const auto modules = validate::validate_modules(*parsed.ast, catalog);
    card.structure_errors = validate::count_severity(structure, Severity::error);
    card.module_errors = validate::count_severity(modules, Severity::error);
    card.warnings = validate::count_severity(structure, Severity::warning) +
                    validate::count_severity(modules, Severity::warning);
    card.tasks = parsed.ast->task_count();
  }
  card.composite = composite(card, options.weights);
  return card;
}

EvalTable run_eval(const backend::TranscriptStore& corpus, const validate::SchemaCatalog& catalog,
                   const ScoreOptions& options, unsigned jobs) {
  if (corpus.empty()) throw EvalError("corpus '" + corpus.source_path() + "' has no records");
  const auto& records = corpus.records();
  std::vector<EvalRow> rows(records.size());
  std::vector<std::exception_ptr> failures(records.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        const auto& record = records[i];
        backend::GenerationRequest request;
        request.prompt = record.prompt;
        request.model_name = record.model;
        request.sample = corpus.sample_index(i);
        const auto response = backend::replay_complete(request, corpus);
        rows[i] = {record.id(), record.model, score_candidate(record.prompt, response, catalog, options)};
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  const auto threads = std::clamp<std::size_t>(jobs, 1, records.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& thread : pool) thread.join();
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  std::stable_sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) {
    if (a.card.composite != b.card.composite) return a.card.composite > b.card.composite;
    return a.fixture < b.fixture;
  });
  return {std::move(rows), catalog.version()};
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "text") return ReportFormat::text;
  if (name == "json") return ReportFormat::json;
  return std::nullopt;
}

std::string render_report(const EvalTable& table, ReportFormat format) {
  if (format == ReportFormat::json) {
    nlohmann::ordered_json doc;
    auto& rows = doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      const auto& c = row.card;
      nlohmann::ordered_json card;
      card["extraction_success"] = c.extraction_success;
      card["parse_success"] = c.parse_success;
      card["structure_errors"] = c.structure_errors;
      card["module_errors"] = c.module_errors;
      card["warnings"] = c.warnings;
      card["tasks"] = c.tasks;
      card["echo_flag"] = c.echo_flag;
      card["composite"] = c.composite;
      rows.push_back({{"fixture", row.fixture}, {"model", row.model}, {"card", std::move(card)}});
    }
    doc["catalog_version"] = table.catalog_version;
    return doc.dump(2) + "\n";
  }

  const std::vector<std::string> header = {"fixture", "model",    "extracted", "parsed", "struct_err",
                                           "module_err", "warnings", "tasks", "echo", "composite"};
  std::vector<std::vector<std::string>> cells = {header};
  for (const auto& row : table.rows) {
    const auto& c = row.card;
    cells.push_back({row.fixture, row.model, c.extraction_success ? "yes" : "no",
                     c.parse_success ? "yes" : "no", std::to_string(c.structure_errors),
                     std::to_string(c.module_errors), std::to_string(c.warnings),
                     std::to_string(c.tasks), c.echo_flag ? "yes" : "no", format_fixed(c.composite)});
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) widths[i] = std::max(widths[i], line[i].size());
  }
  std::ostringstream out;
  for (const auto& line : cells) {
    std::string text;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i) text += "  ";
      // Names left-aligned, numbers right-aligned.
      const auto pad = std::string(widths[i] - line[i].size(), ' ');
      text += i < 2 ? line[i] + pad : pad + line[i];
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out << text << '\n';
  }
  out << "catalog: " << table.catalog_version << '\n';
  return out.str();
}

std::optional<OrderAssertion> parse_order_assertion(std::string_view text) {
  const auto lt = text.find('<');
  if (lt == std::string_view::npos || text.find('<', lt + 1) != std::string_view::npos) {
    return std::nullopt;
  }
  auto trim = [](std::string_view s) {
    const auto first = s.find_first_not_of(' ');
    if (first == std::string_view::npos) return std::string();
    return std::string(s.substr(first, s.find_last_not_of(' ') - first + 1));
  };
  OrderAssertion out{trim(text.substr(0, lt)), trim(text.substr(lt + 1))};
  if (out.lhs.empty() || out.rhs.empty()) return std::nullopt;
  return out;
}

const EvalRow& find_row(const EvalTable& table, std::string_view id) {
  for (const auto& row : table.rows) {
    if (row.fixture == id) return row;
  }
  const EvalRow* match = nullptr;
  std::size_t count = 0;
  for (const auto& row : table.rows) {
    if (annexe_of(row.fixture) == id) {
      match = &row;
      ++count;
    }
  }
  if (count == 1) return *match;
  if (count > 1) {
    throw EvalError("'" + std::string(id) + "' matches " + std::to_string(count) +
                    " fixtures; name one as <annexe>.tir<N>");
  }
  throw EvalError("no fixture named '" + std::string(id) + "'");
}

bool check_order(const EvalTable& table, const OrderAssertion& assertion) {
  return find_row(table, assertion.lhs).card.composite < find_row(table, assertion.rhs).card.composite;
}

}  // namespace yamlsmith::score
