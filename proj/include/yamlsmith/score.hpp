#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "yamlsmith/backend.hpp"
#include "yamlsmith/catalog.hpp"
#include "yamlsmith/extract.hpp"

namespace yamlsmith::score {

struct Weights {
  double parse = 0.3;
  double errors = 0.4;
  double warnings = 0.2;
  double echo = 0.1;
};

/// Throws std::invalid_argument unless all weights are non-negative and sum
/// to 1 within 1e-9.
void validate_weights(const Weights& weights);

struct ScoreOptions {
  Weights weights;
  double echo_threshold = extract::kEchoThreshold;
};

struct ScoreCard {
  bool extraction_success = false;
  bool parse_success = false;
  std::size_t structure_errors = 0;  // syntax and structural error findings
  std::size_t module_errors = 0;
  std::size_t warnings = 0;
  std::size_t tasks = 0;
  bool echo_flag = false;
  double composite = 0.0;

  bool operator==(const ScoreCard&) const = default;
};

/// composite = w_parse*parse + w_err*(1 - min(1, errors/tasks))
///           + w_warn*(1 - min(1, warnings/tasks)) + w_echo*(1 - echo)
/// with tasks floored at 1; 0 when nothing was extracted.
double composite(const ScoreCard& card, const Weights& weights);

/// extract -> largest block -> parse -> validate. A response with
/// finish_reason=error scores as a failed extraction.
ScoreCard score_candidate(std::string_view prompt, const backend::ModelResponse& response,
                          const validate::SchemaCatalog& catalog, const ScoreOptions& options = {});

struct EvalRow {
  std::string fixture;
  std::string model;
  ScoreCard card;
};

struct EvalTable {
  std::vector<EvalRow> rows;  // composite descending, ties by fixture id
  std::string catalog_version;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Replays every record of `corpus` and scores it. `jobs` worker threads;
/// the result does not depend on it. Throws EvalError for an empty corpus.
EvalTable run_eval(const backend::TranscriptStore& corpus, const validate::SchemaCatalog& catalog,
                   const ScoreOptions& options = {}, unsigned jobs = 1);

enum class ReportFormat { text, json };

std::optional<ReportFormat> parse_report_format(std::string_view name);

/// text: aligned columns, composite with 3 decimals.
/// json: {"rows":[{"fixture","model","card":{...}}],"catalog_version"}.
std::string render_report(const EvalTable& table, ReportFormat format);

/// "lhs<rhs": composite(lhs) < composite(rhs). An id is a fixture id
/// ("annexe4.tir2") or "annexeN" when that annexe has exactly one record.
struct OrderAssertion {
  std::string lhs;
  std::string rhs;
};

std::optional<OrderAssertion> parse_order_assertion(std::string_view text);

/// Throws EvalError when an id matches no row or is ambiguous.
bool check_order(const EvalTable& table, const OrderAssertion& assertion);

const EvalRow& find_row(const EvalTable& table, std::string_view id);

}  // namespace yamlsmith::score
