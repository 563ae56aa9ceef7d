#include "yamlsmith/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "yamlsmith/backend.hpp"
#include "yamlsmith/config.hpp"
#include "yamlsmith/extract.hpp"
#include "yamlsmith/playbook.hpp"
#include "yamlsmith/prompt.hpp"
#include "yamlsmith/quant_report.hpp"
#include "yamlsmith/score.hpp"

#ifndef YAMLSMITH_DEFAULT_CATALOG
#define YAMLSMITH_DEFAULT_CATALOG "data/catalog.yaml"
#endif

namespace yamlsmith::cli {

namespace {

struct Failure {
  int code;
  std::string message;
};

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{exit_code::kFailure, std::string("cannot read ") + what + " '" + path + "'"};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> catalogs;
  std::string format = "text";
};

void add_common(CLI::App& cmd, CommonOptions& common) {
  cmd.add_option("--config", common.config_path, "YAML config file (default: $YAMLSMITH_CONFIG)");
  cmd.add_option("--catalog", common.catalogs, "extra module catalog merged over the shipped one");
  cmd.add_option("--format", common.format, "report format")->check(CLI::IsMember({"text", "json"}));
}

Config load_settings(const CommonOptions& common) {
  std::string path = common.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv(std::string(kConfigEnv).c_str()); env && *env) path = env;
  }
  if (path.empty()) return {};
  try {
    return load_config(path);
  } catch (const ConfigError& error) {
    throw Failure{exit_code::kFailure, error.what()};
  }
}

validate::SchemaCatalog load_catalogs(const Config& config, const CommonOptions& common) {
  try {
    auto catalog = validate::load_catalog(config.catalog_path.value_or(default_catalog_path()));
    for (const auto& extra : common.catalogs) catalog.merge(validate::load_catalog(extra));
    return catalog;
  } catch (const validate::CatalogError& error) {
    throw Failure{exit_code::kFailure, error.what()};
  }
}

std::string budget_report(const prompt::BudgetReport& report, bool json) {
  if (json) {
    nlohmann::ordered_json doc = {{"prompt_tokens", report.prompt_tokens},
                                  {"window", report.window},
                                  {"reserve", report.reserve},
                                  {"fits", report.fits},
                                  {"overflow", report.overflow}};
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "prompt does not fit: " << report.prompt_tokens << " prompt tokens + " << report.reserve
      << " reserved > window " << report.window << " (overflow " << report.overflow << ")\n";
  return out.str();
}

std::string findings_report(const std::vector<validate::Finding>& findings, const std::string& version, bool json) {
  if (json) return validate::findings_to_json(findings, version) + "\n";
  std::ostringstream out;
  out << validate::findings_to_text(findings);
  out << validate::count_severity(findings, validate::Severity::error) << " error(s), "
      << validate::count_severity(findings, validate::Severity::warning) << " warning(s)\n";
  return out.str();
}

int exit_for(const std::vector<validate::Finding>& findings) {
  return validate::count_severity(findings, validate::Severity::error) == 0 ? exit_code::kClean
                                                                             : exit_code::kFindings;
}

struct GenerateOptions {
  CommonOptions common;
  std::string description;
  std::string prompt_file;
  std::string system_text;
  std::string input_context;
  std::string profile;
  std::string replay;
  std::string endpoint;
  std::string out;
  std::string model;
  std::string policy;
  std::size_t sample = 0;
  std::optional<std::size_t> reserve;
  std::optional<std::size_t> max_new_tokens;
  std::optional<double> temperature;
  long timeout_ms = 120000;
};

int cmd_generate(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
  const auto config = load_settings(o.common);
  const bool json = o.common.format == "json";
  const auto profile_name = o.profile.empty() ? config.profile : o.profile;
  const auto profile = find_profile(config, profile_name);
  if (!profile) throw Failure{exit_code::kUsage, "unknown profile '" + profile_name + "'"};

  prompt::PromptSpec spec;
  if (!o.prompt_file.empty()) {
    if (!o.description.empty()) throw Failure{exit_code::kUsage, "give a description or --prompt-file, not both"};
    auto content = read_file(o.prompt_file, "prompt file");
    auto parsed = prompt::parse_prompt(content, profile->template_kind);
    if (!parsed) {
      while (!content.empty() && (content.back() == '\n' || content.back() == '\r')) content.pop_back();
      parsed = prompt::parse_prompt(content, profile->template_kind);
    }
    if (parsed) {
      spec = std::move(*parsed);
    } else {
      spec.instruction = content;
    }
  } else {
    spec.instruction = o.description;
    spec.system_text = o.system_text;
    spec.input_context = o.input_context;
  }
  if (spec.instruction.empty()) throw Failure{exit_code::kUsage, "description is empty"};

  const auto text = prompt::render_prompt(spec, *profile);
  const auto reserve = o.reserve.value_or(profile->default_reserve_output);
  const auto budget = prompt::check_budget(text, *profile, reserve);
  if (!budget.fits) {
    err << budget_report(budget, json);
    return exit_code::kBudget;
  }

  backend::GenerationRequest request;
  request.prompt = text;
  request.max_new_tokens = o.max_new_tokens.value_or(config.max_new_tokens);
  request.temperature = o.temperature.value_or(config.temperature);
  request.stop_markers = profile->stop_markers;
  request.model_name = o.model;
  request.sample = o.sample;

  backend::ModelResponse response;
  try {
    if (!o.replay.empty()) {
      response = backend::replay_complete(request, backend::load_transcripts(o.replay));
    } else {
      const auto endpoint = o.endpoint.empty() ? backend::resolve_endpoint(config.endpoint.value_or(
                                                     std::string(backend::kDefaultEndpoint)))
                                               : o.endpoint;
      response = backend::complete(request, endpoint, std::chrono::milliseconds(o.timeout_ms));
    }
  } catch (const backend::BackendError& error) {
    throw Failure{exit_code::kFailure, error.what()};
  }
  if (response.finish_reason == backend::FinishReason::error) {
    throw Failure{exit_code::kFailure, "backend reported a failed generation"};
  }

  auto policy = config.candidate_policy;
  if (!o.policy.empty()) policy = *extract::parse_policy(o.policy);
  const auto blocks = extract::extract_all(response.text);
  std::vector<extract::CodeBlock> candidates;
  try {
    candidates = extract::select_candidates(blocks, policy);
  } catch (const extract::NoCandidate&) {
  }
  if (candidates.empty()) throw Failure{exit_code::kFailure, "no YAML candidate in the model response"};

  const auto catalog = load_catalogs(config, o.common);
  const extract::CodeBlock* best = nullptr;
  std::vector<validate::Finding> best_findings;
  std::size_t best_errors = 0;
  for (const auto& candidate : candidates) {
    auto findings = validate::lint(candidate.content, catalog);
    const auto errors = validate::count_severity(findings, validate::Severity::error);
    if (!best || errors < best_errors) {
      best = &candidate;
      best_findings = std::move(findings);
      best_errors = errors;
    }
  }

  if (!o.out.empty()) {
    std::ofstream file(o.out, std::ios::binary);
    if (!(file << best->content)) throw Failure{exit_code::kFailure, "cannot write '" + o.out + "'"};
  } else {
    out << best->content;
  }
  err << findings_report(best_findings, catalog.version(), json);
  return exit_for(best_findings);
}

int cmd_lint(const CommonOptions& common, const std::string& path, std::ostream& out) {
  const auto config = load_settings(common);
  const auto text = read_file(path, "playbook");
  const auto catalog = load_catalogs(config, common);
  const auto findings = validate::lint(text, catalog);
  out << findings_report(findings, catalog.version(), common.format == "json");
  return exit_for(findings);
}

int cmd_eval(const CommonOptions& common, const std::string& corpus_path, unsigned jobs,
             const std::vector<std::string>& orders, std::ostream& out, std::ostream& err) {
  std::vector<score::OrderAssertion> assertions;
  for (const auto& text : orders) {
    const auto parsed = score::parse_order_assertion(text);
    if (!parsed) throw Failure{exit_code::kUsage, "--assert-order expects A<B, got '" + text + "'"};
    assertions.push_back(*parsed);
  }
  const auto config = load_settings(common);
  backend::TranscriptStore corpus;
  try {
    corpus = backend::load_transcripts(corpus_path);
  } catch (const backend::BackendError& error) {
    throw Failure{exit_code::kFailure, error.what()};
  }
  const auto catalog = load_catalogs(config, common);
  score::ScoreOptions options;
  options.weights = config.composite_weights;
  options.echo_threshold = config.echo_threshold;
  score::EvalTable table;
  try {
    table = score::run_eval(corpus, catalog, options, jobs);
  } catch (const std::exception& error) {
    throw Failure{exit_code::kFailure, error.what()};
  }
  out << score::render_report(table, *score::parse_report_format(common.format));

  int status = exit_code::kClean;
  for (const auto& assertion : assertions) {
    try {
      if (!score::check_order(table, assertion)) {
        err << "order assertion failed: " << assertion.lhs << " < " << assertion.rhs << "\n";
        status = exit_code::kFailure;
      }
    } catch (const score::EvalError& error) {
      throw Failure{exit_code::kUsage, error.what()};
    }
  }
  return status;
}

std::vector<int> parse_bits(const std::string& text) {
  std::vector<int> bits;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const int value = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      bits.push_back(value);
    } catch (const std::exception&) {
      throw Failure{exit_code::kUsage, "--bits expects a comma-separated list, got '" + text + "'"};
    }
  }
  if (bits.empty()) throw Failure{exit_code::kUsage, "--bits is empty"};
  for (const int b : bits) {
    if (!quant::supported_bits(b)) {
      throw Failure{exit_code::kUsage, "unsupported bit width " + std::to_string(b) + " (supported: 4, 8)"};
    }
  }
  return bits;
}

std::optional<quant::Range> parse_range(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    quant::Range range{std::stof(text.substr(0, comma)), std::stof(text.substr(comma + 1))};
    if (!(range.min <= range.max)) throw std::invalid_argument(text);
    return range;
  } catch (const std::exception&) {
    throw Failure{exit_code::kUsage, "--range expects MIN,MAX with MIN <= MAX"};
  }
}

}  // namespace

std::filesystem::path default_catalog_path() { return YAMLSMITH_DEFAULT_CATALOG; }

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generate, lint and score Ansible YAML produced by language models", "yamlsmith"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "render a prompt, complete it and validate the best YAML block");
  add_common(*generate, gen.common);
  generate->add_option("description", gen.description, "natural-language description of the playbook");
  generate->add_option("--prompt-file", gen.prompt_file, "prompt text, either laid out for the profile or a bare instruction");
  generate->add_option("--system", gen.system_text, "system text");
  generate->add_option("--input", gen.input_context, "input context");
  generate->add_option("--profile", gen.profile, "model profile (alpaca, llama2_chat, raw or a config profile)");
  generate->add_option("--replay", gen.replay, "transcript file to replay instead of calling a server");
  generate->add_option("--endpoint", gen.endpoint, "completion server (default: $YAMLSMITH_ENDPOINT, config, http://127.0.0.1:8080)");
  generate->add_option("--out", gen.out, "where to write the selected playbook (default: stdout)");
  generate->add_option("--model", gen.model, "model name; replay only returns that model's records");
  generate->add_option("--sample", gen.sample, "replay: which recording of the same prompt to return (0-based)");
  generate->add_option("--policy", gen.policy, "candidate policy")->check(CLI::IsMember({"first", "largest", "all_parseable"}));
  generate->add_option("--reserve", gen.reserve, "tokens reserved for the answer (default: profile)");
  generate->add_option("--max-new-tokens", gen.max_new_tokens, "n_predict sent to the server");
  generate->add_option("--temperature", gen.temperature, "sampling temperature")->check(CLI::NonNegativeNumber);
  generate->add_option("--timeout-ms", gen.timeout_ms, "request timeout")->check(CLI::PositiveNumber);

  CommonOptions lint_common;
  std::string lint_path;
  auto* lint = app.add_subcommand("lint", "validate a playbook file against the module catalog");
  add_common(*lint, lint_common);
  lint->add_option("path", lint_path, "playbook or task file")->required();

  CommonOptions eval_common;
  std::string corpus;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> orders;
  auto* eval = app.add_subcommand("eval", "score every recorded transcript of a corpus");
  add_common(*eval, eval_common);
  eval->add_option("corpus", corpus, "JSON Lines transcript file")->required();
  eval->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  eval->add_option("--assert-order", orders, "require composite(A) < composite(B), written A<B");

  std::size_t size = 64;
  std::uint64_t seed = 0;
  std::string bits_text = "4,8";
  std::string range_text;
  std::string bench_format = "text";
  auto* bench = app.add_subcommand("quant-bench", "round-trip error of int4/int8 quantization on a seeded matrix");
  bench->add_option("--size", size, "matrix side")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "RNG seed");
  bench->add_option("--bits", bits_text, "comma-separated bit widths (4, 8)");
  bench->add_option("--range", range_text, "static calibration range MIN,MAX (default: dynamic)");
  bench->add_option("--format", bench_format, "report format")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error, out, err);
    return code == 0 ? exit_code::kClean : exit_code::kUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, out, err);
    if (lint->parsed()) return cmd_lint(lint_common, lint_path, out);
    if (eval->parsed()) return cmd_eval(eval_common, corpus, jobs, orders, out, err);
    const auto bits = parse_bits(bits_text);
    const auto range = parse_range(range_text);
    out << quant::render_error_report(quant::quant_bench(size, seed, bits, range), bench_format == "json");
    return exit_code::kClean;
  } catch (const Failure& failure) {
    err << "yamlsmith: " << failure.message << "\n";
    return failure.code;
  } catch (const std::exception& error) {
    err << "yamlsmith: " << error.what() << "\n";
    return exit_code::kFailure;
  }
}

}  // namespace yamlsmith::cli
