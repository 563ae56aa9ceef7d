#include <doctest.h>

#include <map>
#include <random>

#include <json.hpp>

#include "support.hpp"
#include "yamlsmith/catalog.hpp"
#include "yamlsmith/score.hpp"

using namespace yamlsmith;

namespace {

const validate::SchemaCatalog& shipped() {
  static const auto catalog = validate::load_catalog(testing::data_path("catalog.yaml"));
  return catalog;
}

const score::EvalTable& table() {
  static const auto t = score::run_eval(testing::corpus(), shipped());
  return t;
}

backend::ModelResponse response_of(std::string text, backend::FinishReason reason = backend::FinishReason::stop) {
  backend::ModelResponse r;
  r.text = std::move(text);
  r.finish_reason = reason;
  return r;
}

}  // namespace

TEST_CASE("frozen fixture composites") {
  // Hand-computed from the findings counts with the default weights.
  const std::map<std::string, double> expected = {
      {"annexe3.tir1", 0.6}, {"annexe3.tir2", 0.6}, {"annexe4.tir1", 0.5}, {"annexe5.tir1", 0.5},
      {"annexe4.tir2", 0.2}, {"annexe4.tir3", 0.2}, {"annexe1.tir1", 0.0}, {"annexe2.tir1", 0.0},
  };
  REQUIRE(table().rows.size() == 8);
  for (const auto& row : table().rows) {
    CAPTURE(row.fixture);
    CHECK(row.card.composite == doctest::Approx(expected.at(row.fixture)).epsilon(1e-12));
  }
  CHECK(table().rows.front().fixture == "annexe3.tir1");
  CHECK(table().rows.back().fixture == "annexe2.tir1");
  CHECK(table().catalog_version == shipped().version());
}

TEST_CASE("fixture cards") {
  const auto& a1 = score::find_row(table(), "annexe1").card;
  CHECK_FALSE(a1.extraction_success);
  CHECK(a1.composite == 0.0);

  const auto& a4t1 = score::find_row(table(), "annexe4.tir1").card;
  CHECK(a4t1.parse_success);
  CHECK(a4t1.tasks == 7);
  CHECK(a4t1.module_errors == 8);
  CHECK(a4t1.echo_flag);

  const auto& a4t2 = score::find_row(table(), "annexe4.tir2").card;
  CHECK(a4t2.extraction_success);
  CHECK_FALSE(a4t2.parse_success);
  CHECK(a4t2.structure_errors == 1);

  const auto& a5 = score::find_row(table(), "annexe5").card;
  CHECK(a5.echo_flag);
  CHECK(a5.module_errors == 1);

  const auto& a3t2 = score::find_row(table(), "annexe3.tir2").card;
  CHECK(a3t2.structure_errors == 1);  // NOT_A_PLAYBOOK
  CHECK(a3t2.module_errors == 6);
}

TEST_CASE("7B model scores below every Annexe 4 and Annexe 5 fixture") {
  const double a1 = score::find_row(table(), "annexe1").card.composite;
  CHECK(a1 == 0.0);
  for (const auto& row : table().rows) {
    if (row.fixture.starts_with("annexe4") || row.fixture.starts_with("annexe5")) {
      CAPTURE(row.fixture);
      CHECK(a1 < row.card.composite);
    }
  }
}

TEST_CASE("composite edge cases") {
  CHECK(score::score_candidate("", response_of(""), shipped()).composite == 0.0);
  CHECK_FALSE(score::score_candidate("", response_of("just prose"), shipped()).extraction_success);

  const std::string perfect = "```yaml\n- name: ok\n  ansible.builtin.ping:\n```\n";
  const auto card = score::score_candidate("no examples here", response_of(perfect), shipped());
  CHECK(card.extraction_success);
  CHECK(card.parse_success);
  CHECK(card.tasks == 1);
  CHECK(card.composite == doctest::Approx(1.0));

  const auto errored =
      score::score_candidate("no examples here", response_of(perfect, backend::FinishReason::error), shipped());
  CHECK_FALSE(errored.extraction_success);
  CHECK(errored.composite == 0.0);

  // Truncated output is still scored.
  CHECK(score::score_candidate("", response_of(perfect, backend::FinishReason::length), shipped()).composite ==
        doctest::Approx(1.0));
}

TEST_CASE("composite formula") {
  score::ScoreCard card;
  card.extraction_success = true;
  card.parse_success = true;
  card.tasks = 4;
  card.module_errors = 1;
  card.structure_errors = 1;
  card.warnings = 2;
  const score::Weights w;
  CHECK(score::composite(card, w) == doctest::Approx(0.3 + 0.4 * 0.5 + 0.2 * 0.5 + 0.1));
  card.echo_flag = true;
  CHECK(score::composite(card, w) == doctest::Approx(0.3 + 0.4 * 0.5 + 0.2 * 0.5));
  card.tasks = 0;  // floored at 1
  CHECK(score::composite(card, w) == doctest::Approx(0.3));
  card.extraction_success = false;
  CHECK(score::composite(card, w) == 0.0);

  CHECK_NOTHROW(score::validate_weights({0.25, 0.25, 0.25, 0.25}));
  CHECK_THROWS_AS(score::validate_weights({0.5, 0.5, 0.5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(score::validate_weights({1.2, -0.2, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("property: composite stays in [0,1] and falls with more errors") {
  std::mt19937_64 rng(31);
  const score::Weights w;
  for (int i = 0; i < 10000; ++i) {
    score::ScoreCard card;
    card.extraction_success = rng() % 4 != 0;
    card.parse_success = rng() % 2 == 0;
    card.tasks = rng() % 10;
    card.structure_errors = rng() % 5;
    card.module_errors = rng() % 5;
    card.warnings = rng() % 5;
    card.echo_flag = rng() % 2 == 0;
    const double c = score::composite(card, w);
    REQUIRE(c >= 0.0);
    REQUIRE(c <= 1.0);
    auto worse = card;
    worse.module_errors += 1 + rng() % 3;
    REQUIRE(score::composite(worse, w) <= c);
    worse = card;
    worse.warnings += 1;
    REQUIRE(score::composite(worse, w) <= c);
  }
}

TEST_CASE("eval is independent of the worker count") {
  const auto json1 = score::render_report(score::run_eval(testing::corpus(), shipped(), {}, 1), score::ReportFormat::json);
  for (unsigned jobs : {2u, 3u, 8u, 32u}) {
    CAPTURE(jobs);
    CHECK(score::render_report(score::run_eval(testing::corpus(), shipped(), {}, jobs), score::ReportFormat::json) ==
          json1);
  }
  CHECK(score::render_report(score::run_eval(testing::corpus(), shipped(), {}, 0), score::ReportFormat::json) == json1);
}

TEST_CASE("report formats") {
  const auto json = nlohmann::json::parse(score::render_report(table(), score::ReportFormat::json));
  REQUIRE(json["rows"].size() == 8);
  CHECK(json["rows"][0]["fixture"] == "annexe3.tir1");
  CHECK(json["rows"][0]["model"] == "alpaca-13b");
  CHECK(json["rows"][0]["card"]["composite"] == 0.6);
  CHECK(json["catalog_version"] == shipped().version());

  const auto text = score::render_report(table(), score::ReportFormat::text);
  CHECK(text.find("0.600") != std::string::npos);
  CHECK(text.find("0.000") != std::string::npos);
  CHECK(text.find("catalog: " + shipped().version()) != std::string::npos);

  CHECK(score::parse_report_format("json") == score::ReportFormat::json);
  CHECK_FALSE(score::parse_report_format("xml"));
}

TEST_CASE("eval errors") {
  const backend::TranscriptStore empty;
  CHECK_THROWS_AS(score::run_eval(empty, shipped()), score::EvalError);
}

TEST_CASE("order assertions") {
  const auto a = score::parse_order_assertion("annexe1<annexe4.tir2");
  REQUIRE(a);
  CHECK(a->lhs == "annexe1");
  CHECK(a->rhs == "annexe4.tir2");
  CHECK(score::check_order(table(), *a));
  CHECK(score::check_order(table(), {"annexe1", "annexe5"}));
  CHECK_FALSE(score::check_order(table(), {"annexe5", "annexe1"}));
  CHECK_FALSE(score::check_order(table(), {"annexe1", "annexe2"}));  // equal is not less

  CHECK_FALSE(score::parse_order_assertion("annexe1"));
  CHECK_FALSE(score::parse_order_assertion("<annexe1"));
  CHECK_FALSE(score::parse_order_assertion("annexe1<"));
  CHECK_THROWS_AS(score::check_order(table(), {"annexe4", "annexe1"}), score::EvalError);  // three records
  CHECK_THROWS_AS(score::check_order(table(), {"annexe9", "annexe1"}), score::EvalError);
}
