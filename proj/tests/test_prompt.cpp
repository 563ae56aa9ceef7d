#include <doctest.h>

#include <random>

#include "support.hpp"
#include "yamlsmith/prompt.hpp"

using namespace yamlsmith;
using prompt::TemplateKind;

namespace {

TemplateKind kind_of(const backend::TranscriptRecord& r) {
  return r.annexe == 4 ? TemplateKind::llama2_chat : TemplateKind::alpaca;
}

std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  static const std::string alphabet = "abcdefghij ABC\n`#:-_{}";
  std::string s(rng() % (max_len + 1), ' ');
  for (auto& c : s) c = alphabet[rng() % alphabet.size()];
  return s;
}

}  // namespace

TEST_CASE("alpaca rendering of the Annexe 3 Tir 1 request") {
  prompt::PromptSpec spec;
  spec.instruction = "Make a details plan.";
  spec.input_context = "Tasks for role_anssi_linux.";
  const auto text = prompt::render_prompt(spec, TemplateKind::alpaca);
  CHECK(text.starts_with("Below is an instruction that describes a task, paired with an input"));
  CHECK(text ==
        std::string(prompt::kAlpacaPreamble) +
            "\n\n### Instruction:\nMake a details plan.\n\n### Input:\nTasks for role_anssi_linux.\n\n### Response:");

  const auto& fixture = testing::record("annexe3.tir1");
  const auto parsed = prompt::parse_prompt(fixture.prompt, TemplateKind::alpaca);
  REQUIRE(parsed);
  CHECK(parsed->system_text.empty());
  CHECK(parsed->instruction.starts_with("Make a details plan"));
  CHECK(parsed->input_context.starts_with("Ansible Yaml file should contain"));
  CHECK(prompt::render_prompt(*parsed, TemplateKind::alpaca).starts_with(prompt::kAlpacaPreamble));
}

TEST_CASE("alpaca without input uses the short preamble and no input section") {
  prompt::PromptSpec spec;
  spec.instruction = "Do it.";
  const auto text = prompt::render_prompt(spec, TemplateKind::alpaca);
  CHECK(text.starts_with(prompt::kAlpacaPreambleNoInput));
  CHECK(text.find("### Input:") == std::string::npos);
  CHECK(text.ends_with("### Response:"));
}

TEST_CASE("llama2 rendering of the Annexe 4 request") {
  const auto& fixture = testing::record("annexe4.tir1");
  const auto spec = prompt::parse_prompt(fixture.prompt, TemplateKind::llama2_chat);
  REQUIRE(spec);
  CHECK(spec->system_text.starts_with("You are a helpful, respectful and honest assistant."));
  REQUIRE(spec->example_snippets.size() == 1);
  CHECK(spec->example_snippets[0].label ==
        "Here is an example of Ansible task in Yaml but don't include it if you don't need it:");
  CHECK(spec->example_snippets[0].code.starts_with("---\n- name: unistall unsecure packages\n"));
  CHECK(spec->response_header == "Then write this Yaml file. ");

  const auto text = prompt::render_prompt(*spec, TemplateKind::llama2_chat);
  CHECK(text.starts_with("[INST] <<SYS>>"));
  CHECK(text.ends_with("[/INST]"));
  CHECK(text == fixture.prompt);
}

TEST_CASE("llama2 omits the system block when system text is empty") {
  prompt::PromptSpec spec;
  spec.instruction = "Write a playbook.";
  CHECK(prompt::render_prompt(spec, TemplateKind::llama2_chat) == "[INST] Write a playbook. [/INST]");
}

TEST_CASE("raw rendering") {
  prompt::PromptSpec spec;
  spec.instruction = "X";
  CHECK(prompt::render_prompt(spec, TemplateKind::raw) == "X");
  spec.system_text = "S";
  spec.input_context = "I";
  spec.example_snippets = {{"ex", "a: 1\n"}};
  spec.response_header = "Go.";
  CHECK(prompt::render_prompt(spec, TemplateKind::raw) == "S\n\nX\n\nI\n\nex\n```yaml\na: 1\n```\n\nGo.");
}

TEST_CASE("examples keep insertion order and are fenced as yaml in every layout") {
  prompt::PromptSpec spec;
  spec.instruction = "Use these.";
  spec.example_snippets = {{"first", "a: 1\n"}, {"second", "b: 2\n"}, {"third", "c: 3\n"}};
  for (auto kind : {TemplateKind::alpaca, TemplateKind::llama2_chat, TemplateKind::raw}) {
    const auto text = prompt::render_prompt(spec, kind);
    const auto a = text.find("```yaml\na: 1\n```");
    const auto b = text.find("```yaml\nb: 2\n```");
    const auto c = text.find("```yaml\nc: 3\n```");
    REQUIRE(a != std::string::npos);
    CHECK(a < b);
    CHECK(b < c);
    const auto parsed = prompt::parse_prompt(text, kind);
    REQUIRE(parsed);
    if (kind == TemplateKind::raw) {
      // Raw text has no section markers; it parses back as one instruction.
      CHECK(prompt::render_prompt(*parsed, kind) == text);
    } else {
      CHECK(*parsed == spec);
    }
  }
}

TEST_CASE("empty instruction is an invalid spec") {
  prompt::PromptSpec spec;
  for (auto kind : {TemplateKind::alpaca, TemplateKind::llama2_chat, TemplateKind::raw}) {
    CHECK_THROWS_AS(prompt::render_prompt(spec, kind), prompt::InvalidSpec);
  }
}

TEST_CASE("fixture prompts re-render byte-identically from their parsed spec") {
  for (const auto& r : testing::corpus().records()) {
    CAPTURE(r.id());
    const auto spec = prompt::parse_prompt(r.prompt, kind_of(r));
    REQUIRE(spec);
    const auto rendered = prompt::render_prompt(*spec, kind_of(r));
    if (r.annexe == 1) {
      // Annexe 1 lacks the blank line before "### Input:"; it parses and
      // re-renders in canonical layout, which is then a fixed point.
      CHECK(rendered != r.prompt);
      CHECK(rendered.size() == r.prompt.size() + 1);
      const auto again = prompt::parse_prompt(rendered, kind_of(r));
      REQUIRE(again);
      CHECK(*again == *spec);
      CHECK(prompt::render_prompt(*again, kind_of(r)) == rendered);
    } else {
      CHECK(rendered == r.prompt);
    }
  }
}

TEST_CASE("parse_prompt rejects text in another layout") {
  CHECK_FALSE(prompt::parse_prompt(testing::record("annexe4.tir1").prompt, TemplateKind::alpaca));
  CHECK_FALSE(prompt::parse_prompt(testing::record("annexe5.tir1").prompt, TemplateKind::llama2_chat));
  const auto raw = prompt::parse_prompt("anything", TemplateKind::raw);
  REQUIRE(raw);
  CHECK(raw->instruction == "anything");
}

TEST_CASE("token estimate") {
  CHECK(prompt::estimate_tokens("") == 0);
  CHECK(prompt::estimate_tokens(std::string(400, 'a')) == 100);
  CHECK(prompt::estimate_tokens(std::string(401, 'a')) == 101);
  CHECK(prompt::estimate_tokens("```") == 2);
  CHECK(prompt::count_fence_markers("```yaml\na\n```") == 2);
  CHECK(prompt::count_fence_markers("``````") == 2);
}

TEST_CASE("token estimate golden for the rendered Annexe 4 prompt") {
  const auto& fixture = testing::record("annexe4.tir2");
  const auto spec = prompt::parse_prompt(fixture.prompt, TemplateKind::llama2_chat);
  REQUIRE(spec);
  const auto text = prompt::render_prompt(*spec, TemplateKind::llama2_chat);
  // 1174 bytes -> 294, plus two fence markers (tests/oracles/token_oracle.py).
  CHECK(text.size() == 1174);
  CHECK(prompt::estimate_tokens(text) == 296);
}

TEST_CASE("budget arithmetic") {
  const auto over = prompt::budget_for(3000, 4096, 2000);
  CHECK_FALSE(over.fits);
  CHECK(over.overflow == 904);
  const auto under = prompt::budget_for(100, 4096, 512);
  CHECK(under.fits);
  CHECK(under.overflow == 0);
  CHECK(prompt::budget_for(100, 200, 100).fits);
  CHECK_FALSE(prompt::budget_for(101, 200, 100).fits);
}

TEST_CASE("Annexe 1 prompt against a 512-token window with 256 reserved") {
  const prompt::ModelProfile small{"small", TemplateKind::alpaca, 512, 256, {}};
  const auto& text = testing::record("annexe1.tir1").prompt;
  const auto report = prompt::check_budget(text, small, 256);
  CHECK(report.prompt_tokens == 222);
  CHECK(report.prompt_tokens == prompt::estimate_tokens(text));
  CHECK(report.fits == (report.prompt_tokens + 256 <= 512));
  CHECK(report.fits);
}

TEST_CASE("builtin profiles") {
  const auto llama = prompt::find_builtin_profile("llama2_chat");
  REQUIRE(llama);
  CHECK(llama->context_window == 4096);
  CHECK(llama->template_kind == TemplateKind::llama2_chat);
  for (const auto& profile : prompt::builtin_profiles()) CHECK_NOTHROW(prompt::validate_profile(profile));
  CHECK_FALSE(prompt::find_builtin_profile("nope"));
  CHECK_THROWS_AS(prompt::validate_profile({"bad", TemplateKind::raw, 0, 0, {}}), prompt::InvalidProfile);
  CHECK_THROWS_AS(prompt::validate_profile({"bad", TemplateKind::raw, 100, 100, {}}), prompt::InvalidProfile);
  CHECK(prompt::parse_template_kind("alpaca") == TemplateKind::alpaca);
  CHECK_THROWS(prompt::parse_template_kind("chatml"));
}

TEST_CASE("property: rendering is injective in the instruction") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    prompt::PromptSpec a;
    prompt::PromptSpec b;
    a.instruction = "i" + random_text(rng, 30);
    b.instruction = "i" + random_text(rng, 30);
    if (a.instruction == b.instruction) continue;
    for (auto kind : {TemplateKind::alpaca, TemplateKind::llama2_chat, TemplateKind::raw}) {
      CHECK(prompt::render_prompt(a, kind) != prompt::render_prompt(b, kind));
    }
  }
}

TEST_CASE("property: estimate is monotone under concatenation, fits is antitone") {
  std::mt19937_64 rng(12);
  const prompt::ModelProfile profile{"p", TemplateKind::raw, 64, 8, {}};
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_text(rng, 120);
    const auto b = random_text(rng, 120);
    REQUIRE(prompt::estimate_tokens(a + b) >= prompt::estimate_tokens(a));
    const std::size_t r1 = rng() % 64;
    const std::size_t r2 = r1 + rng() % 64;
    if (prompt::check_budget(a, profile, r2).fits) REQUIRE(prompt::check_budget(a, profile, r1).fits);
    if (prompt::check_budget(a + b, profile, r1).fits) REQUIRE(prompt::check_budget(a, profile, r1).fits);
  }
}

TEST_CASE("rendering is deterministic") {
  const auto spec = prompt::parse_prompt(testing::record("annexe5.tir1").prompt, TemplateKind::alpaca);
  REQUIRE(spec);
  CHECK(prompt::render_prompt(*spec, TemplateKind::alpaca) == prompt::render_prompt(*spec, TemplateKind::alpaca));
}
