#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "yamlsmith/extract.hpp"
#include "yamlsmith/prompt.hpp"
#include "yamlsmith/score.hpp"

namespace yamlsmith::cli {

inline constexpr std::string_view kConfigEnv = "YAMLSMITH_CONFIG";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Settings shared by all commands. Every field has a default, so an empty
/// config file is valid.
struct Config {
  std::optional<std::string> endpoint;  // unset: env, then built-in default
  std::string profile = "llama2_chat";
  std::optional<std::filesystem::path> catalog_path;  // unset: shipped catalog
  extract::Policy candidate_policy = extract::Policy::largest;
  score::Weights composite_weights;
  double echo_threshold = extract::kEchoThreshold;
  double temperature = 0.2;
  std::size_t max_new_tokens = 512;
  std::vector<prompt::ModelProfile> profiles;  // override built-ins by name
};

/// Weights sum to 1 within 1e-9, threshold in (0, 1], profiles valid.
void validate_config(const Config& config);

/// Single YAML mapping with the Config field names; `profiles` is a list of
/// {name, template_kind, context_window, default_reserve_output,
/// stop_markers}. Relative catalog paths resolve against `base_dir`.
Config parse_config(std::string_view text, std::string_view source,
                    const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

/// Config profiles first, then built-ins.
std::optional<prompt::ModelProfile> find_profile(const Config& config, std::string_view name);

}  // namespace yamlsmith::cli
