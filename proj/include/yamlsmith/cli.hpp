#pragma once

#include <filesystem>
#include <iosfwd>

namespace yamlsmith::cli {

namespace exit_code {
inline constexpr int kClean = 0;
inline constexpr int kFailure = 1;
inline constexpr int kFindings = 2;
inline constexpr int kBudget = 3;
inline constexpr int kUsage = 64;
}  // namespace exit_code

/// Catalog shipped with the sources (data/catalog.yaml).
std::filesystem::path default_catalog_path();

/// Entry point of the `yamlsmith` binary: generate, lint, eval, quant-bench.
/// Reports go to `out`, diagnostics (and generate's findings) to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace yamlsmith::cli
