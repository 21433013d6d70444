#pragma once

// Command-line front end. Every subcommand reads a single JSON config file,
// validates it against a fixed schema (unknown keys are rejected) and writes a
// CSV or JSON table.
//
// Exit codes: 0 success, 1 numerical-invariant violation, 2 usage or config
// error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nonlocal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitUsage = 2;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { csv, json };

using Seed = std::optional<std::uint64_t>;

// Each subcommand takes the config as JSON text and returns the rendered
// table. A seed given here overrides the config's "seed" key. Warnings go to
// `log`, filtered by NONLOCAL_LOG={error|info|debug}.
std::string cmd_correlations(const std::string& config, Seed seed, Format format);
std::string cmd_estimate_phase(const std::string& config, Seed seed, Format format);
std::string cmd_nosignal(const std::string& config, Seed seed, Format format,
                         std::ostream& log);
std::string cmd_causality(const std::string& config, Format format);
std::string cmd_rotation_fidelity(const std::string& config, Format format,
                                  std::ostream& log);

/// Full argv entry point. Output goes to --out when given, else to `out`;
/// diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nonlocal::cli
