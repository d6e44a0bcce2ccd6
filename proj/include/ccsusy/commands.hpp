#pragma once

#include <string>
#include <vector>

#include "ccsusy/config.hpp"

namespace ccsusy {

struct CommandOptions {
  std::string out_dir;         // overrides outputs.directory when non-empty
  std::string format;          // overrides outputs.formats when non-empty
  std::string file_prefix;     // prepended to every output file name
};

struct CommandOutcome {
  int exit_code = 0;
  std::vector<std::string> files;
  std::string message;
};

/// Exit codes shared by all commands: 0 ok, 2 validation error,
/// 3 verification failure, 4 singular parametrization.
CommandOutcome run_potential(const RunConfig& cfg, const CommandOptions& opts = {});
CommandOutcome run_smatrix(const RunConfig& cfg, const CommandOptions& opts = {});
CommandOutcome run_boundstates(const RunConfig& cfg, const CommandOptions& opts = {});
CommandOutcome run_verify(const RunConfig& cfg, const CommandOptions& opts = {});
CommandOutcome run_figdata(const std::string& preset_name, const CommandOptions& opts = {});

/// 17-significant-digit, locale-independent float formatting used for every
/// numeric table cell; the output byte contract.
std::string format_double(double v);

}  // namespace ccsusy
