#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace smolu::tools {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitFailed = 2 };

struct CommandOptions {
  std::optional<std::string> out_dir;  // overrides output.dir
  std::optional<int> dump_every;       // overrides output.dump_every
};

// Writes via a temporary file in the same directory and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

int cmd_solve(const RunConfig& config, const CommandOptions& opt, std::ostream& log);
int cmd_sweep(const RunConfig& config, const CommandOptions& opt, std::ostream& log);
int cmd_dual(const RunConfig& config, const CommandOptions& opt, std::ostream& log);
int cmd_verify(const RunConfig& config, std::ostream& log);

}  // namespace smolu::tools
