#pragma once

#include "aia/config.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace aia {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitDivergence = 4,
};

struct CommandResult {
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> errors;  // per-item problems that did not stop the run
};

CommandResult cmd_synth(const RunConfig& config, std::ostream& log);
CommandResult cmd_extract(const RunConfig& config, std::ostream& log);
CommandResult cmd_weights(const RunConfig& config, std::ostream& log);
CommandResult cmd_train(const RunConfig& config, std::ostream& log);
CommandResult cmd_annotate(const RunConfig& config, std::ostream& log);
CommandResult cmd_eval(const RunConfig& config, std::ostream& log);

/// Entry point shared by the CLI binary and the tests: `aia <command> [--config f] [--key value ...]`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aia
