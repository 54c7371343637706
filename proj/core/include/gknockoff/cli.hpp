#pragma once

#include "gknockoff/common.hpp"

#include <optional>
#include <string>

namespace gk::cli {

struct CommandArgs {
  std::string config_path;
  std::string data_path;  // detect / screen only
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> threads_override;
};

// Exit codes: 0 success, 2 config/schema problem, 3 numerical failure,
// 4 routing impossibility. Errors are reported on stderr.
int cmd_simulate(const CommandArgs& args);
int cmd_detect(const CommandArgs& args);
int cmd_screen(const CommandArgs& args);

int exit_code_for(ErrorKind kind);

}  // namespace gk::cli
