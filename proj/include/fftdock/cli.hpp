#pragma once

#include <string>
#include <vector>

namespace fftdock {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 1,       // unreadable or malformed input file
  kExitConfig = 2,      // bad parameter, configuration or grid overflow
  kExitTaskFailed = 3,  // batch finished with permanently failed tasks
  kExitTransport = 4,   // master unreachable, bind failure, startup timeout
};

int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace fftdock
