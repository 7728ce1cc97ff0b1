#pragma once

#include <string>
#include <vector>

namespace blowup {

// Entry point of the blowup-lab tool. Returns the process exit code:
// 0 success, 1 numerical failure, 2 usage error.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

// Worker cap from BLOWUP_LAB_THREADS (>= 1).
unsigned worker_threads();

}  // namespace blowup
