#pragma once

#include <ostream>

namespace vsa::cli {

// Process exit statuses.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kArgumentError = 2,
  kValidationError = 3,
  kFault = 4,          // SRAM capacity fault or fixed-point overflow
  kVerifyMismatch = 5,
  kIoError = 6,        // unreadable file, bad bundle
};

// Entry point of the vsa tool: run, traffic, bench and gen subcommands.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vsa::cli
