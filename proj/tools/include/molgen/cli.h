//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_CLI_H_
#define MOLGEN_CLI_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace molgen::cli {
/// Runs one subcommand. `args` excludes the program name. Errors are
/// reported on `err` as one JSON line and yield a nonzero status.
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);
int run(int argc, const char *const *argv);

// Applies the MOLGEN_OUTPUT_ROOT prefix to relative output directories.
std::filesystem::path resolve_output_dir(const std::filesystem::path &dir);
}  // namespace molgen::cli

#endif  // MOLGEN_CLI_H_
