//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/cli.h"

int main(int argc, char **argv) {
  return molgen::cli::run(argc, argv);
}
