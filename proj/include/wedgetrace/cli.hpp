// SPDX-License-Identifier: Apache-2.0
#pragma once

// Command-line front end. Subcommands are registered here; each one loads its
// inputs, runs the corresponding pipeline stage and writes results atomically.
// Exit codes: 0 success, 2 configuration error, 3 computation error
// (ellipticity, rank, separation failures), 4 acceptance-suite failure in
// check mode. All failures also print one JSON diagnostic line on stderr.

namespace wedgetrace::cli {

int run(int argc, char** argv);

}  // namespace wedgetrace::cli

#include "wedgetrace/cli_impl.hpp"
