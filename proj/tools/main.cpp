// SPDX-License-Identifier: Apache-2.0
#include "wedgetrace/cli.hpp"

int main(int argc, char** argv) { return wedgetrace::cli::run(argc, argv); }
