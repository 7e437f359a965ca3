// SPDX-License-Identifier: Apache-2.0
// Standalone acceptance battery.  Prints one line per criterion and exits
// nonzero if any criterion fails, so ctest reports the suite as a whole.
#include <iostream>

#include "wedgetrace/checks.hpp"

int main() {
  const auto results = wedgetrace::run_acceptance_suite(0);
  const bool ok = wedgetrace::report_suite(results, std::cout);
  return ok ? 0 : 1;
}
