// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

// Runs the acceptance criteria and prints one line per criterion:
//   [PASS] 3 design structure: ... (1.2 s)
// Exit status is nonzero when any selected criterion fails.
//
// Usage: agc_acceptance [--only ID] [--seed N] [--zero-phi] [--verbose]
// --zero-phi replaces the quantizer variance coefficient with 0 in designs and
// bounds; criterion 4 is expected to fail under it.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "agc/error.hpp"
#include "agc/verify.hpp"

namespace {

int usage() {
  std::cerr << "usage: agc_acceptance [--only ID] [--seed N] [--zero-phi] [--verbose]\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> ids = agc::check_ids();
  agc::VerifyOptions opt;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--only" && a + 1 < argc) {
      ids = {std::atoi(argv[++a])};
    } else if (arg == "--seed" && a + 1 < argc) {
      opt.seed = std::strtoull(argv[++a], nullptr, 10);
    } else if (arg == "--zero-phi") {
      opt.phi_override = [](int, std::size_t) { return 0.0; };
    } else if (arg == "--verbose") {
      opt.log = [](const std::string& line) { std::cerr << "  " << line << "\n"; };
    } else {
      return usage();
    }
  }

  int failed = 0;
  for (int id : ids) {
    try {
      const auto r = agc::run_check(id, opt);
      std::printf("[%s] %d %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.measured.c_str(), r.seconds);
      if (!r.pass) ++failed;
    } catch (const agc::Error& e) {
      std::printf("[FAIL] %d error: %s\n", id, e.what());
      ++failed;
    }
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", ids.size(), failed);
  return failed == 0 ? 0 : 1;
}
