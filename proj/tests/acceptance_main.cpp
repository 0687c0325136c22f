// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. `--profile quick` scales the sample sizes down for fast CI loops.

#include <cstdint>
#include <cstring>
#include <iostream>
#include <string>

#include "wickmart/acceptance.hpp"

int main(int argc, char** argv) {
  std::string profile = "full";
  std::uint64_t seed = 7;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--profile") == 0 && i + 1 < argc) {
      profile = argv[++i];
    } else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      seed = std::stoull(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--profile quick|full] [--seed N]\n";
      return 1;
    }
  }
  try {
    const auto results =
        wickmart::run_acceptance(wickmart::profile_from_string(profile), seed, std::cout);
    const bool ok = wickmart::all_passed(results);
    std::cout << (ok ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED") << "\n";
    return ok ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "acceptance aborted: " << e.what() << "\n";
    return 2;
  }
}
