#ifndef WICKMART_ACCEPTANCE_HPP
#define WICKMART_ACCEPTANCE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace wickmart {

enum class Profile { Quick, Full };

Profile profile_from_string(const std::string& name);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

// Runs the verification suite, one entry per criterion, printing a PASS/FAIL
// line per criterion to `log` as results arrive. Quick profile scales the
// sample counts down by ~100x for CI runs.
std::vector<CriterionResult> run_acceptance(Profile profile, std::uint64_t seed, std::ostream& log);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace wickmart

#endif
