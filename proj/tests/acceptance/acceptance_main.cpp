// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Usage: acceptance [--criterion N]... [--report PATH]
// Exit status is nonzero when any selected criterion fails.

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <vector>

#include "qgle/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  const char* report = nullptr;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      ids.push_back(std::atoi(argv[++i]));
    } else if (std::strcmp(argv[i], "--report") == 0 && i + 1 < argc) {
      report = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--criterion N]... [--report PATH]\n";
      return 2;
    }
  }
  if (ids.empty())
    for (int id = 1; id <= static_cast<int>(qgle::acceptance_criteria().size()); ++id) ids.push_back(id);

  std::vector<qgle::CriterionResult> results;
  bool ok = true;
  for (int id : ids) {
    results.push_back(qgle::run_criterion(id));
    const auto& r = results.back();
    std::cout << qgle::format_line(r) << " [" << r.seconds << " s]" << std::endl;
    ok = ok && r.passed;
  }
  if (report) std::ofstream(report) << qgle::format_report(results);
  return ok ? 0 : 1;
}
