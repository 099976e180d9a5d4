#include <cstdlib>
#include <iostream>
#include <string>

#include "cgm/parallel.hpp"
#include "cgm/suites.hpp"

// One PASS/FAIL line per criterion; per-check detail goes to stderr.
// Optional arguments: criterion ids to run (default all).
int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::stoi(argv[i]));
  if (ids.empty())
    for (int i = 1; i <= 13; ++i) ids.push_back(i);
  bool all = true;
  for (int id : ids) {
    const auto o = cgm::run_criterion(id, cgm::kAcceptanceSeed, cgm::default_threads());
    std::cout << cgm::format_outcome(o) << std::endl;
    for (const auto& r : o.runs)
      for (const auto& c : r.checks)
        std::cerr << "  [" << id << "] seed " << c.report.seed << " " << (c.report.pass ? "ok  " : "FAIL") << " "
                  << c.report.name << " " << c.report.statistic << " <= " << c.report.threshold << " (n=" << c.report.n
                  << (c.statistical ? "" : ", exact") << ")\n";
    all = all && o.pass;
  }
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
