#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cgm/suites.hpp"

namespace cgm {

namespace {

struct Criterion {
  const char* title;
  double budget_seconds;
  std::function<void(SuiteResult&, unsigned)> run;
};

const std::vector<double> kRates{1.5, 2.0, 4.0};

// Edges sharing a far corner share one random effective direction, so windows stay narrow:
// 1000 windows x 2 edges = 2000 edges per rho.
constexpr std::size_t kEdgeWidth = 2;
constexpr std::size_t kEdgeWindows = 1000;

const Criterion& criterion(int id) {
  static const std::vector<Criterion> all{
      {"LPP oracle equivalence", 5.0, [](SuiteResult& r, unsigned) { lpp_oracle_block(r, 100, 6); }},
      {"queueing identities", 10.0, [](SuiteResult& r, unsigned) { queue_identity_block(r, 200, 1000); }},
      {"strip last-passage formulas", 5.0, [](SuiteResult& r, unsigned) { strip_block(r, 100, 1000); }},
      {"multiline invariance", 30.0, [](SuiteResult& r, unsigned) { multiline_block(r, kRates, 100000); }},
      {"coupled invariance", 60.0,
       [](SuiteResult& r, unsigned t) { coupled_block(r, t, kRates, 100000, 0.2); }},
      {"Busemann marginals and doubling probe", 180.0,
       [](SuiteResult& r, unsigned t) {
         const auto d = busemann_marginal_block(r, t, kRates, 1500, kEdgeWindows, kEdgeWidth, 0.04);
         busemann_probe_block(r, t, kRates, 1500, kEdgeWindows, kEdgeWidth, d);
       }},
      {"increment atom and tail", 30.0,
       [](SuiteResult& r, unsigned t) { increment_atom_block(r, t, 1.5, 3.0, 100000); }},
      {"geodesic initial run length", 180.0,
       [](SuiteResult& r, unsigned t) {
         run_length_block(r, t, 2.0, 800, 500, 20);
         run_pmf_block(r);
       }},
      {"rho* law", 120.0, [](SuiteResult& r, unsigned t) { rho_star_block(r, t, {1.25, 2.0, 4.0}, 1000, 2000, 0.03); }},
      {"Poisson competition", 30.0, [](SuiteResult& r, unsigned) { poisson_block(r, 1000000); }},
      {"X-process", 30.0, [](SuiteResult& r, unsigned) { x_process_block(r, 100000); }},
      {"Catalan identities", 1.0, [](SuiteResult& r, unsigned) { catalan_block(r); }},
      {"shape trend", 120.0, [](SuiteResult& r, unsigned t) { shape_block(r, t, 1500, 20, 3.8, 4.05); }},
  };
  if (id < 1 || id > static_cast<int>(all.size())) throw std::out_of_range("run_criterion: no such criterion");
  return all[static_cast<std::size_t>(id - 1)];
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string describe(const SuiteResult& r) {
  std::size_t passed = 0;
  const Check* worst = nullptr;
  double worst_ratio = -1.0;
  for (const auto& c : r.checks) {
    if (c.report.pass) ++passed;
    const double ratio = c.report.threshold > 0.0 ? c.report.statistic / c.report.threshold
                                                  : (c.report.pass ? 0.0 : 1e300);
    if (!worst || ratio > worst_ratio || (!c.report.pass && worst->report.pass)) {
      worst = &c;
      worst_ratio = ratio;
    }
  }
  std::ostringstream os;
  os << passed << "/" << r.checks.size() << " checks";
  if (worst) {
    os.precision(4);
    os << "; closest: " << worst->report.name << " " << worst->report.statistic << " vs " << worst->report.threshold;
  }
  return os.str();
}

}  // namespace

// A criterion holds few tests, so it passes when every exact check passes and some seed among
// the master and two derived seeds passes every statistical check. Each attempt must finish
// within the runtime budget.
CriterionOutcome run_criterion(int id, std::uint64_t master_seed, unsigned threads) {
  const Criterion& c = criterion(id);
  CriterionOutcome out;
  out.id = id;
  out.title = c.title;
  out.budget_seconds = c.budget_seconds;
  const auto t0 = std::chrono::steady_clock::now();
  bool passed = false;
  for (std::uint64_t i = 0; i < 3 && !passed; ++i) {
    const auto a0 = std::chrono::steady_clock::now();
    SuiteResult r;
    r.name = "criterion-" + std::to_string(id);
    r.seed = derived_seed(master_seed, i);
    c.run(r, threads);
    out.attempt_seconds =
        std::max(out.attempt_seconds, std::chrono::duration<double>(std::chrono::steady_clock::now() - a0).count());
    out.seed_used = r.seed;
    out.seeds_tried = i + 1;
    out.summary = describe(r);
    out.warnings.insert(out.warnings.end(), r.warnings.begin(), r.warnings.end());
    const bool exact = r.exact_pass();
    passed = r.all_pass();
    const bool has_statistical = std::any_of(r.checks.begin(), r.checks.end(), [](const Check& k) { return k.statistical; });
    out.runs.push_back(std::move(r));
    if (!exact || !has_statistical) break;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.pass = passed && out.attempt_seconds <= out.budget_seconds;
  if (passed && !out.pass) out.summary += "; over runtime budget";
  return out;
}

std::string format_outcome(const CriterionOutcome& c) {
  std::ostringstream os;
  os << (c.pass ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.title << " [" << fixed(c.attempt_seconds, 1) << " s / "
     << fixed(c.budget_seconds, 0) << " s per seed, " << fixed(c.seconds, 1) << " s total, seed " << c.seed_used << ", " << c.seeds_tried
     << (c.seeds_tried == 1 ? " seed" : " seeds") << "] " << c.summary;
  for (const auto& w : c.warnings) os << "; warning: " << w;
  return os.str();
}

}  // namespace cgm
