#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cgm/io.hpp"
#include "cgm/lpp.hpp"
#include "cgm/multiclass.hpp"
#include "cgm/parallel.hpp"
#include "cgm/rng.hpp"
#include "cgm/suites.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::vector<double> parse_rates(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw usage_error("rates: cannot parse '" + item + "'");
    }
    if (used != item.size()) throw usage_error("rates: cannot parse '" + item + "'");
    out.push_back(v);
  }
  return out;
}

struct Params {
  cgm::SuiteOptions suite;
  std::string rates = "1.5,2,4";
  std::string config;
  std::string out;
  bool force = false;
  std::int64_t n = 100;
  std::size_t length = 10000;
  std::vector<int> criteria;
};

void add_options(CLI::App& app, Params& p) {
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", p.config, "flat key=value file; flags win")->check(CLI::ExistingFile);
  app.add_option("--seed", p.suite.seed, "master seed")->envname("CGM_SEED");
  app.add_option("--threads", p.suite.threads, "worker threads (0 = hardware)");
  app.add_option("--out", p.out, "output directory; without it reports go to stdout");
  app.add_flag("--force", p.force, "overwrite existing outputs");
  app.add_option("--window", p.suite.window, "queue window length");
  app.add_option("--instances", p.suite.instances, "random queue instances");
  app.add_option("--samples", p.suite.samples, "statistical sample size");
  app.add_option("--lattice", p.suite.lattice, "lattice size N");
  app.add_option("--rates", p.rates, "comma-separated rates, each > 1");
  app.add_option("--lambda", p.suite.lambda, "lower rate lambda");
  app.add_option("--rho", p.suite.rho, "upper rate rho");
  app.add_option("--sites", p.suite.sites, "sites or window edges");
  app.add_option("--burn-in", p.suite.burn_in, "burn-in fraction");
  app.add_option("--n", p.n, "simulate-lpp square side");
  app.add_option("--length", p.length, "sample-mu window length");
  app.add_option("--criteria", p.criteria, "acceptance criteria to run (default all)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->delimiter(',');
}

// Config entries become leading --key=value tokens, so later command-line flags win.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot read config " + path);
  std::vector<std::string> tokens;
  for (const auto& [k, v] : cgm::parse_key_values(in)) {
    if (k == "config") throw usage_error("config: nested config is not allowed");
    tokens.push_back("--" + k + "=" + v);
  }
  return tokens;
}

void emit_reports(std::ostream& out, const std::vector<cgm::SuiteResult>& runs) {
  for (const auto& r : runs)
    for (const auto& t : r.reports()) cgm::write_report_line(out, t);
}

struct Outputs {
  fs::path dir;
  bool force = false;
  bool enabled() const { return !dir.empty(); }
  // Fails before any computation if a target exists.
  void claim(const std::vector<std::string>& names) const {
    if (!enabled() || force) return;
    for (const auto& n : names)
      if (fs::exists(dir / n)) throw cgm::output_exists_error("refusing to overwrite " + (dir / n).string() + " (use --force)");
  }
  std::ofstream open(const std::string& name) const { return cgm::open_output(dir / name, force); }
};

int finish_suite(const cgm::PolicyRun& pr, const Outputs& o, const std::string& name) {
  if (o.enabled()) {
    auto f = o.open("reports.jsonl");
    emit_reports(f, pr.runs);
    const auto& best = pr.runs[pr.verdict.best_seed < pr.runs.size() ? pr.verdict.best_seed : 0];
    if (best.edges) {
      auto e = o.open("edges.csv");
      cgm::write_edges_csv(e, *best.edges);
    }
    if (!best.paths.empty()) {
      auto g = o.open("geodesics.csv");
      cgm::write_geodesics_csv(g, best.paths);
    }
    if (!best.pmf_exact.empty()) {
      auto p = o.open("run_pmf.csv");
      cgm::write_pmf_csv(p, best.pmf_empirical, best.pmf_exact);
    }
  } else {
    emit_reports(std::cout, pr.runs);
  }
  std::cerr << name << ": " << (pr.pass ? "PASS" : "FAIL") << " (seeds tried " << pr.runs.size() << "; pass fractions";
  for (double f : pr.verdict.pass_fraction) std::cerr << ' ' << f;
  std::cerr << ")\n";
  for (const auto& r : pr.runs)
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return pr.pass ? kExitPass : kExitFail;
}

int simulate_lpp(const Params& p, const Outputs& o) {
  if (p.n < 2) throw usage_error("n: needs at least 2");
  const auto side = static_cast<std::size_t>(p.n);
  const auto w = cgm::sample_exp_field({0, 0}, side, side, 1.0, {p.suite.seed, "simulate-lpp", 0});
  const auto g = cgm::lpp_grid(w, {0, 0});
  if (!o.enabled()) {
    cgm::write_gtable_csv(std::cout, g);
    return kExitPass;
  }
  auto gf = o.open("gtable.csv");
  cgm::write_gtable_csv(gf, g);
  // Point-to-point geodesic tree rooted at the origin, one path per top-row and right-column point.
  std::vector<cgm::GeodesicPath> tree;
  const std::int64_t m = p.n - 1;
  for (std::int64_t k = 0; k <= m; ++k) tree.push_back(cgm::backtrack_geodesic(g, {k, m}));
  for (std::int64_t t = 0; t < m; ++t) tree.push_back(cgm::backtrack_geodesic(g, {m, t}));
  auto tf = o.open("geodesics.csv");
  cgm::write_geodesics_csv(tf, tree);
  auto cf = o.open("interface.csv");
  cgm::write_geodesics_csv(cf, {cgm::competition_interface(w, {m, m}, static_cast<std::size_t>(2 * m))});
  return kExitPass;
}

int sample_mu(const Params& p, const Outputs& o) {
  if (p.length == 0) throw usage_error("length: needs at least 1");
  const auto mu = cgm::sample_mu_rho(p.suite.rates, {0, p.length, p.suite.burn_in}, {p.suite.seed, "sample-mu", 0});
  if (!o.enabled()) {
    cgm::write_multiconfig_csv(std::cout, mu);
    return kExitPass;
  }
  auto f = o.open("mu.csv");
  cgm::write_multiconfig_csv(f, mu);
  auto m = o.open("mu.meta");
  cgm::write_multiconfig_meta(m, mu);
  return kExitPass;
}

int acceptance(const Params& p, bool seed_given, const Outputs& o) {
  std::vector<int> ids = p.criteria;
  if (ids.empty())
    for (int i = 1; i <= 13; ++i) ids.push_back(i);
  for (int id : ids)
    if (id < 1 || id > 13) throw usage_error("criteria: ids lie in 1..13");
  const std::uint64_t seed = seed_given ? p.suite.seed : cgm::kAcceptanceSeed;
  std::ofstream reports;
  if (o.enabled()) reports = o.open("reports.jsonl");
  bool all = true;
  for (int id : ids) {
    const auto c = cgm::run_criterion(id, seed, p.suite.threads);
    std::cout << cgm::format_outcome(c) << std::endl;
    if (o.enabled()) emit_reports(reports, c.runs);
    all = all && c.pass;
  }
  return all ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corner growth model verification suites"};
  app.set_version_flag("--version", std::string("cgm ") + CGM_VERSION);
  app.require_subcommand(1);
  Params p;
  add_options(app, p);

  std::map<std::string, std::function<cgm::SuiteResult(const cgm::SuiteOptions&)>> suites{
      {"verify-queueing", cgm::verify_queueing},   {"verify-multiline", cgm::verify_multiline},
      {"verify-coupled", cgm::verify_coupled},     {"verify-busemann", cgm::verify_busemann},
      {"verify-geodesics", cgm::verify_geodesics}, {"verify-exact", cgm::verify_exact},
  };
  const std::map<std::string, std::string> help{
      {"verify-queueing", "queueing identities and strip formulas"},
      {"verify-multiline", "multiline invariance"},
      {"verify-coupled", "coupled invariance and consistency"},
      {"verify-busemann", "Busemann marginals, independence, flip, increment atom, reversibility"},
      {"verify-geodesics", "directedness, coalescence, rho* law, initial run length"},
      {"verify-exact", "closed-form cross-checks"},
      {"simulate-lpp", "dump a G table, geodesic tree and competition interface"},
      {"sample-mu", "dump a sample of the coupled invariant measure"},
      {"acceptance", "acceptance criteria at the pinned seed"},
  };
  for (const auto& [name, text] : help) app.add_subcommand(name, text)->fallthrough();

  try {
    app.parse(argc, argv);
    if (!p.config.empty()) {
      auto args = config_tokens(p.config);
      for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
      // CLI11 takes a token vector in reverse order.
      std::reverse(args.begin(), args.end());
      app.clear();
      p = Params{};
      app.parse(args);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  Outputs o{p.out, p.force};
  try {
    p.suite.rates = parse_rates(p.rates);
    p.suite.validate();
    if (sub == "simulate-lpp") o.claim({"gtable.csv", "geodesics.csv", "interface.csv"});
    else if (sub == "sample-mu") o.claim({"mu.csv", "mu.meta"});
    else o.claim({"reports.jsonl", "edges.csv", "geodesics.csv", "run_pmf.csv"});
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (sub == "simulate-lpp") return simulate_lpp(p, o);
    if (sub == "sample-mu") return sample_mu(p, o);
    if (sub == "acceptance") return acceptance(p, app.get_option("--seed")->count() > 0, o);
    return finish_suite(cgm::run_with_policy(suites.at(sub), p.suite), o, sub);
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const cgm::output_exists_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}
