#include "cgm/suites.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cgm/exact_laws.hpp"
#include "cgm/lpp.hpp"
#include "cgm/multiclass.hpp"
#include "cgm/parallel.hpp"
#include "cgm/queueing.hpp"
#include "cgm/rng.hpp"

namespace cgm {

bool SuiteResult::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.report.pass; });
}

bool SuiteResult::exact_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.statistical || c.report.pass; });
}

std::vector<TestReport> SuiteResult::reports() const {
  std::vector<TestReport> out;
  for (const auto& c : checks) out.push_back(c.report);
  return out;
}

std::vector<TestReport> SuiteResult::statistical_reports() const {
  std::vector<TestReport> out;
  for (const auto& c : checks)
    if (c.statistical) out.push_back(c.report);
  return out;
}

void SuiteOptions::validate() const {
  const auto bad = [](const std::string& what) { throw std::invalid_argument("invalid " + what); };
  if (window < 2) bad("window: needs at least 2");
  if (instances == 0) bad("instances: needs at least 1");
  if (samples < 2000) bad("samples: needs at least 2000");
  if (lattice < 50) bad("lattice: needs N >= 50");
  if (rates.empty()) bad("rates: empty");
  for (double r : rates)
    if (!(r > 1.0) || !std::isfinite(r)) bad("rates: every rate must lie in (1,inf)");
  if (!(lambda > 0.0 && lambda < rho) || !std::isfinite(rho)) bad("lambda/rho: needs 0 < lambda < rho");
  if (sites < 100) bad("sites: needs at least 100");
  if (!(burn_in > 0.0 && burn_in < 1.0)) bad("burn-in: needs a fraction in (0,1)");
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

TestMeta meta(const SuiteResult& res, const std::string& name, const std::string& ref) {
  return {name, res.seed, ref};
}

TestReport identity_summary(const SuiteResult& res, const std::string& name, const std::string& ref,
                            const std::vector<IdentityReport>& reps) {
  double worst = 0.0, tol = reps.empty() ? 0.0 : reps.front().tolerance;
  std::uint64_t checked = 0;
  bool pass = true;
  for (const auto& r : reps) {
    worst = std::max(worst, r.max_error);
    checked += r.checked;
    pass = pass && r.pass;
  }
  TestReport t = make_report(meta(res, name, ref), worst, tol, checked);
  t.pass = t.pass && pass;
  return t;
}

std::vector<double> every(const SeqWindow& w, std::size_t first, std::size_t stride, std::size_t count) {
  std::vector<double> out;
  for (std::size_t j = 0; j < count; ++j) out.push_back(w[first + j * stride]);
  return out;
}

// Sites are kept this far apart when a test needs nearly independent samples from one window.
constexpr std::size_t kStride = 64;

}  // namespace

// ---------------------------------------------------------------------------------------------

void lpp_oracle_block(SuiteResult& res, std::size_t fields, std::size_t side) {
  double worst = 0.0;
  std::uint64_t n = 0;
  for (std::size_t r = 0; r < fields; ++r) {
    const Point o{static_cast<std::int64_t>(r % 7) - 3, static_cast<std::int64_t>(r % 5) - 2};
    const auto w = sample_exp_field(o, side, side, 1.0, {res.seed, "lpp-oracle", r});
    const auto g = lpp_grid(w, o);
    for (std::int64_t y = o.y; y <= w.corner().y; ++y)
      for (std::int64_t x = o.x; x <= w.corner().x; ++x, ++n)
        worst = std::max(worst, std::fabs(g.value({x, y}) - brute_force_lpp(w, o, {x, y})));
  }
  res.add(make_report(meta(res, "lpp grid vs brute force", "last-passage recursion"), worst, 1e-9, n), false);
}

void queue_identity_block(SuiteResult& res, std::size_t instances, std::size_t window) {
  std::vector<IdentityReport> cons, dual, tid, inter, chain;
  for (std::size_t i = 0; i < instances; ++i) {
    Stream p({res.seed, "queue-params", i});
    const double a1 = 1.5 + p.uniform();
    const double a2 = a1 + 0.5 + p.uniform();
    const double a3 = a2 + 0.5 + p.uniform();
    const double j = p.exp(2.0);
    const RngSpec base{res.seed, "queue", i};
    const auto I1 = sample_exp_window(1, window, a1, base.child("I1"));
    const auto I2 = sample_exp_window(1, window, a2, base.child("I2"));
    const auto I3 = sample_exp_window(1, window, a3, base.child("I3"));
    const auto w = sample_exp_window(1, window, 1.0, base.child("w"));
    cons.push_back(check_conservation(j, I1, w));
    dual.push_back(check_duality(j, I1, w));
    tid.push_back(check_T_identity(j, I1, w));
    inter.push_back(check_intertwining_identity(I2, I1, w, BoundaryPolicy::burn_in(0.2)));
    chain.push_back(check_intertwining_chain({I1, I2, I3}, w, BoundaryPolicy::burn_in(0.2)));
  }
  res.add(identity_summary(res, "conservation", "queue conservation laws", cons), false);
  res.add(identity_summary(res, "duality", "reversed queue duality", dual), false);
  res.add(identity_summary(res, "T-identity", "sup-sum identity", tid), false);
  res.add(identity_summary(res, "intertwining", "two-queue intertwining", inter), false);
  res.add(identity_summary(res, "intertwining chain n=3", "iterated intertwining", chain), false);
}

void strip_block(SuiteResult& res, std::size_t instances, std::size_t window) {
  std::vector<IdentityReport> reps;
  for (std::size_t i = 0; i < instances; ++i) {
    Stream p({res.seed, "strip-params", i});
    const double a = 1.2 + 2.0 * p.uniform();
    const double j = p.exp(2.0);
    const RngSpec base{res.seed, "strip", i};
    reps.push_back(check_strip_H(j, sample_exp_window(1, window, a, base.child("I")),
                                 sample_exp_window(1, window, 1.0, base.child("w"))));
  }
  res.add(identity_summary(res, "strip last-passage formulas", "two-level strip split and dual formulas", reps),
          false);
}

void multiline_block(SuiteResult& res, const std::vector<double>& rates, std::size_t samples) {
  const auto I = sample_nu_rho(rates, 0, samples, {res.seed, "multiline/nu", 0});
  const auto w = sample_exp_window(0, samples, 1.0, {res.seed, "multiline/w", 0});
  const auto out = multiline_step(I, w, BoundaryPolicy::stationary_exp({res.seed, "multiline/boundary", 0}, 1.0));
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double m = rates[i];
    res.add(ks_one_sample(meta(res, "multiline line " + std::to_string(i) + " rho=" + fmt(m), "multiline invariance"),
                          out.lines[i].values(), [m](double x) { return exp_cdf(x, m); }));
  }
  for (std::size_t i = 0; i < rates.size(); ++i)
    for (std::size_t j = i + 1; j < rates.size(); ++j)
      res.add(correlation_test(
          meta(res, "multiline cross-line r " + std::to_string(i) + "," + std::to_string(j), "multiline invariance"),
          out.lines[i].values(), out.lines[j].values()));
}

void coupled_block(SuiteResult& res, unsigned threads, const std::vector<double>& rates, std::size_t samples,
                   double burn_in) {
  const std::size_t per = 1000;
  const std::size_t reps = (samples + per - 1) / per;
  const std::size_t keep = kStride * per;
  const auto length = static_cast<std::size_t>(std::ceil(static_cast<double>(keep) / (1.0 - burn_in))) + 1;
  const std::size_t n = rates.size();
  struct Out {
    std::vector<std::vector<double>> stepped, fresh;
  };
  const auto outs = parallel_map(reps, threads, [&](std::size_t r) {
    const auto eta = sample_mu_rho(rates, {0, length, 0.2}, {res.seed, "coupled/mu", r});
    const auto w = sample_exp_window(0, length, 1.0, {res.seed, "coupled/w", r});
    const auto stepped = coupled_step(eta, w, BoundaryPolicy::burn_in(burn_in));
    const auto fresh = sample_mu_rho(rates, {0, keep, 0.2}, {res.seed, "coupled/reference", r});
    Out o;
    for (std::size_t i = 0; i < n; ++i) {
      o.stepped.push_back(every(stepped.lines[i], 0, kStride, per));
      o.fresh.push_back(every(fresh.lines[i], 0, kStride, per));
    }
    return o;
  });
  std::vector<std::vector<double>> a(n), b(n);
  for (const auto& o : outs)
    for (std::size_t i = 0; i < n; ++i) {
      a[i].insert(a[i].end(), o.stepped[i].begin(), o.stepped[i].end());
      b[i].insert(b[i].end(), o.fresh[i].begin(), o.fresh[i].end());
    }
  for (std::size_t i = 0; i < n; ++i)
    res.add(ks_two_sample(meta(res, "coupled line " + std::to_string(i) + " rho=" + fmt(rates[i]),
                               "coupled invariance"),
                          a[i], b[i]));
  for (std::size_t i = 1; i < n; ++i) {
    std::vector<double> da, db;
    for (std::size_t k = 0; k < a[i].size(); ++k) {
      da.push_back(a[i][k] - a[i - 1][k]);
      db.push_back(b[i][k] - b[i - 1][k]);
    }
    res.add(ks_two_sample(
        meta(res, "coupled difference " + std::to_string(i) + "-" + std::to_string(i - 1), "coupled invariance"), da,
        db));
  }
}

void consistency_block(SuiteResult& res, unsigned threads, const std::vector<double>& rates, std::size_t samples) {
  if (rates.size() < 3) return;
  const std::size_t per = 1000;
  const std::size_t reps = (samples + per - 1) / per;
  const std::vector<double> outer{rates.front(), rates.back()};
  struct Out {
    std::vector<double> full, dropped;
  };
  const auto outs = parallel_map(reps, threads, [&](std::size_t r) {
    const auto full = sample_mu_rho(rates, {0, kStride * per, 0.2}, {res.seed, "consistency/full", r});
    const auto drop = sample_mu_rho(outer, {0, kStride * per, 0.2}, {res.seed, "consistency/drop", r});
    Out o;
    for (std::size_t j = 0; j < per; ++j) {
      const std::size_t k = j * kStride;
      o.full.push_back(full.lines.back()[k] - full.lines.front()[k]);
      o.dropped.push_back(drop.lines[1][k] - drop.lines[0][k]);
    }
    return o;
  });
  std::vector<double> a, b;
  for (const auto& o : outs) {
    a.insert(a.end(), o.full.begin(), o.full.end());
    b.insert(b.end(), o.dropped.begin(), o.dropped.end());
  }
  res.add(ks_two_sample(meta(res, "coupled consistency outer-line difference", "projection consistency"), a, b));
}

// ---------------------------------------------------------------------------------------------

double MarginalDistances::mean() const {
  double s = 0.0;
  for (double d : horizontal) s += d;
  for (double d : vertical) s += d;
  const auto n = horizontal.size() + vertical.size();
  return n ? s / static_cast<double>(n) : 0.0;
}

namespace {

struct LevelSamples {
  std::vector<std::vector<double>> h, v;
  double recovery_error = 0.0;
  std::uint64_t recovery_checked = 0;
  std::optional<BusemannEdgeEstimates> first;
};

LevelSamples collect_level(std::uint64_t seed, const std::string& label, unsigned threads,
                           const std::vector<double>& rhos, std::int64_t N, std::size_t windows, std::size_t width) {
  // One field per rho: the union rectangle over all corners costs several times more weights.
  // Weights are keyed by coordinate, so the fields of one window agree where they overlap.
  const auto ests = parallel_map(windows, threads, [&](std::size_t r) {
    const LevelWindow lw{0, 0, width};
    BusemannEdgeEstimates all;
    for (double rho : rhos) {
      auto e = estimate_busemann_level(busemann_field(lw, {rho}, N, {seed, label, r}), lw, {rho}, N);
      all.window = e.window;
      all.N = e.N;
      all.weights = e.weights;
      all.per_rho.push_back(std::move(e.per_rho.front()));
    }
    return all;
  });
  LevelSamples s;
  s.h.resize(rhos.size());
  s.v.resize(rhos.size());
  for (const auto& e : ests)
    for (std::size_t i = 0; i < rhos.size(); ++i) {
      const auto& p = e.per_rho[i];
      s.h[i].insert(s.h[i].end(), p.horizontal.begin(), p.horizontal.end());
      s.v[i].insert(s.v[i].end(), p.vertical.begin(), p.vertical.end());
      for (std::size_t k = 0; k < width; ++k) {
        s.recovery_error = std::max(s.recovery_error, std::fabs(std::min(p.horizontal[k], p.vertical[k]) - e.weights[k]));
        ++s.recovery_checked;
      }
    }
  if (!ests.empty()) s.first = ests.front();
  return s;
}

}  // namespace

MarginalDistances busemann_marginal_block(SuiteResult& res, unsigned threads, const std::vector<double>& rhos,
                                          std::int64_t N, std::size_t windows, std::size_t width, double max_distance,
                                          bool record) {
  const auto s = collect_level(res.seed, "busemann", threads, rhos, N, windows, width);
  MarginalDistances d;
  d.width = width;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    const double mh = rhos[i], mv = rhos[i] / (rhos[i] - 1.0);
    const auto rh = ks_one_sample(meta(res, "busemann horizontal rho=" + fmt(mh) + " N=" + std::to_string(N),
                                       "Busemann marginal law"),
                                  s.h[i], [mh](double x) { return exp_cdf(x, mh); }, MaxDistance{max_distance});
    const auto rv = ks_one_sample(meta(res, "busemann vertical rho=" + fmt(mh) + " N=" + std::to_string(N),
                                       "Busemann marginal law"),
                                  s.v[i], [mv](double x) { return exp_cdf(x, mv); }, MaxDistance{max_distance});
    d.horizontal.push_back(rh.statistic);
    d.vertical.push_back(rv.statistic);
    d.horizontal_samples.push_back(s.h[i]);
    d.vertical_samples.push_back(s.v[i]);
    if (record) {
      res.add(rh);
      res.add(rv);
    }
  }
  if (record) {
    res.add(make_report(meta(res, "busemann weight recovery", "weight recovery"), s.recovery_error, 1e-9,
                        s.recovery_checked),
            false);
    res.edges = s.first;
  }
  return d;
}

namespace {

// Pooled mean KS distance over every rho and both directions, windows taken in `order`.
double pooled_ks(const MarginalDistances& d, const std::vector<double>& rhos, const std::vector<std::size_t>& order) {
  double total = 0.0;
  std::vector<double> h, v;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    h.clear();
    v.clear();
    for (std::size_t r : order) {
      const auto first = static_cast<std::ptrdiff_t>(r * d.width), last = first + static_cast<std::ptrdiff_t>(d.width);
      h.insert(h.end(), d.horizontal_samples[i].begin() + first, d.horizontal_samples[i].begin() + last);
      v.insert(v.end(), d.vertical_samples[i].begin() + first, d.vertical_samples[i].begin() + last);
    }
    const double mh = rhos[i], mv = rhos[i] / (rhos[i] - 1.0);
    total += ks_distance(h, [mh](double x) { return exp_cdf(x, mh); });
    total += ks_distance(v, [mv](double x) { return exp_cdf(x, mv); });
  }
  return total / static_cast<double>(2 * rhos.size());
}

}  // namespace

void busemann_probe_block(SuiteResult& res, unsigned threads, const std::vector<double>& rhos, std::int64_t N,
                          std::size_t windows, std::size_t width, const MarginalDistances& at_N) {
  SuiteResult scratch;
  scratch.seed = res.seed;
  const auto at_2N = busemann_marginal_block(scratch, threads, rhos, 2 * N, windows, width, 1.0, false);
  const double rise = at_2N.mean() - at_N.mean();
  const std::size_t resamples = 200;
  Stream pick({res.seed, "busemann-probe/bootstrap", 0});
  std::vector<double> rises;
  std::vector<std::size_t> order(windows);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& r : order) r = std::min(windows - 1, static_cast<std::size_t>(pick.uniform() * static_cast<double>(windows)));
    rises.push_back(pooled_ks(at_2N, rhos, order) - pooled_ks(at_N, rhos, order));
  }
  const double m = std::accumulate(rises.begin(), rises.end(), 0.0) / static_cast<double>(resamples);
  double ss = 0.0;
  for (double x : rises) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(resamples - 1));
  res.add(make_report(meta(res, "busemann doubling probe mean KS " + fmt(at_N.mean()) + " -> " + fmt(at_2N.mean()) +
                                    " (rise within 3 bootstrap sd)",
                           "Busemann limit along a direction"),
                      rise, 3.0 * sd, windows * width * rhos.size() * 2));
}

void busemann_independence_block(SuiteResult& res, unsigned threads, double rho, std::int64_t N,
                                 std::size_t windows, std::size_t width) {
  const auto s = collect_level(res.seed, "independence", threads, {rho}, N, windows, width);
  std::vector<double> a, b, h, v;
  for (std::size_t k = 0; k + 1 < s.h[0].size(); k += 2)
    if ((k % width) + 1 < width) {
      a.push_back(s.h[0][k]);
      b.push_back(s.h[0][k + 1]);
    }
  for (std::size_t k = 0; k < s.h[0].size(); ++k) {
    h.push_back(s.h[0][k]);
    v.push_back(s.v[0][k]);
  }
  res.add(correlation_test(meta(res, "busemann adjacent horizontal r rho=" + fmt(rho), "independence along a level"),
                           a, b));
  res.add(correlation_test(meta(res, "busemann corner horizontal-vertical r rho=" + fmt(rho),
                                "independence along a down-right path"),
                           h, v));
}

void busemann_flip_block(SuiteResult& res, unsigned threads, double rho, std::int64_t N, std::size_t windows,
                         std::size_t width) {
  const double dual = rho / (rho - 1.0);
  const auto sv = collect_level(res.seed, "flip/vertical", threads, {rho}, N, windows, width);
  const auto sh = collect_level(res.seed, "flip/horizontal", threads, {dual}, N, windows, width);
  res.add(ks_two_sample(meta(res, "busemann vertical rho=" + fmt(rho) + " vs horizontal rho=" + fmt(dual),
                             "vertical-horizontal reflection"),
                        sv.v[0], sh.h[0]));
}

void increment_atom_block(SuiteResult& res, unsigned threads, double lambda, double rho, std::size_t trials) {
  const std::size_t per = 2000, stride = 24;
  const std::size_t reps = (trials + per - 1) / per;
  const auto outs = parallel_map(reps, threads, [&](std::size_t r) {
    const auto mu = sample_mu_rho({lambda, rho}, {0, per * stride, 0.2}, {res.seed, "atom", r});
    std::vector<double> d;
    for (std::size_t j = 0; j < per; ++j) d.push_back(mu.lines[1][j * stride] - mu.lines[0][j * stride]);
    return d;
  });
  std::uint64_t hits = 0, n = 0;
  std::vector<double> tail;
  for (const auto& o : outs)
    for (double d : o) {
      ++n;
      if (d == 0.0) ++hits;
      else tail.push_back(d);
    }
  res.add(binomial_atom_test(meta(res, "increment atom lambda=" + fmt(lambda) + " rho=" + fmt(rho), "increment law"),
                             hits, n, lambda / rho));
  res.add(ks_one_sample(meta(res, "increment tail rho=" + fmt(rho), "increment law"), tail,
                        [rho](double x) { return exp_cdf(x, rho); }));
}

void reversibility_block(SuiteResult& res, unsigned threads, double lambda, double rho, std::size_t pairs) {
  const std::size_t per = 1000;
  const std::size_t reps = (pairs + per - 1) / per;
  struct Out {
    std::vector<double> lin_f, lin_b, atom_f, atom_b, pair_f, pair_b;
  };
  const auto outs = parallel_map(reps, threads, [&](std::size_t r) {
    const auto mu = sample_mu_rho({lambda, rho}, {0, per * kStride + 2, 0.2}, {res.seed, "reversibility", r});
    Out o;
    for (std::size_t j = 0; j < per; ++j) {
      const std::size_t k = j * kStride;
      const double a1 = mu.lines[0][k], b1 = mu.lines[1][k], a2 = mu.lines[0][k + 1], b2 = mu.lines[1][k + 1];
      const double d1 = b1 - a1, d2 = b2 - a2;
      // Even sites feed the forward sample and odd sites the transposed one.
      if (j % 2 == 0) {
        o.lin_f.push_back(d1 - 2.0 * d2);
        o.atom_f.push_back(d2 == 0.0 ? d1 : 0.0);
        o.pair_f.push_back(a1 * d2);
      } else {
        o.lin_b.push_back(d2 - 2.0 * d1);
        o.atom_b.push_back(d1 == 0.0 ? d2 : 0.0);
        o.pair_b.push_back(a2 * d1);
      }
    }
    return o;
  });
  Out all;
  for (const auto& o : outs) {
    all.lin_f.insert(all.lin_f.end(), o.lin_f.begin(), o.lin_f.end());
    all.lin_b.insert(all.lin_b.end(), o.lin_b.begin(), o.lin_b.end());
    all.atom_f.insert(all.atom_f.end(), o.atom_f.begin(), o.atom_f.end());
    all.atom_b.insert(all.atom_b.end(), o.atom_b.begin(), o.atom_b.end());
    all.pair_f.insert(all.pair_f.end(), o.pair_f.begin(), o.pair_f.end());
    all.pair_b.insert(all.pair_b.end(), o.pair_b.begin(), o.pair_b.end());
  }
  res.add(ks_two_sample(meta(res, "difference process reversible (linear functional)", "difference reversibility"),
                        all.lin_f, all.lin_b));
  res.add(ks_two_sample(meta(res, "difference process reversible (atom functional)", "difference reversibility"),
                        all.atom_f, all.atom_b));
  res.add(ks_two_sample_detects(meta(res, "pair process transpose asymmetry detected", "pair process not reversible"),
                                all.pair_f, all.pair_b));
}

// ---------------------------------------------------------------------------------------------

void run_length_block(SuiteResult& res, unsigned threads, double rho, std::int64_t N, std::size_t lattices,
                      std::size_t starts_per_lattice) {
  const Direction u = direction_of_rho(rho);
  const double gap = static_cast<double>(N) / static_cast<double>(starts_per_lattice);
  std::vector<Point> starts;
  for (std::size_t j = 0; j < starts_per_lattice; ++j) {
    const double d = static_cast<double>(N) + gap * static_cast<double>(j);
    starts.push_back({std::llround(-d * u.u1), std::llround(-d * u.u2)});
  }
  const Point top{starts.back().x, starts.back().y};
  struct Out {
    std::vector<std::size_t> runs;
    std::vector<GeodesicPath> paths;
  };
  const auto outs = parallel_map(lattices, threads, [&](std::size_t r) {
    const auto w = sample_exp_field({0, 0}, static_cast<std::size_t>(top.y + 1), static_cast<std::size_t>(top.x + 1),
                                    1.0, {res.seed, "run-length", r});
    const auto g = lpp_grid(w, {0, 0});
    Out o;
    for (const Point& x : starts) o.runs.push_back(initial_run_length(g, x));
    if (r == 0)
      for (std::size_t j = 0; j < starts.size(); j += 5) o.paths.push_back(busemann_geodesic(g, starts[j], 200));
    return o;
  });
  std::vector<std::size_t> runs;
  for (const auto& o : outs) {
    runs.insert(runs.end(), o.runs.begin(), o.runs.end());
    res.paths.insert(res.paths.end(), o.paths.begin(), o.paths.end());
  }
  const std::size_t bins = 9;
  const auto counts = initial_run_statistics(runs, bins);
  const auto pmf = initial_run_pmf_table(1.0, rho, bins - 1);
  res.add(chi_square_pmf(meta(res, "geodesic initial run pmf rho=" + fmt(rho), "initial horizontal run law"), counts,
                         pmf));
  res.pmf_exact = pmf;
  res.pmf_empirical.clear();
  for (std::size_t n = 0; n < pmf.size(); ++n)
    res.pmf_empirical.push_back(static_cast<double>(counts[n]) / static_cast<double>(runs.size()));
}

void wait_run_block(SuiteResult& res, double lambda, double rho, std::size_t samples) {
  const std::size_t margin = 200;
  const std::size_t length = margin + samples * kStride;
  const RngSpec base{res.seed, "wait-run/" + fmt(lambda) + "/" + fmt(rho), 0};
  const auto w = sample_exp_window(0, length, lambda, base.child("w"));
  const auto I = sample_exp_window(0, length, rho, base.child("I"));
  const auto ind = wait_indicator_run(w, I, BoundaryPolicy::stationary_exp(base.child("boundary"), lambda, rho));
  std::vector<std::size_t> runs;
  std::size_t censored = 0;
  for (std::size_t j = 0; j < samples; ++j) {
    const auto r = backward_run(ind, static_cast<std::int64_t>(margin + j * kStride));
    if (r) runs.push_back(*r);
    else ++censored;
  }
  const auto pmf = initial_run_pmf_table(lambda, rho, 8);
  res.add(chi_square_pmf(meta(res, "queue wait-indicator run pmf lambda=" + fmt(lambda) + " rho=" + fmt(rho),
                              "wait-indicator run law"),
                         initial_run_statistics(runs, 9), pmf));
  if (censored) res.warnings.push_back("wait-indicator runs reaching the window start: " + std::to_string(censored));
}

void rho_star_block(SuiteResult& res, unsigned threads, const std::vector<double>& lambdas, std::int64_t N,
                    std::size_t sites, double tolerance) {
  const std::size_t side = 10, spacing = 200;
  const std::size_t per_field = side * side;
  const std::size_t fields = (sites + per_field - 1) / per_field;
  std::int64_t dx = 1, dy = 1;
  for (double l : lambdas) {
    const Point c = far_corner({0, 0}, l, N);
    dx = std::max(dx, -c.x);
    dy = std::max(dy, -c.y);
  }
  const auto span = static_cast<std::int64_t>((side - 1) * spacing);
  const auto counts = parallel_map(fields, threads, [&](std::size_t f) {
    const auto w = sample_exp_field({-dx, -dy}, static_cast<std::size_t>(span + dy + 1),
                                    static_cast<std::size_t>(span + dx + 1), 1.0, {res.seed, "rho-star", f});
    std::vector<std::size_t> hits(lambdas.size(), 0);
    std::size_t used = 0;
    for (std::size_t s = 0; s < per_field && f * per_field + s < sites; ++s, ++used) {
      const Point x{static_cast<std::int64_t>((s % side) * spacing), static_cast<std::int64_t>((s / side) * spacing)};
      for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const Point v = far_corner(x, lambdas[i], N);
        if (horizontal_exceeds_vertical(w.sub(v, x), x, lambdas[i], N)) ++hits[i];
      }
    }
    hits.push_back(used);
    return hits;
  });
  std::vector<std::size_t> total(lambdas.size() + 1, 0);
  for (const auto& c : counts)
    for (std::size_t i = 0; i < c.size(); ++i) total[i] += c[i];
  const double n = static_cast<double>(total.back());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double emp = static_cast<double>(total[i]) / n;
    res.add(make_report(meta(res, "rho* cdf at lambda=" + fmt(lambdas[i]) + " empirical " + fmt(emp),
                             "competition interface parameter law"),
                        std::fabs(emp - rho_star_cdf(lambdas[i])), tolerance, total.back()));
  }
}

void directedness_block(SuiteResult& res, unsigned threads, double rho, std::int64_t N, std::size_t reps) {
  const Direction u = direction_of_rho(rho);
  const auto steps = static_cast<std::size_t>(N / 2);
  const auto ends = parallel_map(reps, threads, [&](std::size_t r) {
    const Point x{0, 0};
    const Point v = far_corner(x, rho, N);
    const auto w = sample_exp_field(v, static_cast<std::size_t>(x.y - v.y + 1), static_cast<std::size_t>(x.x - v.x + 1),
                                    1.0, {res.seed, "directedness/" + fmt(rho), r});
    const auto p = busemann_geodesic(lpp_grid(w, v), x, steps);
    const Point e = p.end();
    return std::pair<double, double>{static_cast<double>(e.x), static_cast<double>(e.y)};
  });
  double sx = 0.0, sy = 0.0;
  for (const auto& e : ends) {
    sx += e.first;
    sy += e.second;
  }
  const double denom = static_cast<double>(steps * reps);
  const double err = std::fabs(sx / denom - u.u1) + std::fabs(sy / denom - u.u2);
  res.add(make_report(meta(res, "geodesic direction rho=" + fmt(rho) + " N=" + std::to_string(N), "directedness"), err,
                      0.05, reps));
}

void coalescence_block(SuiteResult& res, unsigned threads, double rho, std::int64_t N, std::size_t reps) {
  const auto steps = static_cast<std::size_t>(N / 2);
  struct Out {
    bool found = false;
    double err = 0.0;
  };
  const auto outs = parallel_map(reps, threads, [&](std::size_t r) {
    const Point x{0, 0}, y = x + e2;
    const Point v = far_corner(x, rho, N);
    const auto w = sample_exp_field(v, static_cast<std::size_t>(y.y - v.y + 1), static_cast<std::size_t>(y.x - v.x + 1),
                                    1.0, {res.seed, "coalescence", r});
    const auto g = lpp_grid(w, v);
    const auto z = coalescence_point(busemann_geodesic(g, x, steps), busemann_geodesic(g, y, steps));
    Out o;
    if (!z) return o;
    o.found = true;
    const auto gz = lpp_grid(w, *z);
    o.err = std::fabs((g.value(y) - g.value(x)) - (gz.value(y) - gz.value(x)));
    return o;
  });
  std::size_t missed = 0;
  double worst = 0.0;
  for (const auto& o : outs) {
    if (!o.found) ++missed;
    worst = std::max(worst, o.err);
  }
  // Found in strictly more than 99% of runs.
  auto found = make_report(meta(res, "coalescence missed fraction x,x+e2 rho=" + fmt(rho) + " (strictly below)", "coalescence"),
                           static_cast<double>(missed) / static_cast<double>(reps), 0.01, reps);
  found.pass = found.statistic < found.threshold;
  res.add(found);
  res.add(make_report(meta(res, "increment from coalescence point", "Busemann increment through coalescence"), worst,
                      1e-9, reps - missed),
          false);
}

// ---------------------------------------------------------------------------------------------

void poisson_block(SuiteResult& res, std::size_t reps) {
  const std::vector<std::pair<double, double>> params{{1.0, 2.0}, {2.0, 1.0}};
  for (std::size_t p = 0; p < params.size(); ++p) {
    const auto [a, b] = params[p];
    Stream s({res.seed, "poisson", p});
    std::vector<std::uint64_t> hits(4, 0);
    for (std::size_t r = 0; r < reps; ++r) {
      double sa = 0.0, sb = 0.0;
      for (std::size_t n = 1; n <= 3; ++n) {
        sa += s.exp(1.0 / a);
        sb += s.exp(1.0 / b);
        if (!(sa < sb)) break;
        ++hits[n];
      }
    }
    hits[0] = reps;
    const std::string tag = " alpha=" + fmt(a) + " beta=" + fmt(b);
    for (std::size_t n = 1; n <= 3; ++n) {
      res.add(binomial_atom_test(meta(res, "poisson A" + std::to_string(n) + tag, "Poisson competition"), hits[n],
                                 reps, poisson_competition_A(n, a, b)));
      res.add(binomial_atom_test(meta(res, "poisson B" + std::to_string(n) + tag, "Poisson competition"),
                                 hits[n - 1] - hits[n], reps, poisson_competition_B(n, a, b)));
    }
    double sum = 0.0;
    for (std::size_t n = 1; n <= 200; ++n) sum += poisson_competition_B(n, a, b);
    res.add(make_report(meta(res, "poisson sum of B_n" + tag, "Poisson competition total"),
                        std::fabs(sum - std::min(1.0, b / a)), 1e-6, 200),
            false);
  }
}

void x_process_block(SuiteResult& res, std::size_t samples) {
  std::vector<double> x1, inc12, inc24, ref12, ref24;
  double count = 0.0;
  Stream ref({res.seed, "x-process/reference", 0});
  const auto law12 = increment_law(1.0, 2.0), law24 = increment_law(2.0, 4.0);
  for (std::size_t r = 0; r < samples; ++r) {
    const auto m = sample_X_process(4.0, {res.seed, "x-process", r});
    const double a = X_value(m, 1.0), b = X_value(m, 2.0), c = X_value(m, 4.0);
    x1.push_back(a);
    inc12.push_back(b - a);
    inc24.push_back(c - b);
    count += static_cast<double>(X_point_count(m, 1.0, std::exp(1.0)));
    ref12.push_back(law12.sample(ref.uniform()));
    ref24.push_back(law24.sample(ref.uniform()));
  }
  res.add(ks_one_sample(meta(res, "X(1) vs Exp(1)", "marked point process"), x1,
                        [](double v) { return exp_cdf(v, 1.0); }));
  res.add(ks_two_sample(meta(res, "X increment [1,2] vs increment law", "marked point process increments"), inc12,
                        ref12));
  res.add(ks_two_sample(meta(res, "X increment [2,4] vs increment law", "marked point process increments"), inc24,
                        ref24));
  const double n = static_cast<double>(samples);
  res.add(make_report(meta(res, "X point count mean on (1,e]", "intensity ds/s"),
                      std::fabs(count / n - 1.0) * std::sqrt(n), 3.0, samples));
}

namespace {

BigInt factorial(unsigned n) {
  BigInt f = 1;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

void catalan_block(SuiteResult& res) {
  const auto rows = catalan_triangle_rows(31);
  double mismatches = 0.0;
  std::uint64_t n_checked = 0;
  for (unsigned n = 0; n <= 25; ++n)
    for (unsigned k = 0; k <= n; ++k, ++n_checked)
      if (rows[n][k] != factorial(n + k) * (n - k + 1) / (factorial(k) * factorial(n + 1))) mismatches += 1.0;
  res.add(make_report(meta(res, "catalan triangle recurrence vs factorial form", "Catalan triangle"), mismatches, 0.0,
                      n_checked),
          false);
  double partial = 0.0, full = 0.0;
  for (unsigned n = 0; n <= 30; ++n) {
    BigInt s = 0;
    for (unsigned i = 0; i <= n; ++i) {
      s += rows[n][i];
      if (s != rows[n + 1][i]) partial += 1.0;
    }
    const BigInt c_next = factorial(2 * (n + 1)) / (factorial(n + 1) * factorial(n + 2));
    if (s != rows[n + 1][n + 1] || s != c_next) full += 1.0;
  }
  res.add(make_report(meta(res, "catalan row partial sums", "Catalan triangle partial sums"), partial, 0.0, 31), false);
  res.add(make_report(meta(res, "catalan row sums equal next Catalan number", "Catalan triangle row sums"), full, 0.0,
                      31),
          false);
}

void run_pmf_block(SuiteResult& res) {
  double worst = 0.0;
  for (double rho : {1.5, 2.0, 5.0}) worst = std::max(worst, std::fabs(initial_run_pmf_total(1.0, rho) - 1.0));
  worst = std::max(worst, std::fabs(initial_run_pmf_total(1.5, 3.0) - 1.0));
  res.add(make_report(meta(res, "initial run pmf total mass", "initial horizontal run law"), worst, 1e-10, 4), false);
  double spot = std::fabs(initial_run_pmf(2.0, 1) - 1.0 / 6.0);
  for (double rho : {1.5, 2.0, 5.0}) spot = std::max(spot, std::fabs(initial_run_pmf(rho, 0) - (1.0 - 1.0 / rho)));
  res.add(make_report(meta(res, "initial run pmf atom and n=1 values", "initial horizontal run law"), spot, 1e-15, 4),
          false);
}

void laplace_block(SuiteResult& res) {
  double worst = 0.0;
  std::uint64_t n = 0;
  for (const auto& [l, r] : std::vector<std::pair<double, double>>{{1.0, 2.0}, {1.5, 3.0}, {2.0, 5.0}}) {
    const auto law = increment_law(l, r);
    for (double t : {0.1, 0.5, 1.0, 3.0}) {
      const auto f = [&](double s) { return std::exp(-t * s) * (1.0 - law.atom()) * std::exp(-s / r) / r; };
      const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14);
      worst = std::max(worst, std::fabs(law.atom() + integral - law.laplace(t)));
      ++n;
    }
  }
  res.add(make_report(meta(res, "increment law Laplace transform", "increment law transform"), worst, 1e-10, n), false);
}

void shape_block(SuiteResult& res, unsigned threads, std::int64_t N, std::size_t seeds, double lo, double hi) {
  const auto ratios = parallel_map(seeds, threads, [&](std::size_t s) {
    const auto side = static_cast<std::size_t>(N + 1);
    const auto w = sample_exp_field({-N, -N}, side, side, 1.0, {res.seed, "shape", s});
    return lpp_grid(w, {-N, -N}).value({0, 0}) / static_cast<double>(N);
  });
  const double mx = *std::max_element(ratios.begin(), ratios.end());
  const double mn = *std::min_element(ratios.begin(), ratios.end());
  res.add(make_report(meta(res, "shape G/N max over seeds (min " + fmt(mn) + ")", "shape function"), mx, hi, seeds));
  if (mn < lo) res.warnings.push_back("shape G/N below " + fmt(lo) + ": min " + fmt(mn));
}

// ---------------------------------------------------------------------------------------------

namespace {

SuiteResult start(const std::string& name, const SuiteOptions& o) {
  o.validate();
  SuiteResult r;
  r.name = name;
  r.seed = o.seed;
  return r;
}

}  // namespace

SuiteResult verify_queueing(const SuiteOptions& o) {
  auto r = start("verify-queueing", o);
  queue_identity_block(r, o.instances, o.window);
  strip_block(r, o.instances, o.window);
  return r;
}

SuiteResult verify_multiline(const SuiteOptions& o) {
  auto r = start("verify-multiline", o);
  multiline_block(r, o.rates, o.samples);
  return r;
}

SuiteResult verify_coupled(const SuiteOptions& o) {
  auto r = start("verify-coupled", o);
  coupled_block(r, o.threads, o.rates, o.samples, o.burn_in);
  consistency_block(r, o.threads, o.rates, o.samples);
  return r;
}

SuiteResult verify_busemann(const SuiteOptions& o) {
  auto r = start("verify-busemann", o);
  const std::size_t width = 2, windows = (o.sites + width - 1) / width;
  busemann_marginal_block(r, o.threads, o.rates, o.lattice, windows, width, 0.04);
  busemann_independence_block(r, o.threads, 2.0, o.lattice, windows, width);
  busemann_flip_block(r, o.threads, 1.5, o.lattice, windows, width);
  increment_atom_block(r, o.threads, o.lambda, o.rho, o.samples);
  reversibility_block(r, o.threads, o.lambda, o.rho, o.samples);
  return r;
}

SuiteResult verify_geodesics(const SuiteOptions& o) {
  auto r = start("verify-geodesics", o);
  for (double rho : o.rates) directedness_block(r, o.threads, rho, o.lattice, 20);
  coalescence_block(r, o.threads, 2.0, 1000, 5000);
  rho_star_block(r, o.threads, {1.25, 2.0, 4.0}, 1000, o.sites, 0.03);
  run_length_block(r, o.threads, 2.0, 800, 500, 20);
  wait_run_block(r, 1.0, 2.0, 10000);
  wait_run_block(r, o.lambda, o.rho, 10000);
  run_pmf_block(r);
  return r;
}

SuiteResult verify_exact(const SuiteOptions& o) {
  auto r = start("verify-exact", o);
  catalan_block(r);
  run_pmf_block(r);
  laplace_block(r);
  poisson_block(r, 1000000);
  x_process_block(r, o.samples);
  return r;
}

}  // namespace cgm
