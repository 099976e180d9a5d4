#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace cgm {

// pass <=> statistic <= threshold.
struct TestReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  bool pass = false;
  std::string paper_ref;
};

struct TestMeta {
  std::string name;
  std::uint64_t seed = 0;
  std::string paper_ref;
};

inline TestReport make_report(const TestMeta& m, double statistic, double threshold, std::uint64_t n) {
  return {m.name, statistic, threshold, n, m.seed, statistic <= threshold, m.paper_ref};
}

inline constexpr double kDefaultSignificance = 1e-3;

// Limiting distribution of sqrt(n) * D_n.
inline double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x < 0.2) return 0.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return 1.0 - 2.0 * s;
}

// x with P(K > x) = alpha.
inline double kolmogorov_critical(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("kolmogorov_critical: alpha outside (0,1)");
  double lo = 0.2, hi = 5.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - kolmogorov_cdf(mid) > alpha) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double f = cdf(samples[i]);
    const double f_left = cdf(std::nextafter(samples[i], -std::numeric_limits<double>::infinity()));
    // Empirical CDF jumps from i/n (left limit) to j/n at samples[i].
    d = std::max({d, std::fabs(static_cast<double>(j) / n - f), std::fabs(f_left - static_cast<double>(i) / n)});
    i = j;
  }
  return d;
}

inline double ks_distance_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

struct Significance {
  double alpha = kDefaultSignificance;
};
struct MaxDistance {
  double d = 0.0;
};

inline TestReport ks_one_sample(const TestMeta& m, const std::vector<double>& samples,
                                const std::function<double(double)>& cdf, Significance s = {}) {
  const double d = ks_distance(samples, cdf);
  const double crit = kolmogorov_critical(s.alpha) / std::sqrt(static_cast<double>(samples.size()));
  return make_report(m, d, crit, samples.size());
}

inline TestReport ks_one_sample(const TestMeta& m, const std::vector<double>& samples,
                                const std::function<double(double)>& cdf, MaxDistance md) {
  return make_report(m, ks_distance(samples, cdf), md.d, samples.size());
}

inline TestReport ks_two_sample(const TestMeta& m, const std::vector<double>& a,
                                const std::vector<double>& b, Significance s = {}) {
  const double d = ks_distance_two_sample(a, b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double crit = kolmogorov_critical(s.alpha) * std::sqrt((na + nb) / (na * nb));
  return make_report(m, d, crit, a.size() + b.size());
}

// Asymptotic p-value of the two-sample statistic.
inline double ks_two_sample_p_value(const std::vector<double>& a, const std::vector<double>& b) {
  const double d = ks_distance_two_sample(a, b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  return 1.0 - kolmogorov_cdf(d * std::sqrt(na * nb / (na + nb)));
}

// Passes when a difference is detected: statistic is the p-value, threshold alpha.
inline TestReport ks_two_sample_detects(const TestMeta& m, const std::vector<double>& a,
                                        const std::vector<double>& b, Significance s = {}) {
  return make_report(m, ks_two_sample_p_value(a, b), s.alpha, a.size() + b.size());
}

// counts[i] for i < pmf.size() are observations equal to i; counts.back() collects the rest.
// The tail probability is 1 - sum(pmf). Bins whose expected count is below min_bin are merged
// into the tail from the top down.
inline TestReport chi_square_pmf(const TestMeta& m, const std::vector<std::uint64_t>& counts,
                                 const std::vector<double>& pmf, double min_bin = 5.0,
                                 Significance s = {}) {
  if (counts.size() != pmf.size() + 1) throw std::invalid_argument("chi_square_pmf: counts need a tail bin");
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  if (total <= 0.0) throw std::invalid_argument("chi_square_pmf: no observations");
  std::vector<double> obs(counts.begin(), counts.end());
  std::vector<double> prob(pmf);
  prob.push_back(std::max(0.0, 1.0 - std::accumulate(pmf.begin(), pmf.end(), 0.0)));
  while (prob.size() > 1 && prob.back() * total < min_bin) {
    const double p = prob.back(), o = obs.back();
    prob.pop_back();
    obs.pop_back();
    prob.back() += p;
    obs.back() += o;
  }
  if (prob.size() < 2) throw std::invalid_argument("chi_square_pmf: fewer than two usable bins");
  double chi2 = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double e = prob[i] * total;
    if (e <= 0.0) {
      if (obs[i] > 0.0) chi2 = std::numeric_limits<double>::infinity();
      continue;
    }
    chi2 += (obs[i] - e) * (obs[i] - e) / e;
  }
  const boost::math::chi_squared dist(static_cast<double>(prob.size() - 1));
  const double crit = boost::math::quantile(boost::math::complement(dist, s.alpha));
  return make_report(m, chi2, crit, static_cast<std::uint64_t>(total));
}

inline double chi_square_p_value(double statistic, std::size_t dof) {
  const boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

// |hits - trials p| in standard deviations, against `sigmas`.
inline TestReport binomial_atom_test(const TestMeta& m, std::uint64_t hits, std::uint64_t trials,
                                     double p, double sigmas = 3.0) {
  if (trials == 0) throw std::invalid_argument("binomial_atom_test: no trials");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_atom_test: p outside [0,1]");
  const double n = static_cast<double>(trials);
  const double sd = std::sqrt(n * p * (1.0 - p));
  const double dev = std::fabs(static_cast<double>(hits) - n * p);
  const double z = sd > 0.0 ? dev / sd : (dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return make_report(m, z, sigmas, trials);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: need equal sizes >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// |r| against 4/sqrt(N).
inline TestReport correlation_test(const TestMeta& m, const std::vector<double>& x,
                                   const std::vector<double>& y) {
  const double r = pearson(x, y);
  return make_report(m, std::fabs(r), 4.0 / std::sqrt(static_cast<double>(x.size())), x.size());
}

// Per-seed pass fraction of at least min_fraction, and at least one seed with every test passing.
struct PolicyVerdict {
  bool pass = false;
  std::vector<double> pass_fraction;
  std::size_t best_seed = 0;
};

inline PolicyVerdict evaluate_policy(const std::vector<std::vector<TestReport>>& per_seed,
                                     double min_fraction = 0.95) {
  PolicyVerdict v;
  if (per_seed.empty()) return v;
  bool all_above = true, some_perfect = false;
  double best = -1.0;
  for (std::size_t s = 0; s < per_seed.size(); ++s) {
    const auto& r = per_seed[s];
    const auto passed = std::count_if(r.begin(), r.end(), [](const TestReport& t) { return t.pass; });
    const double f = r.empty() ? 1.0 : static_cast<double>(passed) / static_cast<double>(r.size());
    v.pass_fraction.push_back(f);
    if (f < min_fraction) all_above = false;
    if (f == 1.0) some_perfect = true;
    if (f > best) {
      best = f;
      v.best_seed = s;
    }
  }
  v.pass = all_above && some_perfect;
  return v;
}

inline double exp_cdf(double x, double mean) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x / mean); }

}  // namespace cgm
