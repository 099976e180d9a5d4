#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgm/lattice.hpp"
#include "cgm/queueing.hpp"
#include "cgm/rng.hpp"
#include "cgm/stats.hpp"

namespace cgm {

// Lower-triangular arrays eta[i][j], xi[i][j], 0 <= j <= i < n (zero-based).
struct TriArray {
  std::vector<std::vector<SeqWindow>> eta;
  std::vector<std::vector<SeqWindow>> xi;

  std::size_t n() const { return eta.size(); }
  MultiConfig diagonal() const {
    MultiConfig out;
    for (std::size_t i = 0; i < eta.size(); ++i) out.lines.push_back(eta[i][i]);
    return out;
  }
  TriArray suffix_from(std::int64_t first) const {
    TriArray t{eta, xi};
    for (auto* a : {&t.eta, &t.xi})
      for (auto& row : *a)
        for (auto& w : row) w = w.suffix_from(first);
    return t;
  }
};

// Requested output window; the sampler prepends ceil(length * f / (1 - f)) burn-in indices.
struct WindowSpec {
  std::int64_t offset = 0;
  std::size_t length = 20000;
  double burn_in_fraction = 0.2;

  std::size_t prefix() const {
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
      throw std::invalid_argument("WindowSpec: burn-in fraction outside [0,1)");
    return static_cast<std::size_t>(
        std::ceil(static_cast<double>(length) * burn_in_fraction / (1.0 - burn_in_fraction)));
  }
};

namespace detail {

inline double line_mean(const MultiConfig& c, std::size_t i) {
  return c.rates.empty() ? c.lines[i].mean() : c.rates[i];
}

inline MultiConfig trim(MultiConfig c, const BoundaryPolicy& p) {
  const auto first = p.first_kept(c.offset(), c.length());
  return first == c.offset() ? c : c.suffix_from(first);
}

inline double service_mean(const BoundaryPolicy& p, const SeqWindow& w) {
  return p.service_mean > 0.0 ? p.service_mean : w.mean();
}

inline MultiConfig multiline_raw(const MultiConfig& I, const SeqWindow& w, const BoundaryPolicy& p) {
  I.validate();
  require_aligned(I.lines.front(), w, "multiline_step");
  const double svc = service_mean(p, w);
  MultiConfig out;
  out.rates = I.rates;
  SeqWindow wi = w;
  for (std::size_t i = 0; i < I.n(); ++i) {
    check_stability(I.lines[i], wi, "multiline_step");
    const double j0 = p.stage(i, line_mean(I, i), svc).initial_j(I.lines[i], wi);
    std::vector<double> dep, r;
    lindley(j0, I.lines[i].values(), wi.values(), &dep, nullptr, &r);
    out.lines.emplace_back(I.offset(), std::move(dep));
    wi = SeqWindow(I.offset(), std::move(r));
  }
  return out;
}

inline MultiConfig coupled_raw(const MultiConfig& eta, const SeqWindow& w, const BoundaryPolicy& p) {
  eta.validate();
  require_aligned(eta.lines.front(), w, "coupled_step");
  const double svc = service_mean(p, w);
  MultiConfig out;
  out.rates = eta.rates;
  for (std::size_t i = 0; i < eta.n(); ++i) {
    check_stability(eta.lines[i], w, "coupled_step");
    const double j0 = p.stage(i, line_mean(eta, i), svc).initial_j(eta.lines[i], w);
    out.lines.push_back(raw_D(j0, eta.lines[i], w));
  }
  return out;
}

// Line i of the result is D^(i)(I^i, ..., I^1); no trimming.
inline MultiConfig multiclass_raw(const MultiConfig& I, const BoundaryPolicy& p) {
  I.validate();
  MultiConfig out;
  out.rates = I.rates;
  std::size_t stage = 0;
  for (std::size_t i = 0; i < I.n(); ++i) {
    SeqWindow acc = I.lines[i];
    for (std::size_t j = i; j-- > 0;) {
      const double j0 = p.stage(stage++, line_mean(I, i), line_mean(I, j)).initial_j(acc, I.lines[j]);
      acc = raw_D(j0, acc, I.lines[j]);
    }
    out.lines.push_back(std::move(acc));
  }
  return out;
}

}  // namespace detail

// One step of the multiline process: w^1 = w, line i departs against w^i and w^{i+1} = R(I^i, w^i).
inline MultiConfig multiline_step(const MultiConfig& I, const SeqWindow& w, const BoundaryPolicy& policy) {
  policy.validate();
  return detail::trim(detail::multiline_raw(I, w, policy), policy);
}

// One step of the coupled process: every line departs against the same w.
inline MultiConfig coupled_step(const MultiConfig& eta, const SeqWindow& w, const BoundaryPolicy& policy) {
  policy.validate();
  return detail::trim(detail::coupled_raw(eta, w, policy), policy);
}

// The map I -> (D^(1)(I^1), D^(2)(I^2,I^1), ..., D^(n)(I^n,...,I^1)); lines ordered by
// increasing mean.
inline MultiConfig multiclass_map(const MultiConfig& I, const BoundaryPolicy& policy) {
  policy.validate();
  return detail::trim(detail::multiclass_raw(I, policy), policy);
}

// Independent lines I^i ~ i.i.d. Exp with mean rates[i]; line i uses stream child "line<i>".
inline MultiConfig sample_nu_rho(const std::vector<double>& rates, std::int64_t offset, std::size_t length,
                                 const RngSpec& rng) {
  MultiConfig out;
  out.rates = rates;
  for (std::size_t i = 0; i < rates.size(); ++i)
    out.lines.push_back(sample_exp_window(offset, length, rates[i], rng.child("line" + std::to_string(i))));
  out.validate();
  return out;
}

// Sample of mu^rho on spec's window. Rates are sorted, equal rates share one computed line,
// and the result is returned in the caller's order. Each queue starts empty ahead of the
// burn-in prefix, which is discarded.
inline MultiConfig sample_mu_rho(const std::vector<double>& rates, const WindowSpec& spec, const RngSpec& rng) {
  if (rates.empty()) throw std::invalid_argument("sample_mu_rho: no rates");
  for (double r : rates)
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("sample_mu_rho: rates must be positive");
  if (spec.length == 0) throw std::invalid_argument("sample_mu_rho: empty window");
  std::vector<double> distinct(rates);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t pre = spec.prefix();
  const std::int64_t start = spec.offset - static_cast<std::int64_t>(pre);
  const MultiConfig nu = sample_nu_rho(distinct, start, spec.length + pre, rng);
  const MultiConfig zeta = detail::multiclass_raw(nu, BoundaryPolicy::burn_in(0.0));
  MultiConfig out;
  out.rates = rates;
  for (double r : rates) {
    const auto idx = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), r) - distinct.begin());
    out.lines.push_back(zeta.lines[idx].suffix_from(spec.offset));
  }
  return out;
}

// eta^{1,1} = xi^{1,1} = I^1; for i >= 2: eta^{i,1} = I^i, then for j = 2..i
// eta^{i,j} = D(eta^{i,j-1}, xi^{i-1,j-1}), xi^{i,j-1} = R(eta^{i,j-1}, xi^{i-1,j-1}); xi^{i,i} = eta^{i,i}.
inline TriArray build_triangular_arrays(const MultiConfig& I, const BoundaryPolicy& policy) {
  I.validate();
  policy.validate();
  const std::size_t n = I.n();
  TriArray t;
  t.eta.resize(n);
  t.xi.resize(n);
  std::size_t stage = 0;
  for (std::size_t i = 0; i < n; ++i) {
    t.eta[i].resize(i + 1);
    t.xi[i].resize(i + 1);
    t.eta[i][0] = I.lines[i];
    for (std::size_t j = 1; j <= i; ++j) {
      const SeqWindow& a = t.eta[i][j - 1];
      const SeqWindow& s = t.xi[i - 1][j - 1];
      const double j0 = policy.stage(stage++, detail::line_mean(I, i), detail::line_mean(I, j - 1)).initial_j(a, s);
      std::vector<double> dep, r;
      detail::lindley(j0, a.values(), s.values(), &dep, nullptr, &r);
      t.eta[i][j] = SeqWindow(a.offset(), std::move(dep));
      t.xi[i][j - 1] = SeqWindow(a.offset(), std::move(r));
    }
    t.xi[i][i] = t.eta[i][i];
  }
  const auto first = policy.first_kept(I.offset(), I.length());
  return first == I.offset() ? t : t.suffix_from(first);
}

// Coupled step after the multiclass map against the multiclass map after the multiline step.
inline IdentityReport check_intertwining_dynamics(const MultiConfig& I, const SeqWindow& w,
                                                  const BoundaryPolicy& policy) {
  policy.validate();
  const MultiConfig lhs = detail::coupled_raw(detail::multiclass_raw(I, policy.stage(0, 0, 0)), w, policy.stage(1, 0, 0));
  const MultiConfig rhs = detail::multiclass_raw(detail::multiline_raw(I, w, policy.stage(2, 0, 0)), policy.stage(3, 0, 0));
  IdentityReport rep{"intertwining-dynamics", true, 0.0, 0, kIdentityTol};
  const auto first = policy.first_kept(I.offset(), I.length());
  for (std::size_t i = 0; i < I.n(); ++i) rep.compare(lhs.lines[i], rhs.lines[i], first);
  return rep;
}

struct CorrelationEntry {
  std::string a;
  std::string b;
  double r = 0.0;
};

struct IndependenceReport {
  bool pass = true;
  std::size_t n = 0;
  double threshold = 0.0;
  double max_abs_r = 0.0;
  std::vector<CorrelationEntry> entries;
};

// Pairwise correlations, across the supplied samples and sites, between the groups
// {xi^{m,j}_k, xi^{m,j}_{k-1}} (j < m), eta^m_{k-1}, eta^l_k - eta^{l-1}_k (l = m..2) and eta^1_k,
// taking only pairs from different groups. m is one-based; each site k contributes one
// observation per sample.
inline IndependenceReport check_independence_structure(const std::vector<TriArray>& samples, std::size_t m,
                                                       const std::vector<std::int64_t>& sites) {
  if (samples.empty() || sites.empty()) throw std::invalid_argument("check_independence_structure: no data");
  if (m < 2 || m > samples.front().n()) throw std::invalid_argument("check_independence_structure: bad m");
  struct Var {
    std::string name;
    int group;
    std::vector<double> v;
  };
  std::vector<Var> vars;
  int g = 0;
  for (std::size_t j = 1; j < m; ++j, ++g) {
    vars.push_back({"xi" + std::to_string(m) + std::to_string(j) + "_k", g, {}});
    vars.push_back({"xi" + std::to_string(m) + std::to_string(j) + "_k-1", g, {}});
  }
  vars.push_back({"eta" + std::to_string(m) + "_k-1", g++, {}});
  for (std::size_t l = m; l >= 2; --l) vars.push_back({"eta" + std::to_string(l) + "-eta" + std::to_string(l - 1) + "_k", g++, {}});
  vars.push_back({"eta1_k", g++, {}});
  for (const auto& t : samples) {
    const auto& eta = [&](std::size_t l, std::int64_t k) { return t.eta[l - 1][l - 1].at(k); };
    for (std::int64_t k : sites) {
      std::size_t v = 0;
      for (std::size_t j = 1; j < m; ++j) {
        vars[v++].v.push_back(t.xi[m - 1][j - 1].at(k));
        vars[v++].v.push_back(t.xi[m - 1][j - 1].at(k - 1));
      }
      vars[v++].v.push_back(eta(m, k - 1));
      for (std::size_t l = m; l >= 2; --l) vars[v++].v.push_back(eta(l, k) - eta(l - 1, k));
      vars[v++].v.push_back(eta(1, k));
    }
  }
  IndependenceReport rep;
  rep.n = vars.front().v.size();
  rep.threshold = 4.0 / std::sqrt(static_cast<double>(rep.n));
  for (std::size_t a = 0; a < vars.size(); ++a)
    for (std::size_t b = a + 1; b < vars.size(); ++b) {
      if (vars[a].group == vars[b].group) continue;
      const double r = pearson(vars[a].v, vars[b].v);
      rep.entries.push_back({vars[a].name, vars[b].name, r});
      rep.max_abs_r = std::max(rep.max_abs_r, std::fabs(r));
      if (std::fabs(r) >= rep.threshold) rep.pass = false;
    }
  return rep;
}

}  // namespace cgm
