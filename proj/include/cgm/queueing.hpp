#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgm/diagnostics.hpp"
#include "cgm/lattice.hpp"
#include "cgm/lpp.hpp"
#include "cgm/rng.hpp"

namespace cgm {

// Departures D(I,w), sojourn times S(I,w) and R(I,w) over a common window.
struct QueueOutput {
  SeqWindow departures;     // I~
  SeqWindow sojourn;        // J
  SeqWindow last_in_queue;  // w~

  QueueOutput suffix_from(std::int64_t first) const {
    return {departures.suffix_from(first), sojourn.suffix_from(first), last_in_queue.suffix_from(first)};
  }
};

// How the left edge of a finite window stands in for the infinite past.
struct BoundaryPolicy {
  enum class Kind { given_j, stationary_exp, burn_in };

  Kind kind = Kind::burn_in;
  double j_left = 0.0;
  double burn_in_fraction = 0.2;
  // Means of the service (lambda) and arrival (rho) sequences for stationary_exp; zero means
  // "use the window averages".
  double service_mean = 0.0;
  double arrival_mean = 0.0;
  RngSpec rng{};

  static BoundaryPolicy given_j(double j) {
    BoundaryPolicy p;
    p.kind = Kind::given_j;
    p.j_left = j;
    p.validate();
    return p;
  }
  static BoundaryPolicy burn_in(double fraction = 0.2) {
    BoundaryPolicy p;
    p.kind = Kind::burn_in;
    p.burn_in_fraction = fraction;
    p.validate();
    return p;
  }
  static BoundaryPolicy stationary_exp(RngSpec rng, double lambda = 0.0, double rho = 0.0) {
    BoundaryPolicy p;
    p.kind = Kind::stationary_exp;
    p.rng = std::move(rng);
    p.service_mean = lambda;
    p.arrival_mean = rho;
    p.validate();
    return p;
  }

  void validate() const {
    if (kind == Kind::burn_in && !(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
      throw std::invalid_argument("BoundaryPolicy: burn-in fraction outside [0,1)");
    if (kind == Kind::given_j && !(j_left >= 0.0))
      throw std::invalid_argument("BoundaryPolicy: J must be nonnegative");
    if (kind == Kind::stationary_exp && (service_mean < 0.0 || arrival_mean < 0.0))
      throw std::invalid_argument("BoundaryPolicy: negative mean");
    if (kind == Kind::stationary_exp && service_mean > 0.0 && arrival_mean > 0.0 &&
        !(service_mean < arrival_mean))
      throw std::invalid_argument("BoundaryPolicy: stationary start needs lambda < rho");
  }

  // Policy for queue number `stage` of a composite map, whose inputs have the given means.
  BoundaryPolicy stage(std::size_t index, double arrival, double service) const {
    BoundaryPolicy p = *this;
    if (kind == Kind::stationary_exp) {
      p.rng = rng.child("stage" + std::to_string(index));
      p.arrival_mean = arrival;
      p.service_mean = service;
    }
    return p;
  }

  // J at the left edge for arrivals I and services w.
  double initial_j(const SeqWindow& I, const SeqWindow& w) const {
    switch (kind) {
      case Kind::given_j: return j_left;
      case Kind::burn_in: return 0.0;
      case Kind::stationary_exp: {
        const double lam = service_mean > 0.0 ? service_mean : w.mean();
        const double rho = arrival_mean > 0.0 ? arrival_mean : I.mean();
        if (!(lam < rho)) throw std::invalid_argument("BoundaryPolicy: stationary start needs lambda < rho");
        const double rate = 1.0 / lam - 1.0 / rho;
        return CounterRng(rng.child("boundary")).exp_at(0, 1.0 / rate);
      }
    }
    return 0.0;
  }

  // First index kept after the burn-in prefix is discarded.
  std::int64_t first_kept(std::int64_t offset, std::size_t length) const {
    if (kind != Kind::burn_in) return offset;
    return offset + static_cast<std::int64_t>(std::floor(burn_in_fraction * static_cast<double>(length)));
  }
};

namespace detail {

inline void lindley(double j0, const std::vector<double>& I, const std::vector<double>& w,
                    std::vector<double>* dep, std::vector<double>* soj, std::vector<double>* rr) {
  const std::size_t n = I.size();
  if (dep) dep->resize(n);
  if (soj) soj->resize(n);
  if (rr) rr->resize(n);
  double j = j0;
  for (std::size_t k = 0; k < n; ++k) {
    const double ik = I[k];
    const double wk = w[k];
    const double diff = ik - j;
    if (dep) (*dep)[k] = wk + (diff > 0.0 ? diff : 0.0);
    if (rr) (*rr)[k] = ik < j ? ik : j;
    j = wk + (diff < 0.0 ? -diff : 0.0);
    if (soj) (*soj)[k] = j;
  }
}

inline void check_stability(const SeqWindow& I, const SeqWindow& w, const char* who) {
  if (!(I.mean() > w.mean())) warn(std::string(who) + ": mean arrival gap not above mean service");
}

inline SeqWindow raw_D(double j0, const SeqWindow& I, const SeqWindow& w) {
  std::vector<double> d;
  lindley(j0, I.values(), w.values(), &d, nullptr, nullptr);
  return SeqWindow(I.offset(), std::move(d));
}

inline SeqWindow raw_R(double j0, const SeqWindow& I, const SeqWindow& w) {
  std::vector<double> r;
  lindley(j0, I.values(), w.values(), nullptr, nullptr, &r);
  return SeqWindow(I.offset(), std::move(r));
}

}  // namespace detail

// Lindley iteration from J_{offset-1} = j_left.
inline QueueOutput lindley_iterate(double j_left, const SeqWindow& I, const SeqWindow& w) {
  require_aligned(I, w, "lindley_iterate");
  if (!(j_left >= 0.0)) throw std::invalid_argument("lindley_iterate: J must be nonnegative");
  std::vector<double> d, s, r;
  detail::lindley(j_left, I.values(), w.values(), &d, &s, &r);
  return {SeqWindow(I.offset(), std::move(d)), SeqWindow(I.offset(), std::move(s)),
          SeqWindow(I.offset(), std::move(r))};
}

inline QueueOutput queue_apply(const SeqWindow& I, const SeqWindow& w, const BoundaryPolicy& policy) {
  require_aligned(I, w, "queue");
  policy.validate();
  detail::check_stability(I, w, "queue");
  QueueOutput out = lindley_iterate(policy.initial_j(I, w), I, w);
  const auto first = policy.first_kept(I.offset(), I.size());
  return first == I.offset() ? out : out.suffix_from(first);
}

inline SeqWindow queue_D(const SeqWindow& I, const SeqWindow& w, const BoundaryPolicy& policy) {
  return queue_apply(I, w, policy).departures;
}
inline SeqWindow queue_S(const SeqWindow& I, const SeqWindow& w, const BoundaryPolicy& policy) {
  return queue_apply(I, w, policy).sojourn;
}
inline SeqWindow queue_R(const SeqWindow& I, const SeqWindow& w, const BoundaryPolicy& policy) {
  return queue_apply(I, w, policy).last_in_queue;
}

// Left fold D(...D(D(z1,z2),z3)..., zn) with every stage started by the policy and the
// burn-in prefix discarded once at the end. means[i] (optional) is the mean of z_{i+1}.
inline SeqWindow queue_Dn(const std::vector<SeqWindow>& z, const BoundaryPolicy& policy,
                          const std::vector<double>& means = {}) {
  if (z.empty()) throw std::invalid_argument("queue_Dn: needs at least one sequence");
  if (!means.empty() && means.size() != z.size()) throw std::invalid_argument("queue_Dn: means size");
  policy.validate();
  for (const auto& s : z) require_aligned(s, z.front(), "queue_Dn");
  const double top = means.empty() ? z.front().mean() : means.front();
  SeqWindow acc = z.front();
  for (std::size_t j = 1; j < z.size(); ++j) {
    detail::check_stability(acc, z[j], "queue_Dn");
    const double service = means.empty() ? z[j].mean() : means[j];
    const auto p = policy.stage(j, top, service);
    acc = detail::raw_D(p.initial_j(acc, z[j]), acc, z[j]);
  }
  const auto first = policy.first_kept(acc.offset(), acc.size());
  return first == acc.offset() ? acc : acc.suffix_from(first);
}

// Result of a deterministic identity check.
struct IdentityReport {
  std::string name;
  bool pass = true;
  double max_error = 0.0;  // relative: |a-b| / max(1,|a|,|b|)
  std::size_t checked = 0;
  double tolerance = 0.0;

  void compare(double a, double b) {
    const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    const double e = std::fabs(a - b) / scale;
    if (!(e <= tolerance)) pass = false;
    if (e > max_error || std::isnan(e)) max_error = std::isnan(e) ? std::numeric_limits<double>::infinity() : e;
    ++checked;
  }

  void compare(const SeqWindow& a, const SeqWindow& b, std::int64_t first) {
    if (a.end() != b.end()) {
      pass = false;
      return;
    }
    for (std::int64_t k = first; k < a.end(); ++k) compare(a.at(k), b.at(k));
  }

  void merge(const IdentityReport& o) {
    pass = pass && o.pass;
    max_error = std::max(max_error, o.max_error);
    checked += o.checked;
  }
};

// Two-level strip: row 0 holds H_{(m,0),(k,0)}, row 1 holds H_{(m,0),(k,1)}, k = m..n.
struct StripH {
  std::int64_t m = 0;
  std::vector<double> lower;
  std::vector<double> upper;

  std::int64_t n() const { return m + static_cast<std::int64_t>(lower.size()) - 1; }
  double at(std::int64_t k, int level) const {
    const auto i = static_cast<std::size_t>(k - m);
    return level == 0 ? lower.at(i) : upper.at(i);
  }

  GTable table() const {
    std::vector<double> v(lower);
    v.insert(v.end(), upper.begin(), upper.end());
    return GTable({m, 0}, {m, 0}, 2, lower.size(), true, std::move(v));
  }
};

// H from its defining max formula; I and w live on m+1..n.
inline StripH strip_lpp_H(double j_m, const SeqWindow& I, const SeqWindow& w) {
  require_aligned(I, w, "strip_lpp_H");
  if (!(j_m >= 0.0)) throw std::invalid_argument("strip_lpp_H: J must be nonnegative");
  const std::size_t L = I.size();
  StripH h;
  h.m = I.offset() - 1;
  h.lower.assign(L + 1, 0.0);
  h.upper.assign(L + 1, 0.0);
  // SI[j] = sum_{i=m+1}^{j} I_i, W[j] = sum_{i=m+1}^{j} w_i, positions relative to m.
  std::vector<double> SI(L + 1, 0.0), W(L + 1, 0.0);
  for (std::size_t j = 1; j <= L; ++j) {
    SI[j] = SI[j - 1] + I[j - 1];
    W[j] = W[j - 1] + w[j - 1];
  }
  h.lower = SI;
  h.upper[0] = j_m;
  for (std::size_t n = 1; n <= L; ++n) {
    double best = j_m + W[n];
    for (std::size_t j = 1; j <= n; ++j) best = std::max(best, SI[j] + (W[n] - W[j - 1]));
    h.upper[n] = best;
  }
  return h;
}

// Queue outputs read off the strip: I~_n = H(n,1)-H(n-1,1), J_n = H(n,1)-H(n,0).
inline QueueOutput queue_by_sup(double j_left, const SeqWindow& I, const SeqWindow& w) {
  const StripH h = strip_lpp_H(j_left, I, w);
  const std::size_t L = I.size();
  std::vector<double> d(L), s(L), r(L);
  double jprev = j_left;
  for (std::size_t i = 0; i < L; ++i) {
    d[i] = std::max(0.0, h.upper[i + 1] - h.upper[i]);
    s[i] = std::max(0.0, h.upper[i + 1] - h.lower[i + 1]);
    r[i] = std::min(I[i], jprev);
    jprev = s[i];
  }
  return {SeqWindow(I.offset(), std::move(d)), SeqWindow(I.offset(), std::move(s)),
          SeqWindow(I.offset(), std::move(r))};
}

inline constexpr double kIdentityTol = 1e-9;
inline constexpr double kShortIdentityTol = 1e-12;

// Conservation I_k + J_k = J_{k-1} + I~_k and w_k + I_k = w~_k + I~_k at every index.
inline IdentityReport check_conservation(double j_left, const SeqWindow& I, const SeqWindow& w) {
  const QueueOutput q = lindley_iterate(j_left, I, w);
  IdentityReport rep{"conservation", true, 0.0, 0, kShortIdentityTol};
  double jprev = j_left;
  for (std::size_t k = 0; k < I.size(); ++k) {
    rep.compare(I[k] + q.sojourn[k], jprev + q.departures[k]);
    rep.compare(w[k] + I[k], q.last_in_queue[k] + q.departures[k]);
    jprev = q.sojourn[k];
  }
  return rep;
}

// Runs the reversed system and compares it with the original inputs.
inline IdentityReport check_duality(double j_m, const SeqWindow& I, const SeqWindow& w) {
  require_aligned(I, w, "check_duality");
  const QueueOutput q = lindley_iterate(j_m, I, w);
  const std::int64_t m = I.offset() - 1;
  const std::int64_t n = I.end() - 1;
  const std::size_t L = I.size();
  // Primed inputs on -n+1..-m: I'_i = I~_{-i+1}, w'_i = w~_{-i+1}.
  std::vector<double> Ip(L), wp(L);
  for (std::size_t a = 0; a < L; ++a) {
    const std::int64_t i = -n + 1 + static_cast<std::int64_t>(a);
    Ip[a] = q.departures.at(-i + 1);
    wp[a] = q.last_in_queue.at(-i + 1);
  }
  const SeqWindow Iprime(-n + 1, std::move(Ip)), wprime(-n + 1, std::move(wp));
  const QueueOutput qp = lindley_iterate(q.sojourn.at(n), Iprime, wprime);
  IdentityReport rep{"duality", true, 0.0, 0, kShortIdentityTol};
  for (std::int64_t k = -n + 1; k <= -m; ++k) {
    rep.compare(qp.departures.at(k), I.at(-k + 1));
    rep.compare(qp.sojourn.at(k), k == -m ? j_m : q.sojourn.at(-k));
    rep.compare(qp.last_in_queue.at(k), w.at(-k + 1));
  }
  return rep;
}

// T_{m,n'} = T~_{m,n'} for every n' in the window; I and w live on m..n, J_left = J_{m-1}.
inline IdentityReport check_T_identity(double j_left, const SeqWindow& I, const SeqWindow& w) {
  require_aligned(I, w, "check_T_identity");
  const QueueOutput q = lindley_iterate(j_left, I, w);
  const std::size_t L = I.size();
  std::vector<double> SI(L + 1, 0.0), W(L + 1, 0.0), SR(L + 1, 0.0), SD(L + 1, 0.0);
  for (std::size_t j = 1; j <= L; ++j) {
    SI[j] = SI[j - 1] + I[j - 1];
    W[j] = W[j - 1] + w[j - 1];
    SR[j] = SR[j - 1] + q.last_in_queue[j - 1];
    SD[j] = SD[j - 1] + q.departures[j - 1];
  }
  IdentityReport rep{"T-identity", true, 0.0, 0, kIdentityTol};
  for (std::size_t n = 1; n <= L; ++n) {
    double T = kNegInf, Tt = kNegInf;
    for (std::size_t j = 1; j <= n; ++j) {
      T = std::max(T, SI[j] + (W[n] - W[j - 1]));
      Tt = std::max(Tt, SR[j] + (SD[n] - SD[j - 1]));
    }
    rep.compare(T, Tt);
  }
  return rep;
}

// Increment formulas, the split formula at every k and the dual formula at every l.
inline IdentityReport check_strip_H(double j_m, const SeqWindow& I, const SeqWindow& w) {
  const StripH h = strip_lpp_H(j_m, I, w);
  const QueueOutput q = lindley_iterate(j_m, I, w);
  const std::size_t L = I.size();
  IdentityReport rep{"strip-H", true, 0.0, 0, kIdentityTol};
  for (std::size_t n = 1; n <= L; ++n) {
    rep.compare(h.upper[n] - h.upper[n - 1], q.departures[n - 1]);
    rep.compare(h.upper[n] - h.lower[n], q.sojourn[n - 1]);
  }
  // Split formula at the right end for every k in m..n.
  std::vector<double> SD(L + 1, 0.0), SR(L + 1, 0.0);
  for (std::size_t j = 1; j <= L; ++j) {
    SD[j] = SD[j - 1] + q.departures[j - 1];
    SR[j] = SR[j - 1] + q.last_in_queue[j - 1];
  }
  const double top = h.upper[L];
  for (std::size_t k = 0; k <= L; ++k) {
    const double jk = k == 0 ? j_m : q.sojourn[k - 1];
    rep.compare(top, h.lower[k] + jk + (SD[L] - SD[k]));
  }
  // Dual formula for every l in m..n-1.
  for (std::size_t l = 0; l < L; ++l) {
    double best = (SR[L] - SR[l]) + q.sojourn[L - 1];
    for (std::size_t j = l + 1; j <= L; ++j) best = std::max(best, (SR[j] - SR[l]) + (SD[L] - SD[j - 1]));
    rep.compare(top - h.lower[l], best);
  }
  return rep;
}

// D(D(I2,w2), D(I1,w1)) = D(D(I2,I1), w1) with w2 = R(I1,w1), compared past the policy's
// discarded prefix. Every queue is started by the policy.
inline IdentityReport check_intertwining_identity(const SeqWindow& I2, const SeqWindow& I1,
                                                  const SeqWindow& w1, const BoundaryPolicy& policy) {
  require_aligned(I2, I1, "check_intertwining_identity");
  require_aligned(I1, w1, "check_intertwining_identity");
  const auto j = [&](std::size_t s, const SeqWindow& a, const SeqWindow& b) {
    return policy.stage(s, a.mean(), b.mean()).initial_j(a, b);
  };
  const SeqWindow w2 = detail::raw_R(j(0, I1, w1), I1, w1);
  const SeqWindow a = detail::raw_D(j(1, I2, w2), I2, w2);
  const SeqWindow b = detail::raw_D(j(2, I1, w1), I1, w1);
  const SeqWindow lhs = detail::raw_D(j(3, a, b), a, b);
  const SeqWindow c = detail::raw_D(j(4, I2, I1), I2, I1);
  const SeqWindow rhs = detail::raw_D(j(5, c, w1), c, w1);
  IdentityReport rep{"intertwining-2", true, 0.0, 0, kIdentityTol};
  rep.compare(lhs, rhs, policy.first_kept(I1.offset(), I1.size()));
  return rep;
}

// For I = (I^1..I^n) and w^1, with w^j = R(I^{j-1}, w^{j-1}), checks for every k in 1..n-1
// D^(n+1)(I^n..I^1, w^1) = D^(k+1)(D^(n-k+1)[I^n..I^{k+1}, w^{k+1}], D(I^k,w^k), ..., D(I^1,w^1)).
inline IdentityReport check_intertwining_chain(const std::vector<SeqWindow>& I, const SeqWindow& w1,
                                               const BoundaryPolicy& policy) {
  const std::size_t n = I.size();
  if (n < 2) throw std::invalid_argument("check_intertwining_chain: needs n >= 2");
  for (const auto& s : I) require_aligned(s, w1, "check_intertwining_chain");
  std::size_t stage = 0;
  const auto D = [&](const SeqWindow& a, const SeqWindow& b) {
    const double j = policy.stage(stage++, a.mean(), b.mean()).initial_j(a, b);
    return detail::raw_D(j, a, b);
  };
  const auto fold = [&](const std::vector<SeqWindow>& z) {
    SeqWindow acc = z.front();
    for (std::size_t i = 1; i < z.size(); ++i) acc = D(acc, z[i]);
    return acc;
  };
  std::vector<SeqWindow> w{w1};  // w[j-1] = w^j
  for (std::size_t j = 2; j <= n; ++j) {
    const double jl = policy.stage(stage++, I[j - 2].mean(), w[j - 2].mean()).initial_j(I[j - 2], w[j - 2]);
    w.push_back(detail::raw_R(jl, I[j - 2], w[j - 2]));
  }
  std::vector<SeqWindow> full;  // I^n, ..., I^1, w^1
  for (std::size_t i = n; i-- > 0;) full.push_back(I[i]);
  full.push_back(w1);
  const SeqWindow lhs = fold(full);
  IdentityReport rep{"intertwining-chain", true, 0.0, 0, kIdentityTol};
  const auto first = policy.first_kept(w1.offset(), w1.size());
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<SeqWindow> inner;  // I^n..I^{k+1}, w^{k+1}
    for (std::size_t i = n; i-- > k;) inner.push_back(I[i]);
    inner.push_back(w[k]);
    std::vector<SeqWindow> outer{fold(inner)};
    for (std::size_t i = k; i-- > 0;) outer.push_back(D(I[i], w[i]));
    rep.compare(lhs, fold(outer), first);
  }
  return rep;
}

}  // namespace cgm
