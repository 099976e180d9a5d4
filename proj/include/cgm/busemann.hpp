#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cgm/lattice.hpp"
#include "cgm/lpp.hpp"
#include "cgm/queueing.hpp"
#include "cgm/rng.hpp"

namespace cgm {

// Third-quadrant unit l1 vector u and its parameter rho in (1, inf).
struct Direction {
  double u1 = -0.5;
  double u2 = -0.5;
  double rho = 2.0;
};

inline Direction direction_of_rho(double rho) {
  if (!(rho > 1.0) || !std::isfinite(rho)) throw std::invalid_argument("direction_of_rho: rho must lie in (1,inf)");
  const double d = (rho - 1.0) * (rho - 1.0);
  return {-1.0 / (1.0 + d), -d / (1.0 + d), rho};
}

inline Direction rho_of_direction(double u1, double u2) {
  if (!(u1 < 0.0 && u2 < 0.0)) throw std::invalid_argument("rho_of_direction: u must lie in the open third quadrant");
  if (std::fabs(-u1 - u2 - 1.0) > 1e-9) throw std::invalid_argument("rho_of_direction: |u|_1 must be 1");
  const double a = std::sqrt(-u1), b = std::sqrt(-u2);
  return {u1, u2, (a + b) / a};
}

// Edges ((k-1,level),(k,level)) and ((k,level-1),(k,level)) for k in [k_first, k_first + count).
struct LevelWindow {
  std::int64_t level = 0;
  std::int64_t k_first = 0;
  std::size_t count = 1;

  std::int64_t k_last() const { return k_first + static_cast<std::int64_t>(count) - 1; }
  Point center() const { return {k_first + static_cast<std::int64_t>(count / 2), level}; }
};

// Corner at l1 distance about N from p in direction u(rho).
inline Point far_corner(Point p, double rho, std::int64_t N) {
  const Direction d = direction_of_rho(rho);
  return {p.x + std::llround(static_cast<double>(N) * d.u1), p.y + std::llround(static_cast<double>(N) * d.u2)};
}

struct BusemannRhoEdges {
  double rho = 0.0;
  Point corner{};
  std::vector<double> horizontal;
  std::vector<double> vertical;
};

struct BusemannEdgeEstimates {
  LevelWindow window;
  std::int64_t N = 0;
  std::vector<double> weights;  // Y at (k, level)
  std::vector<BusemannRhoEdges> per_rho;
};

// Smallest field holding the window and every far corner.
inline WeightField busemann_field(const LevelWindow& lw, const std::vector<double>& rhos, std::int64_t N,
                                  const RngSpec& rng) {
  if (rhos.empty()) throw std::invalid_argument("busemann_field: no rho values");
  Point lo{lw.k_first - 1, lw.level - 1};
  for (double r : rhos) {
    const Point c = far_corner(lw.center(), r, N);
    lo.x = std::min(lo.x, c.x);
    lo.y = std::min(lo.y, c.y);
  }
  return sample_exp_field(lo, static_cast<std::size_t>(lw.level - lo.y + 1),
                          static_cast<std::size_t>(lw.k_last() - lo.x + 1), 1.0, rng);
}

inline void check_window_geometry(const WeightField& w, const LevelWindow& lw, Point corner, std::int64_t N) {
  if (!w.contains(corner)) throw std::invalid_argument("busemann: far corner outside the field");
  if (!w.contains({lw.k_last(), lw.level}))
    throw std::invalid_argument("busemann: window outside the field");
  if (lw.k_first - 1 < corner.x || lw.level - 1 < corner.y)
    throw std::invalid_argument("busemann: window not strictly northeast of the far corner");
  const double min_dist = 0.4 * static_cast<double>(N);
  for (std::int64_t k : {lw.k_first - 1, lw.k_last()}) {
    const Point p{k, lw.level - 1};
    if (static_cast<double>(l1_norm(p - corner)) < min_dist)
      throw std::invalid_argument("busemann: window closer than 0.4 N to the far corner");
  }
}

// Increments G_{v,x} - G_{v,x-e1} and G_{v,x} - G_{v,x-e2} from one far corner v per rho.
inline BusemannEdgeEstimates estimate_busemann_level(const WeightField& w, const LevelWindow& lw,
                                                     const std::vector<double>& rhos, std::int64_t N) {
  if (lw.count == 0) throw std::invalid_argument("estimate_busemann_level: empty window");
  if (N <= 0) throw std::invalid_argument("estimate_busemann_level: N must be positive");
  BusemannEdgeEstimates est;
  est.window = lw;
  est.N = N;
  for (double r : rhos) check_window_geometry(w, lw, far_corner(lw.center(), r, N), N);
  for (std::int64_t k = lw.k_first; k <= lw.k_last(); ++k) est.weights.push_back(w.at({k, lw.level}));
  for (double r : rhos) {
    const Point v = far_corner(lw.center(), r, N);
    const GTable g = lpp_grid(w, v);
    BusemannRhoEdges e{r, v, {}, {}};
    for (std::int64_t k = lw.k_first; k <= lw.k_last(); ++k) {
      const Point x{k, lw.level};
      const double gx = g.value(x);
      e.horizontal.push_back(gx - g.value(x - e1));
      e.vertical.push_back(gx - g.value(x - e2));
    }
    est.per_rho.push_back(std::move(e));
  }
  return est;
}

// (horizontal, vertical) increment into x; +inf marks a missing predecessor.
using IncrementFn = std::function<std::pair<double, double>(Point)>;

// Steps -e1 when the horizontal increment is smaller, otherwise -e2. Stops after max_steps or
// when both increments are infinite.
inline GeodesicPath busemann_geodesic(const IncrementFn& inc, Point x, std::size_t max_steps) {
  GeodesicPath path{x, {}, false, false};
  Point p = x;
  constexpr double inf = std::numeric_limits<double>::infinity();
  while (path.steps.size() < max_steps) {
    const auto [h, v] = inc(p);
    if (h == inf && v == inf) return path;
    const Step s = h < v ? Step::west : Step::south;
    path.steps.push_back(s);
    p = p + step_vector(s);
  }
  const auto [h, v] = inc(p);
  path.truncated = !(h == inf && v == inf);
  return path;
}

inline IncrementFn increments_of(const GTable& g) {
  if (!g.forward()) throw std::invalid_argument("increments_of: needs a forward table");
  return [&g](Point p) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double gp = g.value(p);
    const double h = g.contains(p - e1) ? gp - g.value(p - e1) : inf;
    const double v = g.contains(p - e2) ? gp - g.value(p - e2) : inf;
    return std::pair{h, v};
  };
}

inline GeodesicPath busemann_geodesic(const GTable& g, Point x, std::size_t max_steps) {
  if (!g.contains(x)) throw std::invalid_argument("busemann_geodesic: start outside table");
  return busemann_geodesic(increments_of(g), x, max_steps);
}

// First point of path1 lying on path2, provided both paths continue identically from there
// to the end of the shorter one.
inline std::optional<Point> coalescence_point(const GeodesicPath& p1, const GeodesicPath& p2) {
  const auto a = p1.points();
  const auto b = p2.points();
  std::unordered_map<Point, std::size_t, PointHash> where;
  for (std::size_t i = 0; i < b.size(); ++i) where.emplace(b[i], i);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto it = where.find(a[i]);
    if (it == where.end()) continue;
    std::size_t j = it->second;
    for (std::size_t s = i; s < a.size() && j < b.size(); ++s, ++j)
      if (!(a[s] == b[j])) return std::nullopt;
    return a[i];
  }
  return std::nullopt;
}

// Dual path phi^x: stored points c stand for c - (1/2,1/2). At each step the lattice cell
// y = c - (1,1) is classified by G_{y,x-e1} - G_{y,x-e2} (an infinite side counts as the order
// failing); a positive difference sends the path down, otherwise left.
inline GeodesicPath competition_interface(const WeightField& w, Point x, std::size_t max_steps) {
  if (!w.contains(x - e1) || !w.contains(x - e2) || !w.contains(x - Point{1, 1}))
    throw std::invalid_argument("competition_interface: site too close to the field edge");
  const GTable to_w = lpp_grid_to(w, x - e1);
  const GTable to_s = lpp_grid_to(w, x - e2);
  GeodesicPath path{x, {}, false, true};
  Point c = x;
  while (path.steps.size() < max_steps) {
    const Point y = c - Point{1, 1};
    if (!w.contains(y)) {
      path.truncated = true;
      return path;
    }
    const double a = to_w.value_or_neg_inf(y);
    const double b = to_s.value_or_neg_inf(y);
    bool down;
    if (a == kNegInf) down = false;
    else if (b == kNegInf) down = true;
    else down = a - b > 0.0;
    const Step s = down ? Step::south : Step::west;
    path.steps.push_back(s);
    c = c + step_vector(s);
  }
  path.truncated = true;
  return path;
}

// Geometric grid of `points` values on (lo, hi]: lo * (hi/lo)^{j/points}, j = 1..points.
inline std::vector<double> geometric_rho_grid(double lo = 1.05, double hi = 20.0, std::size_t points = 64) {
  if (!(lo > 1.0 && hi > lo) || points == 0) throw std::invalid_argument("geometric_rho_grid: bad range");
  std::vector<double> g;
  for (std::size_t j = 1; j <= points; ++j) g.push_back(lo * std::pow(hi / lo, static_cast<double>(j) / static_cast<double>(points)));
  g.back() = hi;
  return g;
}

inline void check_rho_star_corner(const WeightField& w, Point x, Point v) {
  if (!w.contains(v) || !w.contains(x) || !leq(v, x) || v == x)
    throw std::invalid_argument("rho_star: far corner outside field or not southwest of the site");
}

// True when the far-corner horizontal increment into x exceeds the vertical one at rho, i.e.
// the geodesic from the corner enters x from below. A corner in x's column counts as true and
// one in x's row as false.
inline bool horizontal_exceeds_vertical(const WeightField& w, Point x, double rho, std::int64_t N) {
  const Point v = far_corner(x, rho, N);
  check_rho_star_corner(w, x, v);
  const GTable g = lpp_grid(w, v);
  return g.value_or_neg_inf(x - e2) > g.value_or_neg_inf(x - e1);
}

// rho*(x) resolved on a sorted grid: the first grid value where the horizontal increment
// exceeds the vertical one, +inf when none does. Uses the backward tables to x-e1 and x-e2.
inline double estimate_rho_star(const WeightField& w, Point x, const std::vector<double>& grid, std::int64_t N) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("estimate_rho_star: grid must be sorted");
  const GTable to_w = lpp_grid_to(w, x - e1);
  const GTable to_s = lpp_grid_to(w, x - e2);
  for (double r : grid) {
    const Point v = far_corner(x, r, N);
    check_rho_star_corner(w, x, v);
    if (to_s.value_or_neg_inf(v) > to_w.value_or_neg_inf(v)) return r;
  }
  return std::numeric_limits<double>::infinity();
}

// Consecutive -e1 steps of the geodesic rule from x (ties step -e2).
inline std::size_t initial_run_length(const GTable& g, Point x, std::size_t cap = 1u << 20) {
  const auto inc = increments_of(g);
  std::size_t n = 0;
  Point p = x;
  while (n < cap) {
    const auto [h, v] = inc(p);
    if (!(h < v)) break;
    ++n;
    p = p - e1;
  }
  return n;
}

// Histogram of run lengths: entries 0..n_bins-1 and a final tail bin.
inline std::vector<std::uint64_t> initial_run_statistics(const std::vector<std::size_t>& runs, std::size_t n_bins) {
  std::vector<std::uint64_t> h(n_bins + 1, 0);
  for (std::size_t a : runs) ++h[std::min(a, n_bins)];
  return h;
}

// 1{I~_k = w_k}: customer k waits before service.
inline SeqWindow wait_indicator_run(const SeqWindow& w, const SeqWindow& I, const BoundaryPolicy& policy) {
  const QueueOutput q = queue_apply(I, w, policy);
  std::vector<double> ind(q.departures.size());
  const std::int64_t o = q.departures.offset();
  for (std::size_t i = 0; i < ind.size(); ++i)
    ind[i] = q.departures[i] == w.at(o + static_cast<std::int64_t>(i)) ? 1.0 : 0.0;
  return SeqWindow(o, std::move(ind));
}

// Number of consecutive ones at k, k-1, ...; nullopt if the run reaches the window start.
inline std::optional<std::size_t> backward_run(const SeqWindow& ind, std::int64_t k) {
  std::size_t n = 0;
  for (std::int64_t j = k; j >= ind.offset(); --j) {
    if (ind.at(j) == 0.0) return n;
    ++n;
  }
  return std::nullopt;
}

}  // namespace cgm
