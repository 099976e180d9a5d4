#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgm/diagnostics.hpp"
#include "cgm/lattice.hpp"

namespace cgm {

// Stands for -infinity; compared against, never added to.
inline constexpr double kNegInf = std::numeric_limits<double>::lowest();

class size_limit_error : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Last-passage values G over the rectangle [lo, lo + (cols-1, rows-1)].
// Forward tables hold G_{anchor,p} (anchor = lo); backward tables hold G_{p,anchor}
// (anchor = upper-right corner).
class GTable {
 public:
  GTable() = default;
  GTable(Point anchor, Point lo, std::size_t rows, std::size_t cols, bool forward,
         std::vector<double> values)
      : anchor_(anchor), lo_(lo), rows_(rows), cols_(cols), forward_(forward),
        values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) throw std::invalid_argument("GTable: size mismatch");
  }

  Point anchor() const { return anchor_; }
  Point origin() const { return anchor_; }
  Point lo() const { return lo_; }
  Point hi() const {
    return {lo_.x + static_cast<std::int64_t>(cols_) - 1, lo_.y + static_cast<std::int64_t>(rows_) - 1};
  }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool forward() const { return forward_; }
  const std::vector<double>& values() const { return values_; }

  bool contains(Point p) const { return leq(lo_, p) && leq(p, hi()); }

  double value(Point p) const {
    if (!contains(p)) throw std::out_of_range("GTable: point outside table");
    return values_[static_cast<std::size_t>(p.y - lo_.y) * cols_ + static_cast<std::size_t>(p.x - lo_.x)];
  }

  // kNegInf outside the table.
  double value_or_neg_inf(Point p) const { return contains(p) ? value(p) : kNegInf; }

 private:
  Point anchor_{};
  Point lo_{};
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  bool forward_ = true;
  std::vector<double> values_;
};

enum class Step : std::uint8_t { west, south };  // -e1, -e2

inline Point step_vector(Step s) { return s == Step::west ? Point{-1, 0} : Point{0, -1}; }

// Nearest-neighbor path from start following steps. For dual-lattice paths the stored
// integer point c stands for c - (1/2, 1/2).
struct GeodesicPath {
  Point start{};
  std::vector<Step> steps;
  bool truncated = false;
  bool dual = false;

  std::vector<Point> points() const {
    std::vector<Point> pts;
    pts.reserve(steps.size() + 1);
    pts.push_back(start);
    for (Step s : steps) pts.push_back(pts.back() + step_vector(s));
    return pts;
  }

  Point end() const {
    Point p = start;
    for (Step s : steps) p = p + step_vector(s);
    return p;
  }
};

// G_{origin,v} for all v >= origin inside the field.
inline GTable lpp_grid(const WeightField& w, Point origin) {
  if (!w.contains(origin)) throw std::invalid_argument("lpp_grid: origin outside field");
  const Point hi = w.corner();
  const auto cols = static_cast<std::size_t>(hi.x - origin.x + 1);
  const auto rows = static_cast<std::size_t>(hi.y - origin.y + 1);
  const std::size_t wc = w.cols();
  const double* Y = w.values().data() + w.index(origin);
  std::vector<double> g(rows * cols);
  for (std::size_t t = 0; t < rows; ++t) {
    const double* yrow = Y + t * wc;
    double* row = g.data() + t * cols;
    const double* below = t > 0 ? row - cols : nullptr;
    for (std::size_t k = 0; k < cols; ++k) {
      double best;
      if (k == 0 && t == 0) best = 0.0;
      else if (k == 0) best = below[0];
      else if (t == 0) best = row[k - 1];
      else best = row[k - 1] > below[k] ? row[k - 1] : below[k];
      row[k] = best + yrow[k];
    }
  }
  return GTable(origin, origin, rows, cols, true, std::move(g));
}

// G_{y,target} for all y <= target inside the field.
inline GTable lpp_grid_to(const WeightField& w, Point target) {
  if (!w.contains(target)) throw std::invalid_argument("lpp_grid_to: target outside field");
  const Point lo = w.origin();
  const auto cols = static_cast<std::size_t>(target.x - lo.x + 1);
  const auto rows = static_cast<std::size_t>(target.y - lo.y + 1);
  const std::size_t wc = w.cols();
  const double* Y = w.values().data();
  std::vector<double> g(rows * cols);
  for (std::size_t t = rows; t-- > 0;) {
    double* row = g.data() + t * cols;
    const double* above = t + 1 < rows ? row + cols : nullptr;
    for (std::size_t k = cols; k-- > 0;) {
      double best;
      const bool right = k + 1 < cols;
      if (!right && !above) best = 0.0;
      else if (!right) best = above[k];
      else if (!above) best = row[k + 1];
      else best = row[k + 1] > above[k] ? row[k + 1] : above[k];
      row[k] = best + Y[t * wc + k];
    }
  }
  return GTable(target, lo, rows, cols, false, std::move(g));
}

namespace detail {

inline double path_count(std::int64_t a, std::int64_t b) {
  // binomial(a+b, a) in floating point; only compared against a limit.
  double c = 1.0;
  for (std::int64_t i = 1; i <= a; ++i) c = c * static_cast<double>(b + i) / static_cast<double>(i);
  return c;
}

inline void enumerate_paths(const WeightField& w, Point p, Point v, double acc, double& best) {
  acc += w.at(p);
  if (p == v) {
    if (acc > best) best = acc;
    return;
  }
  if (p.x < v.x) enumerate_paths(w, p + e1, v, acc, best);
  if (p.y < v.y) enumerate_paths(w, p + e2, v, acc, best);
}

}  // namespace detail

inline constexpr double kMaxBruteForcePaths = 1e6;

// Direct maximum over all up-right paths from u to v.
inline double brute_force_lpp(const WeightField& w, Point u, Point v) {
  if (!leq(u, v)) throw std::invalid_argument("brute_force_lpp: u <= v fails");
  if (!w.contains(u) || !w.contains(v)) throw std::invalid_argument("brute_force_lpp: point outside field");
  if (detail::path_count(v.x - u.x, v.y - u.y) > kMaxBruteForcePaths)
    throw size_limit_error("brute_force_lpp: too many paths");
  double best = kNegInf;
  detail::enumerate_paths(w, u, v, 0.0, best);
  return best;
}

// (sqrt|x1| + sqrt|x2|)^2 for x in the closed third quadrant.
inline double shape_function(double x1, double x2) {
  if (x1 > 0.0 || x2 > 0.0) throw std::invalid_argument("shape_function: positive coordinate");
  const double s = std::sqrt(-x1) + std::sqrt(-x2);
  return s * s;
}

// Maximizing path from v back to the table anchor; ties step -e2.
inline GeodesicPath backtrack_geodesic(const GTable& g, Point v) {
  if (!g.forward()) throw std::invalid_argument("backtrack_geodesic: needs a forward table");
  if (!g.contains(v)) throw std::invalid_argument("backtrack_geodesic: point outside table");
  GeodesicPath path{v, {}, false, false};
  const Point o = g.anchor();
  Point p = v;
  while (!(p == o)) {
    Step s;
    if (p.x == o.x) s = Step::south;
    else if (p.y == o.y) s = Step::west;
    else s = g.value(p - e2) >= g.value(p - e1) ? Step::south : Step::west;
    path.steps.push_back(s);
    p = p + step_vector(s);
  }
  return path;
}

inline double path_weight(const WeightField& w, const GeodesicPath& path) {
  double s = 0.0;
  for (Point p : path.points()) s += w.at(p);
  return s;
}

// Increment processes of G^i_{(k,t)} = sup_j {G^i_{(j,0)} + G_{(j,1),(k,t)}} with j restricted
// to the window. Level 0 holds the initial increments with G^i_{(offset-1,0)} = 0. The weights
// cover levels 1..T over the window's columns. Levels t >= 1 hold indices offset+1 .. end-1.
inline std::vector<MultiConfig> stationary_halfplane_lpp(const MultiConfig& initial,
                                                         const WeightField& w) {
  initial.validate();
  const std::int64_t o = initial.offset();
  const std::size_t L = initial.length();
  const std::size_t T = w.rows();
  if (L == 0) throw std::invalid_argument("stationary_halfplane_lpp: empty window");
  if (w.origin().x != o || w.origin().y != 1 || w.cols() != L)
    throw std::invalid_argument("stationary_halfplane_lpp: weights must cover levels 1..T on the window");
  if (L < 2) throw std::invalid_argument("stationary_halfplane_lpp: window needs two indices");
  for (const auto& line : initial.lines)
    if (line.mean() <= 1.0) warn("stationary_halfplane_lpp: initial line mean <= 1");

  std::vector<MultiConfig> levels(T + 1);
  levels[0] = initial;
  for (std::size_t t = 1; t <= T; ++t) levels[t].rates = initial.rates;

  // cur[j] is G at column index o-1+j; kNegInf where undefined.
  std::vector<double> prev(L + 1), cur(L + 1);
  for (const auto& line : initial.lines) {
    prev[0] = 0.0;
    for (std::size_t j = 0; j < L; ++j) prev[j + 1] = prev[j] + line[j];
    for (std::size_t t = 1; t <= T; ++t) {
      const double* Y = w.values().data() + (t - 1) * L;
      cur[0] = kNegInf;
      for (std::size_t j = 1; j <= L; ++j) {
        const double left = cur[j - 1];
        const double down = prev[j];
        double best;
        if (left == kNegInf && down == kNegInf) best = kNegInf;
        else best = left > down ? left : down;
        cur[j] = best == kNegInf ? kNegInf : best + Y[j - 1];
      }
      // Column o is the first defined one at every level t >= 1.
      std::vector<double> inc;
      inc.reserve(L - 1);
      for (std::size_t j = 2; j <= L; ++j) inc.push_back(cur[j] - cur[j - 1]);
      levels[t].lines.emplace_back(o + 1, std::move(inc));
      std::swap(prev, cur);
    }
  }
  return levels;
}

}  // namespace cgm
