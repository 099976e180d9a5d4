#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cgm {

struct Point {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const Point&, const Point&) = default;
  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
};

inline constexpr Point e1{1, 0};
inline constexpr Point e2{0, 1};

// Coordinatewise order.
inline bool leq(Point a, Point b) { return a.x <= b.x && a.y <= b.y; }

inline std::int64_t l1_norm(Point a) {
  return (a.x < 0 ? -a.x : a.x) + (a.y < 0 ? -a.y : a.y);
}

struct PointHash {
  std::size_t operator()(Point p) const noexcept {
    auto h = static_cast<std::uint64_t>(p.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(p.y) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// Dense rectangle of vertex weights. Row t holds lattice points with y = origin.y + t;
// column k holds x = origin.x + k.
class WeightField {
 public:
  WeightField() = default;
  WeightField(Point origin, std::size_t rows, std::size_t cols, std::vector<double> values)
      : origin_(origin), rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows_ == 0 || cols_ == 0) throw std::invalid_argument("WeightField: empty dimensions");
    if (values_.size() != rows_ * cols_)
      throw std::invalid_argument("WeightField: dimensions do not match value count");
    for (double v : values_)
      if (!(v >= 0.0)) throw std::invalid_argument("WeightField: negative or NaN weight");
  }

  Point origin() const { return origin_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }

  // Inclusive upper-right corner.
  Point corner() const {
    return {origin_.x + static_cast<std::int64_t>(cols_) - 1,
            origin_.y + static_cast<std::int64_t>(rows_) - 1};
  }

  bool contains(Point p) const { return leq(origin_, p) && leq(p, corner()); }

  double at(Point p) const {
    if (!contains(p)) throw std::out_of_range("WeightField: point outside field");
    return values_[index(p)];
  }

  // Copy of the rectangle [lo, hi].
  WeightField sub(Point lo, Point hi) const {
    if (!contains(lo) || !contains(hi) || !leq(lo, hi)) throw std::invalid_argument("WeightField::sub: bad rectangle");
    const auto rows = static_cast<std::size_t>(hi.y - lo.y + 1);
    const auto cols = static_cast<std::size_t>(hi.x - lo.x + 1);
    std::vector<double> v;
    v.reserve(rows * cols);
    for (std::int64_t y = lo.y; y <= hi.y; ++y) {
      const auto first = values_.begin() + static_cast<std::ptrdiff_t>(index({lo.x, y}));
      v.insert(v.end(), first, first + static_cast<std::ptrdiff_t>(cols));
    }
    return WeightField(lo, rows, cols, std::move(v));
  }

  std::size_t index(Point p) const {
    return static_cast<std::size_t>(p.y - origin_.y) * cols_ +
           static_cast<std::size_t>(p.x - origin_.x);
  }

 private:
  Point origin_{};
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Finite slice [offset, offset + size) of a bi-infinite nonnegative sequence.
class SeqWindow {
 public:
  SeqWindow() = default;
  SeqWindow(std::int64_t offset, std::vector<double> values)
      : offset_(offset), values_(std::move(values)) {
    for (double v : values_)
      if (!(v >= 0.0)) throw std::invalid_argument("SeqWindow: negative or NaN entry");
  }

  std::int64_t offset() const { return offset_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  // One past the last index.
  std::int64_t end() const { return offset_ + static_cast<std::int64_t>(values_.size()); }
  const std::vector<double>& values() const { return values_; }

  double at(std::int64_t k) const {
    if (k < offset_ || k >= end()) throw std::out_of_range("SeqWindow: index outside window");
    return values_[static_cast<std::size_t>(k - offset_)];
  }
  double operator[](std::size_t i) const { return values_[i]; }

  // Entries with index >= first.
  SeqWindow suffix_from(std::int64_t first) const {
    if (first < offset_ || first > end()) throw std::out_of_range("SeqWindow: bad suffix");
    return SeqWindow(first, std::vector<double>(values_.begin() + (first - offset_), values_.end()));
  }

  double mean() const {
    if (values_.empty()) return 0.0;
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(values_.size());
  }

  friend bool operator==(const SeqWindow&, const SeqWindow&) = default;

 private:
  std::int64_t offset_ = 0;
  std::vector<double> values_;
};

inline bool aligned(const SeqWindow& a, const SeqWindow& b) {
  return a.offset() == b.offset() && a.size() == b.size();
}

inline void require_aligned(const SeqWindow& a, const SeqWindow& b, const char* what) {
  if (!aligned(a, b)) throw std::invalid_argument(std::string(what) + ": windows are not aligned");
}

// Ordered n-tuple of aligned windows; rates[i] is the mean of line i when known.
struct MultiConfig {
  std::vector<SeqWindow> lines;
  std::vector<double> rates;  // empty or one entry per line

  MultiConfig() = default;
  explicit MultiConfig(std::vector<SeqWindow> l, std::vector<double> r = {})
      : lines(std::move(l)), rates(std::move(r)) {
    validate();
  }

  void validate() const {
    if (lines.empty()) throw std::invalid_argument("MultiConfig: no lines");
    for (const auto& w : lines) require_aligned(w, lines.front(), "MultiConfig");
    if (!rates.empty() && rates.size() != lines.size())
      throw std::invalid_argument("MultiConfig: rates size differs from line count");
  }

  std::size_t n() const { return lines.size(); }
  std::int64_t offset() const { return lines.front().offset(); }
  std::size_t length() const { return lines.front().size(); }
  std::int64_t end() const { return lines.front().end(); }

  MultiConfig suffix_from(std::int64_t first) const {
    MultiConfig out;
    out.rates = rates;
    for (const auto& w : lines) out.lines.push_back(w.suffix_from(first));
    return out;
  }

  // True when line i-1 <= line i pointwise for every i.
  bool ordered() const {
    for (std::size_t i = 1; i < lines.size(); ++i)
      for (std::size_t k = 0; k < length(); ++k)
        if (lines[i - 1][k] > lines[i][k]) return false;
    return true;
  }
};

}  // namespace cgm
