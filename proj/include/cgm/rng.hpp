#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cgm/lattice.hpp"

namespace cgm {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Identifies one reproducible stream: (master seed, experiment label, replica index).
struct RngSpec {
  std::uint64_t master_seed = 0;
  std::string label;
  std::uint64_t replica = 0;

  RngSpec child(std::string_view sub) const {
    return {master_seed, label + "/" + std::string(sub), replica};
  }
  RngSpec with_replica(std::uint64_t r) const { return {master_seed, label, r}; }

  friend bool operator==(const RngSpec&, const RngSpec&) = default;
};

// Counter-based generator: draw c of a stream is a keyed bijection of c, so any draw can be
// addressed directly and streams do not depend on scheduling.
class CounterRng {
 public:
  explicit CounterRng(const RngSpec& spec) {
    const std::uint64_t a = mix64(spec.master_seed + 0x9E3779B97F4A7C15ULL);
    const std::uint64_t b = mix64(fnv1a64(spec.label) ^ 0xD1B54A32D192ED03ULL);
    const std::uint64_t c = mix64(spec.replica * 0xA24BAED4963EE407ULL + 0x8CB92BA72F3D8DD7ULL);
    k0_ = mix64(a ^ mix64(b + c));
    k1_ = mix64(k0_ ^ b ^ (c << 1)) | 1ULL;
  }

  std::uint64_t bits_at(std::uint64_t counter) const {
    return mix64(mix64(counter + k0_) ^ k1_);
  }

  // Uniform on (0,1]; 0 is excluded so that -log(u) is finite.
  double uniform_at(std::uint64_t counter) const {
    return static_cast<double>((bits_at(counter) >> 11) + 1) * 0x1.0p-53;
  }

  double exp_at(std::uint64_t counter, double mean) const {
    return -mean * std::log(uniform_at(counter));
  }

 private:
  std::uint64_t k0_ = 0;
  std::uint64_t k1_ = 0;
};

// Sequential view over a CounterRng.
class Stream {
 public:
  explicit Stream(const RngSpec& spec, std::uint64_t start = 0) : rng_(spec), counter_(start) {}

  std::uint64_t next_bits() { return rng_.bits_at(counter_++); }
  double uniform() { return rng_.uniform_at(counter_++); }
  double exp(double mean) { return rng_.exp_at(counter_++, mean); }
  std::uint64_t position() const { return counter_; }

 private:
  CounterRng rng_;
  std::uint64_t counter_;
};

inline std::uint64_t lattice_counter(std::int64_t x, std::int64_t y) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(y));
}

// The weight at lattice point p depends only on (rng, p), so fields over nested rectangles
// share their common weights.
inline WeightField sample_exp_field(Point origin, std::size_t rows, std::size_t cols, double mean,
                                    const RngSpec& rng) {
  if (!(mean > 0.0)) throw std::invalid_argument("sample_exp_field: mean must be positive");
  if (rows == 0 || cols == 0) throw std::invalid_argument("sample_exp_field: empty dimensions");
  const CounterRng gen(rng);
  std::vector<double> v(rows * cols);
  for (std::size_t t = 0; t < rows; ++t) {
    const auto y = origin.y + static_cast<std::int64_t>(t);
    for (std::size_t k = 0; k < cols; ++k)
      v[t * cols + k] = gen.exp_at(lattice_counter(origin.x + static_cast<std::int64_t>(k), y), mean);
  }
  return WeightField(origin, rows, cols, std::move(v));
}

inline WeightField sample_exp_field(std::size_t rows, std::size_t cols, double mean,
                                    const RngSpec& rng) {
  return sample_exp_field(Point{0, 0}, rows, cols, mean, rng);
}

// Entry k depends only on (rng, k).
inline SeqWindow sample_exp_window(std::int64_t offset, std::size_t length, double mean,
                                   const RngSpec& rng) {
  if (!(mean > 0.0)) throw std::invalid_argument("sample_exp_window: mean must be positive");
  if (length == 0) throw std::invalid_argument("sample_exp_window: empty window");
  const CounterRng gen(rng);
  std::vector<double> v(length);
  for (std::size_t i = 0; i < length; ++i)
    v[i] = gen.exp_at(static_cast<std::uint64_t>(offset + static_cast<std::int64_t>(i)), mean);
  return SeqWindow(offset, std::move(v));
}

}  // namespace cgm
