#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cgm/lpp.hpp"
#include "cgm/multiclass.hpp"
#include "cgm/queueing.hpp"
#include "cgm/rng.hpp"
#include "cgm/stats.hpp"

namespace {

const cgm::WeightField kTwoByTwo({0, 0}, 2, 2, {1.0, 2.0, 3.0, 4.0});  // Y00, Y10, Y01, Y11

}  // namespace

TEST(LppGrid, SingleCell) {
  const cgm::WeightField w({4, -2}, 1, 1, {2.5});
  const auto g = cgm::lpp_grid(w, {4, -2});
  EXPECT_DOUBLE_EQ(g.value({4, -2}), 2.5);
}

TEST(LppGrid, TwoByTwo) {
  const auto g = cgm::lpp_grid(kTwoByTwo, {0, 0});
  EXPECT_DOUBLE_EQ(g.value({1, 1}), 8.0);
  EXPECT_DOUBLE_EQ(cgm::brute_force_lpp(kTwoByTwo, {0, 0}, {1, 1}), 8.0);
  const auto back = cgm::lpp_grid_to(kTwoByTwo, {1, 1});
  EXPECT_DOUBLE_EQ(back.value({0, 0}), 8.0);
}

TEST(LppGrid, OriginOutsideThrows) {
  EXPECT_THROW(cgm::lpp_grid(kTwoByTwo, {2, 0}), std::invalid_argument);
  EXPECT_THROW(cgm::lpp_grid_to(kTwoByTwo, {-1, 0}), std::invalid_argument);
}

TEST(LppGrid, MatchesBruteForceEverywhere) {
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto w = cgm::sample_exp_field({-3, 2}, 7, 7, 1.0, {21, "bf", r});
    const auto g = cgm::lpp_grid(w, {-3, 2});
    for (std::int64_t y = 2; y < 9; ++y)
      for (std::int64_t x = -3; x < 4; ++x) {
        const double bf = cgm::brute_force_lpp(w, {-3, 2}, {x, y});
        ASSERT_NEAR(g.value({x, y}), bf, 1e-9 * std::max(1.0, bf));
      }
  }
}

TEST(LppGrid, BackwardMatchesForward) {
  const auto w = cgm::sample_exp_field(12, 15, 1.0, {22, "fb", 0});
  const cgm::Point v{11, 9};
  const auto back = cgm::lpp_grid_to(w, v);
  for (std::int64_t y = 0; y <= 9; y += 3)
    for (std::int64_t x = 0; x <= 11; x += 2) {
      const auto fwd = cgm::lpp_grid(w, {x, y});
      EXPECT_NEAR(back.value({x, y}), fwd.value(v), 1e-9);
    }
}

TEST(LppGrid, MonotoneAndDiagonal) {
  const auto w = cgm::sample_exp_field(20, 20, 1.0, {23, "mono", 0});
  const auto g = cgm::lpp_grid(w, {0, 0});
  EXPECT_DOUBLE_EQ(g.value({0, 0}), w.at({0, 0}));
  for (std::int64_t y = 0; y < 20; ++y)
    for (std::int64_t x = 0; x < 20; ++x) {
      if (x > 0) {
        EXPECT_GE(g.value({x, y}), g.value({x - 1, y}));
      }
      if (y > 0) {
        EXPECT_GE(g.value({x, y}), g.value({x, y - 1}));
      }
    }
}

TEST(LppGrid, Superadditivity) {
  const auto w = cgm::sample_exp_field(15, 15, 1.0, {24, "sup", 0});
  const cgm::Point u{0, 0}, wpt{14, 14};
  const double guw = cgm::lpp_grid(w, u).value(wpt);
  for (std::int64_t a = 0; a < 15; a += 3)
    for (std::int64_t b = 0; b < 15; b += 4) {
      const cgm::Point v{a, b};
      const double lhs = cgm::lpp_grid(w, u).value(v) + cgm::lpp_grid(w, v).value(wpt) - w.at(v);
      EXPECT_GE(guw + 1e-12, lhs);
    }
}

TEST(BruteForce, Errors) {
  EXPECT_DOUBLE_EQ(cgm::brute_force_lpp(kTwoByTwo, {1, 0}, {1, 0}), 2.0);
  EXPECT_THROW(cgm::brute_force_lpp(kTwoByTwo, {1, 1}, {0, 0}), std::invalid_argument);
  EXPECT_THROW(cgm::brute_force_lpp(kTwoByTwo, {0, 0}, {2, 2}), std::invalid_argument);
  const auto big = cgm::sample_exp_field(20, 20, 1.0, {1, "big", 0});
  EXPECT_THROW(cgm::brute_force_lpp(big, {0, 0}, {19, 19}), cgm::size_limit_error);
}

TEST(Shape, Values) {
  EXPECT_DOUBLE_EQ(cgm::shape_function(-1, -1), 4.0);
  EXPECT_DOUBLE_EQ(cgm::shape_function(-1, 0), 1.0);
  EXPECT_DOUBLE_EQ(cgm::shape_function(-4, -1), 9.0);
  EXPECT_THROW(cgm::shape_function(1, -1), std::invalid_argument);
}

TEST(Backtrack, TwoByTwoUsesLargerBranch) {
  const auto g = cgm::lpp_grid(kTwoByTwo, {0, 0});
  const auto p = cgm::backtrack_geodesic(g, {1, 1});
  const auto pts = p.points();
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[1], (cgm::Point{0, 1}));
  EXPECT_DOUBLE_EQ(cgm::path_weight(kTwoByTwo, p), 8.0);
}

TEST(Backtrack, SingleCellEmpty) {
  const cgm::WeightField w({0, 0}, 1, 1, {1.0});
  EXPECT_TRUE(cgm::backtrack_geodesic(cgm::lpp_grid(w, {0, 0}), {0, 0}).steps.empty());
}

TEST(Backtrack, PathWeightEqualsTable) {
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto w = cgm::sample_exp_field(6, 6, 1.0, {25, "bt", r});
    const auto g = cgm::lpp_grid(w, {0, 0});
    for (std::int64_t y = 0; y < 6; ++y)
      for (std::int64_t x = 0; x < 6; ++x) {
        const auto p = cgm::backtrack_geodesic(g, {x, y});
        EXPECT_EQ(p.end(), (cgm::Point{0, 0}));
        EXPECT_NEAR(cgm::path_weight(w, p), g.value({x, y}), 1e-9);
      }
  }
}

TEST(Backtrack, TiesGoSouth) {
  const cgm::WeightField w({0, 0}, 2, 2, {1.0, 2.0, 2.0, 1.0});
  const auto p = cgm::backtrack_geodesic(cgm::lpp_grid(w, {0, 0}), {1, 1});
  EXPECT_EQ(p.steps.front(), cgm::Step::south);
}

TEST(Halfplane, LevelZeroUnchanged) {
  const auto init = cgm::sample_nu_rho({2.0}, 0, 50, {30, "hp", 0});
  const auto w = cgm::sample_exp_field({0, 1}, 3, 50, 1.0, {30, "hpw", 0});
  const auto levels = cgm::stationary_halfplane_lpp(init, w);
  ASSERT_EQ(levels.size(), 4u);
  EXPECT_EQ(levels[0].lines[0], init.lines[0]);
}

TEST(Halfplane, OneLevelIsQueueD) {
  const auto init = cgm::sample_nu_rho({2.0, 3.0}, 0, 200, {31, "hp", 0});
  const auto w = cgm::sample_exp_field({0, 1}, 4, 200, 1.0, {31, "hpw", 0});
  const auto levels = cgm::stationary_halfplane_lpp(init, w);
  for (std::size_t t = 1; t <= 4; ++t) {
    std::vector<double> y;
    for (std::int64_t k = 1; k < 200; ++k) y.push_back(w.at({k, static_cast<std::int64_t>(t)}));
    const cgm::SeqWindow omega(1, y);
    for (std::size_t i = 0; i < 2; ++i) {
      const auto prev = levels[t - 1].lines[i].suffix_from(1);
      const auto q = cgm::queue_D(prev, omega, cgm::BoundaryPolicy::given_j(w.at({0, static_cast<std::int64_t>(t)})));
      const auto& got = levels[t].lines[i];
      ASSERT_EQ(got.offset(), 1);
      for (std::int64_t k = 1; k < 200; ++k) EXPECT_NEAR(got.at(k), q.at(k), 1e-9);
    }
  }
}

TEST(Halfplane, StationaryAfterTenSteps) {
  const std::size_t L = 10012;
  const auto init = cgm::sample_nu_rho({2.0}, 0, L, {32, "hp", 0});
  const auto w = cgm::sample_exp_field({0, 1}, 10, L, 1.0, {32, "hpw", 0});
  const auto levels = cgm::stationary_halfplane_lpp(init, w);
  std::vector<double> inc;
  for (std::int64_t k = 1; k < static_cast<std::int64_t>(L); ++k) inc.push_back(levels[10].lines[0].at(k));
  const auto r = cgm::ks_one_sample({"halfplane", 32, ""}, inc, [](double x) { return cgm::exp_cdf(x, 2.0); },
                                    cgm::MaxDistance{0.02});
  EXPECT_TRUE(r.pass) << r.statistic;
}

TEST(Halfplane, RejectsBadShapes) {
  const auto init = cgm::sample_nu_rho({2.0}, 0, 5, {1, "x", 0});
  EXPECT_THROW(cgm::stationary_halfplane_lpp(init, cgm::sample_exp_field({0, 0}, 2, 5, 1.0, {})),
               std::invalid_argument);
  EXPECT_THROW(cgm::stationary_halfplane_lpp(init, cgm::sample_exp_field({0, 1}, 2, 4, 1.0, {})),
               std::invalid_argument);
}
