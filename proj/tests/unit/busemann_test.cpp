#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "cgm/busemann.hpp"
#include "cgm/exact_laws.hpp"
#include "cgm/lpp.hpp"
#include "cgm/rng.hpp"
#include "cgm/stats.hpp"

namespace {

// Forward table from a corner at distance N from the window center in direction u(rho).
struct Setup {
  cgm::WeightField w;
  cgm::LevelWindow lw;
};

Setup make_setup(std::uint64_t seed, double rho_lo, double rho_hi, std::int64_t N, std::size_t count) {
  cgm::LevelWindow lw{0, 0, count};
  return {cgm::busemann_field(lw, {rho_lo, rho_hi}, N, {seed, "bus", 0}), lw};
}

}  // namespace

TEST(Direction, RhoTwoIsDiagonal) {
  const auto d = cgm::direction_of_rho(2.0);
  EXPECT_DOUBLE_EQ(d.u1, -0.5);
  EXPECT_DOUBLE_EQ(d.u2, -0.5);
  EXPECT_NEAR(cgm::rho_of_direction(-0.5, -0.5).rho, 2.0, 1e-12);
}

TEST(Direction, RoundTrip) {
  cgm::Stream s({1, "dir", 0});
  for (int i = 0; i < 100; ++i) {
    const double rho = 1.0 + std::exp(6.0 * s.uniform() - 3.0);
    const auto d = cgm::direction_of_rho(rho);
    EXPECT_NEAR(-d.u1 - d.u2, 1.0, 1e-12);
    EXPECT_NEAR(cgm::rho_of_direction(d.u1, d.u2).rho, rho, 1e-12 * rho * rho);
  }
}

TEST(Direction, Rejects) {
  EXPECT_THROW(cgm::direction_of_rho(1.0), std::invalid_argument);
  EXPECT_THROW(cgm::rho_of_direction(-1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(cgm::rho_of_direction(-0.3, -0.3), std::invalid_argument);
}

TEST(BusemannLevel, RecoveryAndAdditivity) {
  const auto s = make_setup(2, 1.5, 4.0, 200, 30);
  const auto est = cgm::estimate_busemann_level(s.w, s.lw, {1.5, 2.0, 4.0}, 200);
  ASSERT_EQ(est.per_rho.size(), 3u);
  for (const auto& e : est.per_rho) {
    const auto g = cgm::lpp_grid(s.w, e.corner);
    for (std::size_t i = 0; i < 30; ++i) {
      EXPECT_NEAR(std::min(e.horizontal[i], e.vertical[i]), est.weights[i], 1e-9);
      // Around the square with upper-right corner x: h(x) + v(x - e1) = v(x) + h(x - e2).
      const cgm::Point x{static_cast<std::int64_t>(i), 0};
      const double v_w = g.value(x - cgm::e1) - g.value(x - cgm::e1 - cgm::e2);
      const double h_s = g.value(x - cgm::e2) - g.value(x - cgm::e1 - cgm::e2);
      EXPECT_NEAR(e.horizontal[i] + v_w, e.vertical[i] + h_s, 1e-9);
    }
  }
}

TEST(BusemannLevel, NestedCornersMonotone) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::vector<double> rhos{1.3, 1.7, 2.0, 3.0, 4.0};
    const auto s = make_setup(seed, 1.3, 4.0, 300, 40);
    const auto est = cgm::estimate_busemann_level(s.w, s.lw, rhos, 300);
    for (std::size_t r = 1; r < rhos.size(); ++r)
      for (std::size_t i = 0; i < 40; ++i) {
        EXPECT_LE(est.per_rho[r - 1].horizontal[i], est.per_rho[r].horizontal[i] + 1e-9);
        EXPECT_GE(est.per_rho[r - 1].vertical[i] + 1e-9, est.per_rho[r].vertical[i]);
      }
  }
}

TEST(BusemannLevel, WindowTooCloseThrows) {
  const cgm::LevelWindow lw{0, 0, 10};
  const auto w = cgm::busemann_field(lw, {2.0}, 100, {3, "close", 0});
  EXPECT_THROW(cgm::estimate_busemann_level(w, cgm::LevelWindow{0, 0, 200}, {2.0}, 100), std::invalid_argument);
  EXPECT_THROW(cgm::estimate_busemann_level(w, lw, {2.0}, 300), std::invalid_argument);
}

TEST(BusemannLevel, MarginalsAtModerateN) {
  std::vector<double> h, v;
  for (std::uint64_t r = 0; r < 40; ++r) {
    const cgm::LevelWindow lw{0, 0, 25};
    const auto w = cgm::busemann_field(lw, {2.0}, 400, {4, "marg", r});
    const auto est = cgm::estimate_busemann_level(w, lw, {2.0}, 400);
    h.insert(h.end(), est.per_rho[0].horizontal.begin(), est.per_rho[0].horizontal.end());
    v.insert(v.end(), est.per_rho[0].vertical.begin(), est.per_rho[0].vertical.end());
  }
  const auto rh = cgm::ks_one_sample({"h", 4, ""}, h, [](double x) { return cgm::exp_cdf(x, 2.0); }, cgm::MaxDistance{0.06});
  const auto rv = cgm::ks_one_sample({"v", 4, ""}, v, [](double x) { return cgm::exp_cdf(x, 2.0); }, cgm::MaxDistance{0.06});
  EXPECT_TRUE(rh.pass) << rh.statistic;
  EXPECT_TRUE(rv.pass) << rv.statistic;
}

TEST(Geodesic, MatchesBacktrackOnFiniteTable) {
  for (std::uint64_t r = 0; r < 10; ++r) {
    const auto w = cgm::sample_exp_field(40, 40, 1.0, {5, "geo", r});
    const auto g = cgm::lpp_grid(w, {0, 0});
    const cgm::Point x{39, 30};
    const auto a = cgm::busemann_geodesic(g, x, 1000);
    const auto b = cgm::backtrack_geodesic(g, x);
    EXPECT_EQ(a.steps, b.steps);
    EXPECT_FALSE(a.truncated);
  }
}

TEST(Geodesic, TruncationFlag) {
  const auto w = cgm::sample_exp_field(20, 20, 1.0, {5, "trunc", 0});
  const auto g = cgm::lpp_grid(w, {0, 0});
  const auto p = cgm::busemann_geodesic(g, {19, 19}, 5);
  EXPECT_EQ(p.steps.size(), 5u);
  EXPECT_TRUE(p.truncated);
}

TEST(Geodesic, SumIdentity) {
  const auto w = cgm::sample_exp_field(60, 60, 1.0, {6, "gb7", 0});
  const auto g = cgm::lpp_grid(w, {0, 0});
  const cgm::Point x{59, 59};
  const auto p = cgm::busemann_geodesic(g, x, 50);
  const auto pts = p.points();
  double sum = 0.0;
  for (cgm::Point q : pts) sum += w.at(q);
  // Busemann increment from the end to the start, plus the end weight.
  const double b = g.value(x) - g.value(pts.back());
  EXPECT_NEAR(sum, b + w.at(pts.back()), 1e-9);
  EXPECT_NEAR(cgm::lpp_grid(w, pts.back()).value(x), sum, 1e-9);
}

// Mean of endpoint / steps over replicas.
TEST(Geodesic, Direction) {
  const double rho = 3.0;
  const std::int64_t N = 600;
  const std::size_t steps = 400;
  const cgm::Point x{0, 0};
  const cgm::Point v = cgm::far_corner(x, rho, N);
  double sx = 0.0, sy = 0.0;
  const int reps = 10;
  for (int r = 0; r < reps; ++r) {
    const auto w = cgm::sample_exp_field(v, static_cast<std::size_t>(x.y - v.y + 1),
                                         static_cast<std::size_t>(x.x - v.x + 1), 1.0, {7, "dir", std::uint64_t(r)});
    const auto p = cgm::busemann_geodesic(cgm::lpp_grid(w, v), x, steps);
    sx += static_cast<double>(p.end().x) / steps / reps;
    sy += static_cast<double>(p.end().y) / steps / reps;
  }
  const auto d = cgm::direction_of_rho(rho);
  EXPECT_NEAR(sx, d.u1, 0.05);
  EXPECT_NEAR(sy, d.u2, 0.05);
}

TEST(Coalescence, IdenticalStarts) {
  const auto w = cgm::sample_exp_field(30, 30, 1.0, {8, "co", 0});
  const auto g = cgm::lpp_grid(w, {0, 0});
  const auto p = cgm::busemann_geodesic(g, {29, 29}, 100);
  EXPECT_EQ(cgm::coalescence_point(p, p), (cgm::Point{29, 29}));
}

TEST(Coalescence, NeighborsAndBusemannDifference) {
  int found = 0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const std::int64_t N = 300;
    const cgm::Point x{0, 0};
    const cgm::Point v = cgm::far_corner(x, 2.0, N);
    const auto w = cgm::sample_exp_field(v, static_cast<std::size_t>(1 - v.y + 1), static_cast<std::size_t>(-v.x + 1),
                                         1.0, {9, "coal", r});
    const auto g = cgm::lpp_grid(w, v);
    const auto p1 = cgm::busemann_geodesic(g, x, 150);
    const auto p2 = cgm::busemann_geodesic(g, x + cgm::e2, 151);
    const auto z = cgm::coalescence_point(p1, p2);
    if (!z) continue;
    ++found;
    const auto gz = cgm::lpp_grid(w, *z);
    EXPECT_NEAR(g.value(x + cgm::e2) - g.value(x), gz.value(x + cgm::e2) - gz.value(x), 1e-9);
  }
  EXPECT_GE(found, 9);
}

TEST(Coalescence, DisjointPaths) {
  cgm::GeodesicPath a{{0, 0}, {cgm::Step::west}, false, false};
  cgm::GeodesicPath b{{5, 5}, {cgm::Step::south}, false, false};
  EXPECT_FALSE(cgm::coalescence_point(a, b).has_value());
}

TEST(CompetitionInterface, FirstStep) {
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto w = cgm::sample_exp_field(10, 10, 1.0, {10, "cif", r});
    const cgm::Point x{9, 9};
    const auto phi = cgm::competition_interface(w, x, 1);
    const double a = cgm::lpp_grid_to(w, x - cgm::e1).value({8, 8});
    const double b = cgm::lpp_grid_to(w, x - cgm::e2).value({8, 8});
    ASSERT_EQ(phi.steps.size(), 1u);
    EXPECT_EQ(phi.steps[0], a > b ? cgm::Step::south : cgm::Step::west);
    EXPECT_TRUE(phi.dual);
  }
}

// A south step from dual point c crosses row c.y - 1 between columns c.x - 1 and c.x; cells of
// that row west of the crossing route through x-e1, the others through x-e2.
TEST(CompetitionInterface, SeparatesSubtrees) {
  for (std::uint64_t r = 0; r < 10; ++r) {
    const auto w = cgm::sample_exp_field(25, 25, 1.0, {11, "cif", r});
    const cgm::Point x{24, 24};
    const auto phi = cgm::competition_interface(w, x, 1000);
    EXPECT_TRUE(phi.truncated);
    const auto to_w = cgm::lpp_grid_to(w, x - cgm::e1);
    const auto to_s = cgm::lpp_grid_to(w, x - cgm::e2);
    cgm::Point c = phi.start;
    std::size_t rows = 0;
    for (cgm::Step s : phi.steps) {
      if (s == cgm::Step::south) {
        const std::int64_t y = c.y - 1;
        ++rows;
        for (std::int64_t xx = 0; xx < 24; ++xx) {
          const double a = to_w.value_or_neg_inf({xx, y}), b = to_s.value_or_neg_inf({xx, y});
          if (a == cgm::kNegInf || b == cgm::kNegInf) continue;
          EXPECT_EQ(a - b > 0.0, xx < c.x) << xx << "," << y;
        }
      }
      c = c + cgm::step_vector(s);
    }
    EXPECT_GT(rows, 0u);
  }
}

TEST(RhoStar, GridEstimateMatchesIndicator) {
  for (std::uint64_t r = 0; r < 5; ++r) {
    const std::int64_t N = 120;
    const cgm::Point x{0, 0};
    const auto grid = cgm::geometric_rho_grid(1.05, 20.0, 16);
    cgm::Point lo = x;
    for (double q : grid) {
      const auto c = cgm::far_corner(x, q, N);
      lo = {std::min(lo.x, c.x), std::min(lo.y, c.y)};
    }
    const auto w = cgm::sample_exp_field(lo, static_cast<std::size_t>(x.y - lo.y + 1),
                                         static_cast<std::size_t>(x.x - lo.x + 1), 1.0, {12, "rs", r});
    const double est = cgm::estimate_rho_star(w, x, grid, N);
    for (double q : grid) EXPECT_EQ(cgm::horizontal_exceeds_vertical(w, x, q, N), q >= est) << q << " " << est;
  }
}

TEST(RhoStar, GridShape) {
  const auto g = cgm::geometric_rho_grid();
  EXPECT_EQ(g.size(), 64u);
  EXPECT_GT(g.front(), 1.05);
  EXPECT_DOUBLE_EQ(g.back(), 20.0);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
}

TEST(RunLength, CountsWestSteps) {
  const auto w = cgm::sample_exp_field(30, 30, 1.0, {13, "run", 0});
  const auto g = cgm::lpp_grid(w, {0, 0});
  const cgm::Point x{29, 29};
  const auto p = cgm::busemann_geodesic(g, x, 100);
  std::size_t n = 0;
  while (n < p.steps.size() && p.steps[n] == cgm::Step::west) ++n;
  EXPECT_EQ(cgm::initial_run_length(g, x), n);
}

TEST(RunLength, Histogram) {
  const auto h = cgm::initial_run_statistics({0, 1, 1, 3, 9, 12}, 4);
  EXPECT_EQ(h, (std::vector<std::uint64_t>{1, 2, 0, 1, 2}));
}

// J_{-1}=0, I=(2,1,3), w=(1,2,1) gives I~=(3,2,2): only customer 1 waits.
TEST(WaitIndicator, HandTrace) {
  const auto ind = cgm::wait_indicator_run(cgm::SeqWindow(0, {1, 2, 1}), cgm::SeqWindow(0, {2, 1, 3}),
                                           cgm::BoundaryPolicy::given_j(0.0));
  EXPECT_EQ(ind.values(), (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(cgm::backward_run(ind, 1), std::optional<std::size_t>{1});
  EXPECT_EQ(cgm::backward_run(ind, 2), std::optional<std::size_t>{0});
  // J_{-1}=5 makes customers 0 and 1 wait, so the run from 1 reaches the window start.
  const auto busy = cgm::wait_indicator_run(cgm::SeqWindow(0, {1, 2, 1}), cgm::SeqWindow(0, {2, 1, 3}),
                                            cgm::BoundaryPolicy::given_j(5.0));
  EXPECT_EQ(busy.values(), (std::vector<double>{1, 1, 1}));
  EXPECT_FALSE(cgm::backward_run(busy, 1).has_value());
}

TEST(WaitIndicator, RunLawMatchesPmf) {
  const double rho = 2.0;
  const std::size_t n = 200000;
  const auto omega = cgm::sample_exp_window(0, n, 1.0, {14, "w", 0});
  const auto I = cgm::sample_exp_window(0, n, rho, {14, "I", 0});
  const auto ind = cgm::wait_indicator_run(omega, I, cgm::BoundaryPolicy::stationary_exp({14, "b", 0}, 1.0, rho));
  std::vector<std::size_t> runs;
  for (std::int64_t k = 100; k < static_cast<std::int64_t>(n); k += 40)
    if (auto a = cgm::backward_run(ind, k)) runs.push_back(*a);
  const auto counts = cgm::initial_run_statistics(runs, 9);
  const auto pmf = cgm::initial_run_pmf_table(1.0, rho, 8);
  const auto r = cgm::chi_square_pmf({"wait-run", 14, ""}, counts, pmf);
  EXPECT_TRUE(r.pass) << r.statistic << " vs " << r.threshold;
}

TEST(WaitIndicator, TwoParameterRunLaw) {
  const double lam = 1.5, rho = 3.0;
  const std::size_t n = 200000;
  const auto omega = cgm::sample_exp_window(0, n, lam, {15, "w", 0});
  const auto I = cgm::sample_exp_window(0, n, rho, {15, "I", 0});
  const auto ind = cgm::wait_indicator_run(omega, I, cgm::BoundaryPolicy::stationary_exp({15, "b", 0}, lam, rho));
  std::vector<std::size_t> runs;
  for (std::int64_t k = 100; k < static_cast<std::int64_t>(n); k += 40)
    if (auto a = cgm::backward_run(ind, k)) runs.push_back(*a);
  const auto r = cgm::chi_square_pmf({"wait-run2", 15, ""}, cgm::initial_run_statistics(runs, 9),
                                     cgm::initial_run_pmf_table(lam, rho, 8));
  EXPECT_TRUE(r.pass) << r.statistic << " vs " << r.threshold;
}
