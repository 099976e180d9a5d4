#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cgm/diagnostics.hpp"
#include "cgm/queueing.hpp"
#include "cgm/rng.hpp"
#include "cgm/stats.hpp"

namespace {

cgm::SeqWindow constant(std::int64_t offset, std::size_t n, double v) {
  return cgm::SeqWindow(offset, std::vector<double>(n, v));
}

cgm::SeqWindow expw(std::uint64_t seed, const std::string& label, std::int64_t offset, std::size_t n, double mean) {
  return cgm::sample_exp_window(offset, n, mean, {seed, label, 0});
}

}  // namespace

TEST(Lindley, FixedPoint) {
  const auto q = cgm::lindley_iterate(1.0, constant(0, 10, 3.0), constant(0, 10, 1.0));
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_DOUBLE_EQ(q.departures[k], 3.0);
    EXPECT_DOUBLE_EQ(q.sojourn[k], 1.0);
    EXPECT_DOUBLE_EQ(q.last_in_queue[k], 1.0);
  }
}

TEST(Lindley, ZeroServiceCopiesArrivals) {
  const auto I = expw(1, "I", 0, 50, 1.0);
  const auto q = cgm::lindley_iterate(0.0, I, constant(0, 50, 0.0));
  EXPECT_EQ(q.departures, I);
}

// Hand trace: J_{-1}=0, I=(2,1,3), w=(1,2,1).
// k=0: I~=1+2=3, J=1, w~=0. k=1: I~=2+0=2, J=2+0=2, w~=1. k=2: I~=1+1=2, J=1, w~=2.
TEST(Lindley, HandTrace) {
  const auto q = cgm::lindley_iterate(0.0, cgm::SeqWindow(0, {2, 1, 3}), cgm::SeqWindow(0, {1, 2, 1}));
  EXPECT_EQ(q.departures.values(), (std::vector<double>{3, 2, 2}));
  EXPECT_EQ(q.sojourn.values(), (std::vector<double>{1, 2, 1}));
  EXPECT_EQ(q.last_in_queue.values(), (std::vector<double>{0, 1, 2}));
}

TEST(Lindley, MismatchedWindowsThrow) {
  EXPECT_THROW(cgm::lindley_iterate(0.0, constant(0, 3, 1), constant(1, 3, 1)), std::invalid_argument);
  EXPECT_THROW(cgm::lindley_iterate(-1.0, constant(0, 3, 1), constant(0, 3, 1)), std::invalid_argument);
}

TEST(Lindley, ConservationOnRandomWindows) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto r = cgm::check_conservation(0.7, expw(s, "I", 0, 1000, 2.0), expw(s, "w", 0, 1000, 1.0));
    EXPECT_TRUE(r.pass) << r.max_error;
    EXPECT_EQ(r.checked, 2000u);
  }
}

TEST(Lindley, SupRouteAgreesOnShortWindows) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const std::size_t L = 1 + s % 20;
    const auto I = expw(s, "I", 5, L, 1.5), w = expw(s, "w", 5, L, 1.0);
    const double j = cgm::CounterRng({s, "j", 0}).exp_at(0, 1.0);
    const auto a = cgm::lindley_iterate(j, I, w), b = cgm::queue_by_sup(j, I, w);
    for (std::size_t k = 0; k < L; ++k) {
      EXPECT_NEAR(a.departures[k], b.departures[k], 1e-12);
      EXPECT_NEAR(a.sojourn[k], b.sojourn[k], 1e-12);
      EXPECT_NEAR(a.last_in_queue[k], b.last_in_queue[k], 1e-12);
    }
  }
}

TEST(QueueD, BurnInTrimsPrefix) {
  const auto I = expw(1, "I", 10, 100, 2.0), w = expw(1, "w", 10, 100, 1.0);
  const auto d = cgm::queue_D(I, w, cgm::BoundaryPolicy::burn_in(0.2));
  EXPECT_EQ(d.offset(), 30);
  EXPECT_EQ(d.size(), 80u);
  const auto full = cgm::lindley_iterate(0.0, I, w).departures;
  EXPECT_EQ(d, full.suffix_from(30));
}

TEST(QueueD, MonotoneFloorNesting) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto I = expw(s, "I", 0, 300, 3.0), w = expw(s, "w", 0, 300, 1.0), z = expw(s, "z", 0, 300, 2.0);
    std::vector<double> bigger(I.values());
    for (std::size_t k = 0; k < bigger.size(); ++k) bigger[k] += (k % 3 == 0) ? 0.5 : 0.0;
    const cgm::SeqWindow I2(0, bigger);
    const auto pol = cgm::BoundaryPolicy::given_j(0.3);
    const auto d = cgm::queue_D(I, w, pol), d2 = cgm::queue_D(I2, w, pol);
    for (std::size_t k = 0; k < 300; ++k) {
      ASSERT_GE(d2[k], d[k]);
      ASSERT_GE(d[k], w[k]);
    }
    // D^(3)(I, z, w) >= D^(2)(z, w).
    const auto d3 = cgm::queue_Dn({I, z, w}, cgm::BoundaryPolicy::given_j(0.0));
    const auto d22 = cgm::queue_Dn({z, w}, cgm::BoundaryPolicy::given_j(0.0));
    for (std::size_t k = 0; k < 300; ++k) ASSERT_GE(d3[k] + 1e-12, d22[k]);
  }
}

TEST(QueueDn, SmallCases) {
  const auto I = expw(2, "I", 0, 50, 2.0), w = expw(2, "w", 0, 50, 1.0);
  const auto pol = cgm::BoundaryPolicy::given_j(0.4);
  EXPECT_EQ(cgm::queue_Dn({I}, pol), I);
  EXPECT_EQ(cgm::queue_Dn({I, w}, pol), cgm::queue_D(I, w, pol));
  EXPECT_THROW(cgm::queue_Dn({}, pol), std::invalid_argument);
}

TEST(QueueD, UnstableInputWarns) {
  std::vector<std::string> msgs;
  cgm::ScopedWarningSink sink([&](const std::string& m) { msgs.push_back(m); });
  cgm::queue_D(expw(3, "I", 0, 100, 1.0), expw(3, "w", 0, 100, 2.0), cgm::BoundaryPolicy::given_j(0.0));
  EXPECT_FALSE(msgs.empty());
}

TEST(BoundaryPolicy, Validation) {
  EXPECT_THROW(cgm::BoundaryPolicy::burn_in(1.0), std::invalid_argument);
  EXPECT_THROW(cgm::BoundaryPolicy::given_j(-1.0), std::invalid_argument);
  EXPECT_THROW(cgm::BoundaryPolicy::stationary_exp({}, 2.0, 1.0), std::invalid_argument);
}

TEST(QueueD, StationaryDepartures) {
  const std::size_t n = 100000;
  const auto I = expw(4, "I", 0, n, 2.0), w = expw(4, "w", 0, n, 1.0);
  const auto q = cgm::queue_apply(I, w, cgm::BoundaryPolicy::stationary_exp({4, "b", 0}, 1.0, 2.0));
  const auto r = cgm::ks_one_sample({"departures", 4, ""}, q.departures.values(),
                                    [](double x) { return cgm::exp_cdf(x, 2.0); });
  EXPECT_TRUE(r.pass) << r.statistic;
  const auto rj = cgm::ks_one_sample({"sojourn", 4, ""}, q.sojourn.values(),
                                     [](double x) { return cgm::exp_cdf(x, 2.0); });
  EXPECT_TRUE(rj.pass) << rj.statistic;
  EXPECT_NEAR(q.last_in_queue.mean(), 1.0, 4.0 / std::sqrt(double(n)) * 3);
}

TEST(QueueD, SojournIndependentOfPastDepartures) {
  const std::size_t n = 100000;
  const auto I = expw(5, "I", 0, n, 2.0), w = expw(5, "w", 0, n, 1.0);
  const auto q = cgm::queue_apply(I, w, cgm::BoundaryPolicy::stationary_exp({5, "b", 0}, 1.0, 2.0));
  for (std::size_t lag : {0u, 1u, 3u}) {
    std::vector<double> a, b;
    for (std::size_t k = lag; k < n; ++k) {
      a.push_back(q.sojourn[k]);
      b.push_back(q.departures[k - lag]);
    }
    EXPECT_TRUE(cgm::correlation_test({"J-vs-dep", 5, ""}, a, b).pass) << lag;
  }
}

TEST(QueueD, WaitingTimeHitsZero) {
  int fails = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto I = expw(s, "I", 0, 10000, 1.0 / 0.9), w = expw(s, "w", 0, 10000, 1.0);
    const auto q = cgm::lindley_iterate(0.0, I, w);
    bool hit = false;
    for (std::size_t k = 1; k < 10000 && !hit; ++k) hit = q.sojourn[k] - w[k] == 0.0;
    fails += !hit;
  }
  EXPECT_LE(fails, 1);
}

TEST(Duality, LengthOne) {
  EXPECT_TRUE(cgm::check_duality(0.5, cgm::SeqWindow(1, {2.0}), cgm::SeqWindow(1, {0.7})).pass);
}

TEST(Duality, RandomWindows) {
  for (std::uint64_t s = 0; s < 30; ++s)
    for (std::size_t L : {10u, 1000u}) {
      const auto r = cgm::check_duality(0.3, expw(s, "I", 1, L, 2.0), expw(s, "w", 1, L, 1.0));
      EXPECT_TRUE(r.pass) << r.max_error;
    }
}

TEST(TIdentity, SingleIndexAndRandom) {
  EXPECT_TRUE(cgm::check_T_identity(0.5, cgm::SeqWindow(4, {2.0}), cgm::SeqWindow(4, {0.7})).pass);
  for (std::uint64_t s = 0; s < 20; ++s)
    for (std::size_t L : {10u, 500u}) {
      const auto r = cgm::check_T_identity(0.3, expw(s, "I", 0, L, 2.0), expw(s, "w", 0, L, 1.0));
      EXPECT_TRUE(r.pass) << r.max_error;
    }
}

TEST(StripH, VerticalEdgeAtStart) {
  const auto h = cgm::strip_lpp_H(1.25, expw(1, "I", 3, 5, 2.0), expw(1, "w", 3, 5, 1.0));
  EXPECT_EQ(h.m, 2);
  EXPECT_DOUBLE_EQ(h.at(2, 1) - h.at(2, 0), 1.25);
  EXPECT_EQ(h.table().rows(), 2u);
}

TEST(StripH, Formulas) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto r = cgm::check_strip_H(0.4, expw(s, "I", 1, 300, 2.0), expw(s, "w", 1, 300, 1.0));
    EXPECT_TRUE(r.pass) << r.max_error;
  }
}

TEST(Intertwining, ZeroService) {
  const auto r = cgm::check_intertwining_identity(expw(1, "I2", 0, 200, 3.0), expw(1, "I1", 0, 200, 2.0),
                                                  constant(0, 200, 0.0), cgm::BoundaryPolicy::given_j(0.0));
  EXPECT_TRUE(r.pass);
}

TEST(Intertwining, RandomTriples) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto r = cgm::check_intertwining_identity(expw(s, "I2", 0, 1000, 3.0), expw(s, "I1", 0, 1000, 2.0),
                                                    expw(s, "w", 0, 1000, 1.0), cgm::BoundaryPolicy::burn_in(0.2));
    EXPECT_TRUE(r.pass) << r.max_error;
  }
}

TEST(Intertwining, ChainForms) {
  for (std::uint64_t s = 0; s < 20; ++s)
    for (std::size_t n : {2u, 3u, 4u}) {
      std::vector<cgm::SeqWindow> I;
      for (std::size_t i = 0; i < n; ++i) I.push_back(expw(s, "I" + std::to_string(i), 0, 1000, 1.5 + i));
      const auto r = cgm::check_intertwining_chain(I, expw(s, "w", 0, 1000, 1.0), cgm::BoundaryPolicy::burn_in(0.3));
      EXPECT_TRUE(r.pass) << n << " " << r.max_error;
    }
}
