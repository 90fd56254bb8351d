#include "episim/rng.hpp"

#include "test_util.hpp"

using namespace episim;
using episim::testing::mean_se;

TEST(RngStream, SameKeySameSequence) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(RngStream, DistinctStreamsDiffer) {
  RngStream a(42, 7), b(42, 8), c(43, 7);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    same_ab += x == b();
    same_ac += x == c();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(RngStream, DeriveIsDeterministicAndDoesNotAdvanceParent) {
  RngStream p(1, 2);
  RngStream c1 = p.derive(3);
  RngStream c2 = p.derive(3);
  EXPECT_EQ(c1(), c2());
  RngStream q(1, 2);
  EXPECT_EQ(p(), q());
  EXPECT_NE(p.derive(3)(), p.derive(4)());
}

TEST(RngStream, UniformIntCoversRangeInclusive) {
  RngStream r(5, 0);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const long v = r.uniform_int(3, 9);
    ASSERT_GE(v, 3);
    ASSERT_LE(v, 9);
    ++hits[static_cast<std::size_t>(v - 3)];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(RngStream, BinomialEdgeCases) {
  RngStream r(1, 1);
  EXPECT_EQ(r.binomial(0, 0.5), 0);
  EXPECT_EQ(r.binomial(10, 0.0), 0);
  EXPECT_EQ(r.binomial(10, 1.0), 10);
  EXPECT_EQ(r.binomial(-3, 0.5), 0);
  EXPECT_EQ(r.poisson(0.0), 0);
}

TEST(RngStream, DistributionMeansWithinThreeSe) {
  RngStream r(9, 9);
  const int n = 20000;
  std::vector<double> bin, poi, gam, nb, geo, bet;
  for (int i = 0; i < n; ++i) {
    bin.push_back(static_cast<double>(r.binomial(1000, 0.3)));
    poi.push_back(static_cast<double>(r.poisson(12.5)));
    gam.push_back(r.gamma(4.0, 1.5));
    nb.push_back(static_cast<double>(r.negative_binomial(5.0, 0.5)));
    geo.push_back(static_cast<double>(r.geometric(0.2)));
    bet.push_back(r.beta(3.0, 7.0));
  }
  const auto check = [](const std::vector<double>& v, double expected) {
    const auto s = mean_se(v);
    EXPECT_NEAR(s.mean, expected, 3.0 * s.se) << "expected " << expected;
  };
  check(bin, 300.0);
  check(poi, 12.5);
  check(gam, 6.0);
  check(nb, 5.0);          // n (1-p) / p
  check(geo, 4.0);         // failures before first success: (1-p)/p
  check(bet, 0.3);
}
