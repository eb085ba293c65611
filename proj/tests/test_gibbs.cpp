#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <set>

#include "dimershuffle/gibbs.hpp"
#include "dimershuffle/shuffle.hpp"

using namespace dimershuffle;

namespace {

std::set<std::pair<int, int>> nonempty_sectors(int L) {
  std::set<std::pair<int, int>> s;
  for (auto& c : enumerate_matchings(L)) {
    WindingPair w = winding_numbers(c);
    s.insert({w.d1, w.d2});
  }
  return s;
}

// Oracle: a horizontal edge (x,y) borders an 'a' face iff x is even, a
// vertical edge (x,y) iff y is even.
double raw_label_weight(const DimerConfig& c, double a) {
  const int n = c.lattice().side();
  double w = 1;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      if (c.has_h(x, y) && x % 2 == 0) w *= a;
      if (c.has_v(x, y) && y % 2 == 0) w *= a;
    }
  return w;
}

}  // namespace

TEST(Gibbs, ExactDistributionMatchesRawLabelOracle) {
  for (double a : {0.5, 0.2}) {
    for (auto [d1, d2] : nonempty_sectors(2)) {
      SectorDistribution d = exact_distribution(2, a, {d1, d2});
      std::map<std::uint64_t, double> oracle;
      double z = 0;
      for (auto& c : enumerate_matchings(2)) {
        WindingPair w = winding_numbers(c);
        if (w.d1 != d1 || w.d2 != d2) continue;
        oracle[c.key()] = raw_label_weight(c, a);
        z += oracle[c.key()];
      }
      ASSERT_EQ(oracle.size(), d.table.size());
      for (auto& [k, v] : oracle) EXPECT_NEAR(d.table.at(k), v / z, 1e-15);
    }
  }
}

TEST(Gibbs, UniformAtAEqualsOne) {
  SectorDistribution d = exact_distribution(2, 1.0, {0, 0});
  double p = d.table.begin()->second;
  for (auto& [k, v] : d.table) EXPECT_NEAR(v, p, 1e-15);
  EXPECT_NEAR(d.total_mass(), 1.0, 1e-14);
  EXPECT_THROW(exact_distribution(2, 1.0, {3, 0}), std::invalid_argument);
}

TEST(Gibbs, StationarityOfTInEverySector) {
  for (int L : {1, 2}) {
    for (double a : {1.0, 0.5, 0.2}) {
      for (auto [d1, d2] : nonempty_sectors(L)) {
        SectorDistribution pushed = push_forward_exact(L, a, {d1, d2});
        EXPECT_NEAR(pushed.total_mass(), 1.0, 1e-13);
        EXPECT_LT(total_variation(pushed, exact_distribution(L, a, {d1, d2})), 1e-12)
            << "L=" << L << " a=" << a << " sector " << d1 << "," << d2;
      }
    }
  }
}

TEST(Gibbs, FZeroMapsToNegatedSectorWithNextWeights) {
  for (double a : {1.0, 0.5, 0.2}) {
    ShuffleWeights sw = make_shuffle_weights(2, {a});
    for (auto [d1, d2] : nonempty_sectors(2)) {
      SectorDistribution mid = push_forward_F(exact_distribution(sw.w0, {d1, d2}), sw.w0, 0);
      EXPECT_LT(total_variation(mid, exact_distribution(sw.w1, {-d1, -d2})), 1e-12);
    }
  }
}

TEST(Gibbs, MisspecifiedCreationBreaksStationarity) {
  // Negative control: swap the creation probabilities of F_1.
  ShuffleWeights sw = make_shuffle_weights(2, {0.5});
  SectorDistribution mid = push_forward_F(exact_distribution(sw.w0, {0, 0}), sw.w0, 0);
  WeightField bad = sw.w1;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      FaceWeights& f = bad.at(i, j);
      std::swap(f.a, f.b);
      std::swap(f.c, f.d);
    }
  SectorDistribution end = push_forward_F(mid, bad, 1);
  SectorDistribution out{2, end.delta, {}};
  for (auto& [k, p] : end.table) out.table[translate(DimerConfig::from_key(2, k), -1, -1).key()] += p;
  EXPECT_GT(total_variation(out, exact_distribution(2, 0.5, {0, 0})), 1e-3);
}

TEST(Gibbs, MetropolisDetailedBalance) {
  const double a = 0.3;
  WeightField w = initial_weights(2, {a});
  SectorDistribution d = exact_distribution(w, {0, 0});
  for (auto& [key, p] : d.table) {
    DimerConfig c = DimerConfig::from_key(2, key);
    RotationSampler s(w, c, 0);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        auto r = elementary_rotation(c, {i, j});
        if (!r) continue;
        RotationSampler back(w, *r, 0);
        double lhs = p * s.acceptance({i, j});
        double rhs = d.table.at(r->key()) * back.acceptance({i, j});
        EXPECT_NEAR(lhs, rhs, 1e-15);
      }
  }
}

TEST(Gibbs, AcceptanceIsOneAtUniformWeights) {
  WeightField w = initial_weights(3, {1.0});
  RotationSampler s(w, staircase_config(3, {1, 0}), 1);
  for (int t = 0; t < 2000; ++t) {
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        double acc = s.acceptance({i, j});
        EXPECT_TRUE(acc == 0.0 || acc == 1.0);
      }
    s.propose();
    ASSERT_EQ(winding_numbers(s.config()), (WindingPair{1, 0}));
  }
}

TEST(Gibbs, SamplerMatchesExactDistribution) {
  // 10^6 sweeps, one sample every 20 sweeps to keep the counts close to independent.
  for (auto [a, delta] : {std::pair{0.5, WindingPair{0, 0}}, std::pair{0.3, WindingPair{1, 0}}}) {
    SectorDistribution d = exact_distribution(2, a, delta);
    RotationSampler s(initial_weights(2, {a}), staircase_config(2, delta), 2024);
    for (int t = 0; t < 800; ++t) s.sweep();
    std::map<std::uint64_t, long> counts;
    long n = 0;
    for (long t = 1; t <= 1000000; ++t) {
      s.sweep();
      if (t % 20 == 0) {
        counts[s.config().key()]++;
        ++n;
      }
    }
    double chi2 = 0;
    for (auto& [k, p] : d.table) {
      double e = p * n;
      double o = counts.count(k) ? counts[k] : 0;
      chi2 += (o - e) * (o - e) / e;
    }
    for (auto& [k, c] : counts) ASSERT_TRUE(d.table.count(k));
    boost::math::chi_squared dist(static_cast<double>(d.table.size() - 1));
    double pval = 1 - boost::math::cdf(dist, chi2);
    EXPECT_GT(pval, 0.001) << "chi2=" << chi2 << " cells=" << d.table.size();
  }
}

TEST(Gibbs, SlopeNormalization) {
  for (double a : {1.0, 0.4}) {
    for (auto [d1, d2] : nonempty_sectors(2)) {
      SectorDistribution d = exact_distribution(2, a, {d1, d2});
      double g1 = 0, g2 = 0, g11 = 0;
      for (auto& [k, p] : d.table) {
        DimerConfig c = DimerConfig::from_key(2, k);
        g1 += p * height_gradient(c, {0, 0}, {2, 0});
        g2 += p * height_gradient(c, {1, 1}, {1, 3});
        g11 += p * height_gradient(c, {0, 0}, {2, 2});
      }
      // n . rho / 2 with rho = Delta / L, in quarter units.
      EXPECT_NEAR(g1 / 4, 2 * (d1 / 2.0) / 2, 1e-14);
      EXPECT_NEAR(g2 / 4, 2 * (d2 / 2.0) / 2, 1e-14);
      EXPECT_NEAR(g11 / 4, (d1 + d2) / 2.0, 1e-14);
    }
  }
}

TEST(Gibbs, EdgeEstimatorAgreesWithExactExpectation) {
  SectorDistribution d = exact_distribution(2, 1.0, {0, 0});
  std::vector<DimerConfig> all;
  for (auto& [k, p] : d.table) all.push_back(DimerConfig::from_key(2, k));
  for (EdgeClass cls : {EdgeClass::e1, EdgeClass::e2, EdgeClass::e3, EdgeClass::e4}) {
    Estimate e = edge_occupation_estimate(all, cls);
    EXPECT_NEAR(e.mean, exact_edge_expectation(d, cls), 1e-14);
    EXPECT_GE(e.mean, 0.0);
    EXPECT_LE(e.mean, 1.0);
  }
  EXPECT_NEAR(exact_edge_expectation(d, EdgeClass::e1), exact_edge_expectation(d, EdgeClass::e2), 1e-14);
  EXPECT_THROW(edge_occupation_estimate({all[0]}, EdgeClass::e1), std::invalid_argument);
}

TEST(Gibbs, MeanIncrementIsTopMinusRightDensity) {
  // Exactly at L = 2: c1 - c2 = c3 - c4, and the mean height increment equals
  // P(top edge of an a face) - P(right edge of an a face) = c1 - c2 + rho2.
  for (double a : {1.0, 0.5, 0.2}) {
    ShuffleWeights sw = make_shuffle_weights(2, {a});
    for (auto [d1, d2] : nonempty_sectors(2)) {
      SectorDistribution d = exact_distribution(2, a, {d1, d2});
      double c[4];
      int idx = 0;
      for (EdgeClass cls : {EdgeClass::e1, EdgeClass::e2, EdgeClass::e3, EdgeClass::e4})
        c[idx++] = exact_edge_expectation(d, cls);
      EXPECT_NEAR(c[0] - c[1], c[2] - c[3], 1e-13);
      double inc = 0, top = 0;
      for (auto& [k, p] : d.table) {
        DimerConfig eta = DimerConfig::from_key(2, k);
        top += p * eta.has_h(0, 1);
        for_each_F_outcome(eta, sw.w0, 0, [&](const DimerConfig& o, double q) {
          inc += p * q * height_increment(eta, o, {0, 0}) / 4.0;
        });
      }
      EXPECT_NEAR(inc, top - c[1], 1e-13);
      EXPECT_NEAR(top - c[0], d2 / 2.0, 1e-13);
    }
  }
}
