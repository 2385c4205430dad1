#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "photonlab/correlator.hpp"
#include "photonlab/emitters.hpp"
#include "photonlab/errors.hpp"

using namespace photonlab;

namespace {

std::vector<std::uint64_t> window_counts(const EventStream& s, Picoseconds window) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(s.duration() / window), 0);
  for (const auto& e : s) {
    const auto k = static_cast<std::size_t>(e.time / window);
    if (k < counts.size()) ++counts[k];
  }
  return counts;
}

std::pair<double, double> mean_var(const std::vector<std::uint64_t>& xs) {
  double m = 0.0;
  for (auto x : xs) m += static_cast<double>(x);
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (auto x : xs) v += (static_cast<double>(x) - m) * (static_cast<double>(x) - m);
  return {m, v / static_cast<double>(xs.size() - 1)};
}

}  // namespace

TEST(Coherent, RateAndExponentialGaps) {
  const CoherentSourceConfig cfg{1e6};
  const EventStream s = gen_coherent(cfg, 0.1, 1);
  ASSERT_TRUE(s.is_valid());
  EXPECT_NEAR(static_cast<double>(s.size()), 1e5, 4.0 * std::sqrt(1e5));

  // KS test of inter-arrival gaps against Exp(rate).
  std::vector<double> gaps;
  for (std::size_t i = 1; i < s.size(); ++i) gaps.push_back(static_cast<double>(s[i].time - s[i - 1].time));
  std::sort(gaps.begin(), gaps.end());
  double d = 0.0;
  const double n = static_cast<double>(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double f = 1.0 - std::exp(-gaps[i] * 1e-6);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  EXPECT_LT(d, 1.95 / std::sqrt(n));
}

TEST(Coherent, CountsArePoissonian) {
  const EventStream s = gen_coherent({2e6}, 0.05, 2);
  const auto [m, v] = mean_var(window_counts(s, 1'000'000));
  EXPECT_NEAR(m, 2.0, 0.05);
  EXPECT_NEAR(v / m, 1.0, 0.05);
}

TEST(Thermal, MeanRateAndSuperPoissonianVariance) {
  // For intensity correlation 1 + exp(-2|tau|/tc), counts in a window T have
  // Var = <N> + <N>^2 f, f = (2/T^2) int_0^T (T - t) exp(-2t/tc) dt.
  ThermalSourceConfig cfg;
  cfg.rate = 1e8;
  cfg.coherence_time = 10e-9;
  const EventStream s = gen_thermal(cfg, 2e-3, 3);
  ASSERT_TRUE(s.is_valid());
  const Picoseconds window = 10'000;
  const auto [m, v] = mean_var(window_counts(s, window));
  const double a = 2.0 / 10'000.0;
  const double t = static_cast<double>(window);
  const double f = 2.0 / (t * t) * (t / a - (1.0 - std::exp(-a * t)) / (a * a));
  EXPECT_NEAR(m, 1.0, 0.05);
  EXPECT_NEAR((v - m) / (m * m), f, 0.06);
}

TEST(Thermal, AutocorrelationShowsBunching) {
  ThermalSourceConfig cfg;
  cfg.rate = 5e7;
  cfg.coherence_time = 10e-9;
  const EventStream s = gen_thermal(cfg, 4e-3, 4);
  const auto h = autocorrelation_histogram(s, 1000, 40'000);
  const G2Estimate g2 = normalize_g2(h);
  for (const auto& b : g2.bins) {
    // Bin average of 1 + exp(-2|tau|/tc); the field grid (tc/20) lowers the
    // zero-delay peak by about 0.03 on top of that.
    double expected = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double t = static_cast<double>(b.tau) - 500.0 + 1000.0 * (i + 0.5) / 100.0;
      expected += analytic_g2(cfg, t * 1e-12) / 100.0;
    }
    EXPECT_NEAR(b.g2, expected, std::max(0.08, 4.0 * b.error)) << "tau=" << b.tau;
  }
}

TEST(TwoLevel, RateFollowsCycleTime) {
  const TwoLevelCwConfig cfg{2e8, 1e8, 0.25};
  const EventStream s = gen_two_level_cw(cfg, 1e-3, 5);
  const double expected = mean_rate(cfg) * 1e-3;
  EXPECT_NEAR(mean_rate(cfg), 0.25 * 2e8 * 1e8 / 3e8, 1e-6);
  EXPECT_NEAR(static_cast<double>(s.size()), expected, 5.0 * std::sqrt(expected));
}

TEST(TwoLevel, AntibunchingShapeSurvivesThinning) {
  for (double qe : {1.0, 0.2}) {
    const TwoLevelCwConfig cfg{1e8, 1e8, qe};
    const EventStream s = gen_two_level_cw(cfg, 0.02 / qe, 6);
    const G2Estimate g2 = normalize_g2(autocorrelation_histogram(s, 500, 30'000));
    for (const auto& b : g2.bins) {
      // Bin average of 1 - exp(-k|tau|) over the bin.
      const double k = 2e8 * 1e-12;
      const double lo = static_cast<double>(b.tau) - 250.0;
      const double hi = static_cast<double>(b.tau) + 250.0;
      double avg = 0.0;
      for (int i = 0; i < 100; ++i) {
        const double t = lo + (hi - lo) * (i + 0.5) / 100.0;
        avg += 1.0 - std::exp(-k * std::abs(t));
      }
      avg /= 100.0;
      EXPECT_NEAR(b.g2, avg, std::max(0.03, 4.0 * b.error)) << "qe=" << qe << " tau=" << b.tau;
    }
  }
}

TEST(Pulsed, PhotonNumberDistribution) {
  PulsedEmitterConfig cfg;
  cfg.lifetime = 100.0;
  cfg.reexcitation_delay = 200.0;
  cfg.emission_prob = 0.6;
  cfg.reexcitation_prob = 0.3;
  const EventStream s = gen_pulsed(cfg, 0.5e-3, 7);
  ASSERT_TRUE(s.is_valid());
  std::vector<std::uint64_t> counts = window_counts(s, cfg.rep_period);
  std::array<double, 3> hist{};
  for (auto c : counts) {
    ASSERT_LE(c, 2u);
    hist[c] += 1.0;
  }
  const double n = static_cast<double>(counts.size());
  const std::array<double, 3> p{1.0 - cfg.emission_prob, cfg.emission_prob * (1.0 - cfg.reexcitation_prob),
                                cfg.emission_prob * cfg.reexcitation_prob};
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(hist[k] / n, p[k], 5.0 * std::sqrt(p[k] * (1.0 - p[k]) / n)) << "k=" << k;
  }
  const PulseWindowG2 w = pulse_window_g2(s, cfg.rep_period);
  EXPECT_NEAR(w.g2, analytic_g2(cfg, 0.0), 0.03);
}

TEST(Pulsed, NoReexcitationMeansAtMostOnePhotonPerPulse) {
  PulsedEmitterConfig cfg;
  cfg.lifetime = 100.0;
  cfg.emission_prob = 0.05;
  const EventStream s = gen_pulsed(cfg, 1e-3, 8);
  for (auto c : window_counts(s, cfg.rep_period)) ASSERT_LE(c, 1u);
  const double expected = mean_rate(cfg) * 1e-3;
  EXPECT_NEAR(static_cast<double>(s.size()), expected, 5.0 * std::sqrt(expected));
  EXPECT_EQ(analytic_g2(cfg, 0.0), 0.0);
  EXPECT_EQ(analytic_g2(cfg, 13.2e-9), 1.0);
}

TEST(Pulsed, RequiresAtLeastOnePeriod) {
  EXPECT_THROW(gen_pulsed({}, 1e-9, 1), ConfigError);
  EXPECT_THROW(gen_fock_train({}, 1e-9, 1), ConfigError);
}

TEST(Fock, ExactlyNPhotonsPerPulse) {
  for (int n : {1, 2, 3, 5}) {
    FockPulseConfig cfg;
    cfg.n = n;
    cfg.lifetime = 50.0;
    const EventStream s = gen_fock_train(cfg, 0.2e-3, 9);
    const auto counts = window_counts(s, cfg.rep_period);
    const auto mismatched = std::count_if(counts.begin(), counts.end(), [n](auto c) { return c != static_cast<std::uint64_t>(n); });
    // Only a photon delayed past the period boundary can move (p ~ exp(-264)).
    EXPECT_EQ(mismatched, 0) << "n=" << n;
    EXPECT_NEAR(analytic_g2(cfg, 0.0), 1.0 - 1.0 / n, 1e-12);
  }
}

TEST(Emitters, SameSeedSameStreamDifferentSeedDifferent) {
  const std::vector<EmitterConfig> models{CoherentSourceConfig{1e6}, ThermalSourceConfig{1e6, 10e-9, 20},
                                          TwoLevelCwConfig{1e8, 1e8, 0.01}, PulsedEmitterConfig{},
                                          FockPulseConfig{}};
  for (const auto& m : models) {
    const EventStream a = generate(m, 1e-4, 10);
    const EventStream b = generate(m, 1e-4, 10);
    const EventStream c = generate(m, 1e-4, 11);
    EXPECT_TRUE(a.is_valid());
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_EQ(a.duration(), 100'000'000);
  }
}

TEST(Emitters, ValidationRejectsBadParameters) {
  EXPECT_THROW(CoherentSourceConfig{-1.0}.validate(), ConfigError);
  EXPECT_THROW((ThermalSourceConfig{1e5, 0.0, 20}.validate()), ConfigError);
  EXPECT_THROW((TwoLevelCwConfig{1e8, 1e8, 1.5}.validate()), ConfigError);
  EXPECT_THROW((TwoLevelCwConfig{0.0, 1e8, 1.0}.validate()), ConfigError);
  PulsedEmitterConfig p;
  p.emission_prob = 1.2;
  EXPECT_THROW(p.validate(), ConfigError);
  FockPulseConfig f;
  f.n = 0;
  EXPECT_THROW(f.validate(), ConfigError);
}

TEST(Background, MergedAndTagged) {
  const EventStream sig = gen_coherent({1e6}, 1e-3, 12);
  const EventStream both = add_background(sig, 5e5, 13);
  EXPECT_TRUE(both.is_valid());
  EXPECT_EQ(both.count(EventTag::signal), sig.size());
  EXPECT_NEAR(static_cast<double>(both.count(EventTag::background)), 500.0, 5.0 * std::sqrt(500.0));
}
