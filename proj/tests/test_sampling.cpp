#include <doctest.h>

#include <cmath>
#include <vector>

#include "disttest/distribution.hpp"
#include "disttest/errors.hpp"
#include "disttest/rng.hpp"
#include "disttest/sampling.hpp"
#include "oracles/frozen.hpp"

using namespace disttest;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (const double x : vals) v[i++] = x;
  return v;
}

Configuration cfg_of(std::initializer_list<long long> counts) {
  Configuration c;
  c.counts = CountVector(static_cast<Eigen::Index>(counts.size()));
  Eigen::Index i = 0;
  for (const long long x : counts) {
    c.counts[i++] = x;
    c.total += x;
  }
  return c;
}

}  // namespace

TEST_SUITE("sampling") {

TEST_CASE("sample_binomial edges and moments") {
  RngStream rng(1);
  CHECK(sample_binomial(rng, 0, 0.5) == 0);
  CHECK(sample_binomial(rng, 100, 0.0) == 0);
  CHECK(sample_binomial(rng, 100, 1.0) == 100);
  CHECK(sample_binomial(rng, 100, -0.5) == 0);

  double sum = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    const long long v = sample_binomial(rng, 100, 0.3);
    REQUIRE(v >= 0);
    REQUIRE(v <= 100);
    sum += static_cast<double>(v);
  }
  // sigma of the mean: sqrt(100*0.3*0.7/20000) = 0.032; band is ~5 sigma.
  CHECK(sum / trials == doctest::Approx(30.0).epsilon(0.006));
}

TEST_CASE("sample_binomial normal-approximation regime") {
  RngStream rng(2);
  const long long trials = 2000000000;  // npq = 5e8, far above the switch point
  double sum = 0;
  const int reps = 200;
  for (int i = 0; i < reps; ++i) {
    const long long v = sample_binomial(rng, trials, 0.5);
    REQUIRE(v >= 0);
    REQUIRE(v <= trials);
    sum += static_cast<double>(v);
  }
  // sigma of the mean: sqrt(5e8 / 200) = 1581; band is ~6 sigma.
  CHECK(sum / reps == doctest::Approx(1e9).epsilon(1e-5));
}

TEST_CASE("type I sampling: edges") {
  RngStream rng(3);
  Source u4(DiscreteDistribution::uniform(4));
  const Configuration empty = sample_type1(u4, 0, rng);
  CHECK(empty.total == 0);
  CHECK(empty.counts.sum() == 0);
  CHECK(u4.drawn() == 0);

  Source pm(DiscreteDistribution::point_mass(5, 3));
  const Configuration c = sample_type1(pm, 7, rng);
  CHECK(c.counts[3] == 7);
  CHECK(c.total == 7);
  CHECK(pm.drawn() == 7);

  CHECK_THROWS_AS(sample_type1(u4, -1, rng), PreconditionError);
}

TEST_CASE("type I sampling: uniform counts stay in the 4-sigma band") {
  RngStream rng(4);
  Source u4(DiscreteDistribution::uniform(4));
  const long long s = 100000;
  const Configuration c = sample_type1(u4, s, rng);
  CHECK(c.counts.sum() == s);
  const double sigma = std::sqrt(static_cast<double>(s) * 0.25 * 0.75);
  for (int i = 0; i < 4; ++i) {
    CHECK(static_cast<double>(c.counts[i]) > s * 0.25 - 4 * sigma);
    CHECK(static_cast<double>(c.counts[i]) < s * 0.25 + 4 * sigma);
  }
}

TEST_CASE("type I engines agree in distribution and budget") {
  const DiscreteDistribution d = DiscreteDistribution::normalized(vec({1, 2, 3, 4}));
  const long long s = 40000;
  RngStream rng(5);

  Source src_alias(d), src_chain(d);
  const Configuration a = sample_type1(src_alias, s, rng, Type1Engine::alias);
  const Configuration b = sample_type1(src_chain, s, rng, Type1Engine::chain);
  CHECK(a.counts.sum() == s);
  CHECK(b.counts.sum() == s);
  CHECK(src_alias.drawn() == static_cast<std::uint64_t>(s));
  CHECK(src_chain.drawn() == static_cast<std::uint64_t>(s));
  for (int i = 0; i < 4; ++i) {
    const double mean = s * d.probs[i];
    const double sigma = std::sqrt(s * d.probs[i] * (1 - d.probs[i]));
    CHECK(std::abs(static_cast<double>(a.counts[i]) - mean) < 5 * sigma);
    CHECK(std::abs(static_cast<double>(b.counts[i]) - mean) < 5 * sigma);
  }

  // automatic switches to the chain above 16n draws; distribution must hold.
  Source src_auto(d);
  const Configuration c = sample_type1(src_auto, s, rng, Type1Engine::automatic);
  CHECK(c.counts.sum() == s);
  CHECK(src_auto.drawn() == static_cast<std::uint64_t>(s));
  for (int i = 0; i < 4; ++i) {
    const double mean = s * d.probs[i];
    const double sigma = std::sqrt(s * d.probs[i] * (1 - d.probs[i]));
    CHECK(std::abs(static_cast<double>(c.counts[i]) - mean) < 5 * sigma);
  }
}

TEST_CASE("type II sampling: edges and the exact half-half cell") {
  RngStream rng(6);
  const DiscreteDistribution half = DiscreteDistribution::from_probs(vec({0.5, 0.5}));
  const Configuration empty = sample_type2(half, 0, rng);
  CHECK(empty.total == 0);

  // Pr[counts = (1,1)] at s = 3 is (C(3,1)/2 * 1/4)^2 = 9/64, checked exactly
  // and by Monte Carlo.
  CHECK(config_prob_type2(half, cfg_of({1, 1}), 3) ==
        doctest::Approx(oracle::kType2HalfHalfCfg11S3).epsilon(1e-12));
  const int trials = 200000;
  int hits_11 = 0;
  for (int i = 0; i < trials; ++i) {
    const Configuration c = sample_type2(half, 3, rng);
    if (c.counts[0] == 1 && c.counts[1] == 1) ++hits_11;
  }
  const double freq = static_cast<double>(hits_11) / trials;
  // sigma = sqrt(0.1406 * 0.8594 / 2e5) = 0.00078; band is ~6 sigma.
  CHECK(freq > oracle::kType2HalfHalfCfg11S3 - 0.005);
  CHECK(freq < oracle::kType2HalfHalfCfg11S3 + 0.005);
}

TEST_CASE("configuration probabilities: frozen cells") {
  const DiscreteDistribution u2 = DiscreteDistribution::uniform(2);
  CHECK(config_prob_type1(u2, cfg_of({2, 1})) ==
        doctest::Approx(oracle::kType1Uniform2Cfg21).epsilon(1e-12));

  const DiscreteDistribution d = DiscreteDistribution::from_probs(vec({0.2, 0.3, 0.5}));
  CHECK(config_prob_type1(d, cfg_of({1, 2, 0})) ==
        doctest::Approx(oracle::kType1P235Cfg120).epsilon(1e-12));
}

TEST_CASE("all-zero type II configuration has the closed-form mass") {
  const DiscreteDistribution u4 = DiscreteDistribution::uniform(4);
  const double expected = std::pow(0.75, 12);  // (1 - 1/4)^(4*3)
  CHECK(config_prob_type2(u4, cfg_of({0, 0, 0, 0}), 3) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("configuration probabilities normalize") {
  const DiscreteDistribution d = DiscreteDistribution::from_probs(vec({0.2, 0.3, 0.5}));
  const long long s = 4;

  double type1_sum = 0;
  for (const Configuration& c : enumerate_configurations(3, s))
    type1_sum += config_prob_type1(d, c);
  CHECK(type1_sum == doctest::Approx(1.0).epsilon(1e-12));

  double type2_sum = 0;
  for (long long a = 0; a <= s; ++a)
    for (long long b = 0; b <= s; ++b)
      for (long long c = 0; c <= s; ++c)
        type2_sum += config_prob_type2(d, cfg_of({a, b, c}), s);
  CHECK(type2_sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("configuration probabilities: zero bins, bad counts, scale guard") {
  const DiscreteDistribution d = DiscreteDistribution::from_probs(vec({1.0, 0.0}));
  CHECK(config_prob_type1(d, cfg_of({1, 1})) == 0.0);
  CHECK(config_prob_type2(d, cfg_of({0, 1}), 2) == 0.0);
  CHECK(config_prob_type2(d, cfg_of({1, 0}), 2) == 0.0);  // p = 1 bin missed once

  CHECK_THROWS_AS(config_prob_type2(d, cfg_of({3, 0}), 2), DimensionError);
  CHECK_THROWS_AS(config_prob_type1(DiscreteDistribution::uniform(3), cfg_of({1, 1})),
                  DimensionError);

  Configuration big;
  big.counts = CountVector::Zero(2000);
  big.counts[0] = 1000;
  big.total = 1000;
  CHECK_THROWS_AS(config_prob_type1(DiscreteDistribution::uniform(2000), big),
                  PreconditionError);
}

TEST_CASE("enumerate_configurations: counts and guard") {
  const auto configs = enumerate_configurations(3, 4);
  CHECK(configs.size() == 15);  // C(6, 2)
  for (const Configuration& c : configs) {
    CHECK(c.counts.sum() == 4);
    CHECK(c.total == 4);
  }
  CHECK(enumerate_configurations(1, 5).size() == 1);
  CHECK_THROWS_AS(enumerate_configurations(30, 30), PreconditionError);
  CHECK_THROWS_AS(enumerate_configurations(0, 1), PreconditionError);
}

TEST_CASE("pattern sampling: degenerate configurations") {
  RngStream rng(7);
  Source u4(DiscreteDistribution::uniform(4));

  CHECK(pattern_sample(cfg_of({0, 0, 0, 0}), u4, rng) == 0);
  CHECK(u4.drawn() == 0);  // max count 0 means no draws at all

  // All counts 1: the single phase draw is always selected.
  for (int i = 0; i < 50; ++i) CHECK(pattern_sample(cfg_of({1, 1, 1, 1}), u4, rng) == 1);
  CHECK(u4.drawn() == 50);
}

TEST_CASE("pattern sampling: expected hits match sum(c_i p_i)") {
  RngStream rng(8);
  Source u4(DiscreteDistribution::uniform(4));
  const Configuration c = cfg_of({2, 0, 0, 0});
  const int trials = 100000;
  long long total = 0;
  for (int i = 0; i < trials; ++i) total += pattern_sample(c, u4, rng);
  const double mean = static_cast<double>(total) / trials;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));  // band 0.01, ~5 sigma
  CHECK(u4.drawn() == static_cast<std::uint64_t>(2 * trials));
}

TEST_CASE("pattern totals: both engines on the exactly-solvable cell") {
  // cfg = (2,1) over uniform(2): every invocation yields 1 + Bernoulli(1/2).
  const Configuration c = cfg_of({2, 1});
  const DiscreteDistribution u2 = DiscreteDistribution::uniform(2);
  const int reps = 4000;

  for (const PatternEngine eng : {PatternEngine::draws, PatternEngine::binomial}) {
    RngStream rng(9);
    Source src(u2);
    long long total = 0;
    for (int i = 0; i < reps; ++i) {
      const long long v = pattern_sample_total(c, src, 1, rng, eng);
      REQUIRE(v >= 1);
      REQUIRE(v <= 2);
      total += v;
    }
    const double mean = static_cast<double>(total) / reps;
    // sigma of the mean: 0.5/sqrt(4000) = 0.0079; band is ~4 sigma.
    CHECK(mean == doctest::Approx(1.5).epsilon(0.022));
    CHECK(src.drawn() == static_cast<std::uint64_t>(2 * reps));
  }
}

TEST_CASE("pattern totals: engine equivalence on an asymmetric configuration") {
  const Configuration c = cfg_of({3, 2, 2, 1, 1, 0, 0, 0});
  const DiscreteDistribution t =
      DiscreteDistribution::normalized(vec({1, 2, 3, 4, 5, 6, 7, 8}));
  double exact = 0;
  for (int i = 0; i < 8; ++i) exact += static_cast<double>(c.counts[i]) * t.probs[i];

  const long long reps = 2000;
  for (const PatternEngine eng : {PatternEngine::draws, PatternEngine::binomial}) {
    RngStream rng(10);
    Source src(t);
    const long long total = pattern_sample_total(c, src, reps, rng, eng);
    const double mean = static_cast<double>(total) / static_cast<double>(reps);
    // per-rep variance is at most 3 * 0.25; 5 sigma of the mean is ~0.1.
    CHECK(std::abs(mean - exact) < 0.1);
    CHECK(src.drawn() == static_cast<std::uint64_t>(reps * c.max_count()));
  }

  RngStream rng(11);
  Source src(t);
  CHECK(pattern_sample_total(c, src, 0, rng) == 0);
}

TEST_CASE("signature extraction on the worked four-element example") {
  // P-training drew elements {1, 2}; Q-training drew {2, 3}; testing drew {1}.
  const Configuration train_p = cfg_of({0, 1, 1, 0});
  const Configuration train_q = cfg_of({0, 0, 1, 1});
  const Configuration test = cfg_of({0, 1, 0, 0});
  const SignatureHistogram h = extract_signatures(train_p, train_q, test);

  CHECK(h.n == 4);
  CHECK(h.s == 1);
  CHECK(h.count(1, 0, 1) == 1);
  CHECK(h.count(1, 1, 0) == 1);
  CHECK(h.count(0, 1, 0) == 1);
  CHECK(h.count(0, 0, 0) == 1);
  CHECK(h.m.size() == 4);

  CHECK(hits(h, 1, 0) == 1);
  CHECK(hits(h, 0, 1) == 0);
  CHECK(hits(h, 0, 0) == 0);
  CHECK(h.marginal(1, 0) == 1);
  CHECK(h.marginal(1, 1) == 1);

  CHECK_THROWS_AS(extract_signatures(train_p, train_q, cfg_of({0, 0, 0})),
                  DimensionError);
}

TEST_CASE("signature invariants on sampled games") {
  RngStream rng(12);
  const DiscreteDistribution d = DiscreteDistribution::uniform(64);
  Source sp(d), sq(d), st(d);
  const long long s = 40;
  const Configuration train_p = sample_type1(sp, s, rng);
  const Configuration train_q = sample_type1(sq, s, rng);
  const Configuration test = sample_type1(st, s, rng);
  const SignatureHistogram h = extract_signatures(train_p, train_q, test);

  long long m_total = 0, weighted_test = 0, weighted_p = 0, hits_total = 0;
  for (const auto& [key, cnt] : h.m) {
    m_total += cnt;
    weighted_test += key[2] * cnt;
    weighted_p += key[0] * cnt;
  }
  CHECK(m_total == 64);            // every element lands in exactly one bucket
  CHECK(weighted_test == s);       // testing draws are conserved
  CHECK(weighted_p == s);          // so are training draws
  CHECK(h.s == s);

  // hits over all training signatures also conserve the testing draws.
  for (long long i = 0; i <= 5; ++i)
    for (long long j = 0; j <= 5; ++j) hits_total += hits(h, i, j);
  CHECK(hits_total == s);
}

TEST_CASE("signature reconstruction holds in the no-collision regime") {
  // Hand-built in-regime game: s = 4 testing draws.
  const Configuration train_p = cfg_of({1, 0, 2, 0, 0});
  const Configuration train_q = cfg_of({0, 1, 2, 0, 0});
  const Configuration test = cfg_of({1, 0, 0, 2, 1});
  const SignatureHistogram h = extract_signatures(train_p, train_q, test);
  const SignatureReconstruction rec = reconstruct_sigs(h, 4);
  REQUIRE(rec.applicable);
  CHECK(rec.all_match());
  CHECK(rec.identities.size() == 6);
  for (const SignatureIdentity& id : rec.identities) CHECK(id.reconstructed == id.direct);
}

TEST_CASE("signature reconstruction refuses out-of-regime games") {
  // A testing count of 3 leaves the regime regardless of training counts.
  const SignatureHistogram bad =
      extract_signatures(cfg_of({1}), cfg_of({0}), cfg_of({3}));
  const SignatureReconstruction rec = reconstruct_sigs(bad, 3);
  CHECK_FALSE(rec.applicable);
  CHECK(rec.violating == std::array<long long, 3>{1, 0, 3});
  CHECK_FALSE(rec.all_match());

  // Testing count 2 on a trained element also violates the regime.
  const SignatureHistogram bad2 =
      extract_signatures(cfg_of({1, 1}), cfg_of({0, 1}), cfg_of({2, 0}));
  CHECK_FALSE(reconstruct_sigs(bad2, 2).applicable);
}

TEST_CASE("signature reconstruction with an empty testing phase") {
  const SignatureHistogram h =
      extract_signatures(cfg_of({2, 1, 0}), cfg_of({0, 1, 2}), cfg_of({0, 0, 0}));
  const SignatureReconstruction rec = reconstruct_sigs(h, 0);
  REQUIRE(rec.applicable);
  CHECK(rec.all_match());
}

TEST_CASE("bridge check matches the frozen enumeration") {
  const DiscreteDistribution u18 = DiscreteDistribution::uniform(18);
  const BridgeCheck b93 = bridge_check(u18, 9, 3);
  CHECK(b93.in_regime == oracle::kBridgeS9Support3Count);
  CHECK_FALSE(b93.vacuous);
  CHECK(b93.all_within);
  CHECK(b93.min_ratio == doctest::Approx(oracle::kBridgeS9Support3Ratio).epsilon(1e-9));
  CHECK(b93.max_ratio == doctest::Approx(oracle::kBridgeS9Support3Ratio).epsilon(1e-9));
  CHECK(b93.lo_bound == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b93.hi_bound == doctest::Approx(810.0).epsilon(1e-12));

  const BridgeCheck b94 = bridge_check(u18, 9, 4);
  CHECK(b94.in_regime == oracle::kBridgeS9Support4Count);
  CHECK(b94.all_within);
  CHECK(b94.min_ratio == doctest::Approx(oracle::kBridgeS9Support4Min).epsilon(1e-9));
  CHECK(b94.max_ratio == doctest::Approx(oracle::kBridgeS9Support4Max).epsilon(1e-9));

  const DiscreteDistribution u24 = DiscreteDistribution::uniform(24);
  const BridgeCheck b124 = bridge_check(u24, 12, 4);
  CHECK(b124.in_regime == oracle::kBridgeS12Support4Count);
  CHECK(b124.vacuous);
}

TEST_CASE("bridge check guards its regime") {
  const DiscreteDistribution u4 = DiscreteDistribution::uniform(4);
  CHECK_THROWS_AS(bridge_check(u4, 9, 2), PreconditionError);  // p_i > 1/(2s)
  const DiscreteDistribution u18 = DiscreteDistribution::uniform(18);
  CHECK_THROWS_AS(bridge_check(u18, 1, 3), PreconditionError);
  CHECK_THROWS_AS(bridge_check(u18, 9, 0), PreconditionError);
  CHECK_THROWS_AS(bridge_check(u18, 9, 19), PreconditionError);
}

}  // TEST_SUITE
