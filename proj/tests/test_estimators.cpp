#include <doctest.h>

#include <cmath>

#include "disttest/distribution.hpp"
#include "disttest/errors.hpp"
#include "disttest/estimators.hpp"
#include "oracles/frozen.hpp"

using namespace disttest;

TEST_SUITE("estimators") {

TEST_CASE("collision estimator rejects tiny l") {
  RngStream rng(20);
  Source src(DiscreteDistribution::uniform(16));
  CHECK_THROWS_AS(estimate_l2_squared(src, 9, rng), PreconditionError);
  L2Options opts;
  opts.max_attempts = 0;
  CHECK_THROWS_AS(estimate_l2_squared(src, 100, rng, opts), PreconditionError);
}

TEST_CASE("collision estimator on a sparse instance succeeds first try") {
  RngStream rng(21);
  Source src(DiscreteDistribution::uniform(4000));
  const long long l = 1000;
  const L2Estimate est = estimate_l2_squared(src, l, rng);

  CHECK_FALSE(est.failed);
  CHECK(est.attempts == 1);
  CHECK(est.budget_ok);
  CHECK(est.l == l);
  CHECK(est.value == static_cast<double>(est.raw_hits) / (1000.0 * 1000.0));
  // draws_used = l (training) + l*m (patterns), so it is a multiple of l.
  CHECK(est.draws_used % l == 0);
  CHECK(est.draws_used >= 2 * l);
  CHECK(static_cast<double>(est.draws_used) <= 2.0 * l * std::log(l) + l);
  CHECK(est.draws_used == static_cast<long long>(src.drawn()));
}

TEST_CASE("dense instances keep the estimator unbiased through forced runs") {
  // uniform(100) at l = 2000 puts ~20 draws in every bin, so training can
  // never pass the ln(l) cap; every run is a forced compute. The average of
  // the values must still sit on |P|_2^2 = 0.01.
  RngStream rng(22);
  Source src(DiscreteDistribution::uniform(100));
  const int runs = 100;
  double sum = 0;
  for (int i = 0; i < runs; ++i) {
    const L2Estimate est = estimate_l2_squared(src, 2000, rng);
    CHECK(est.failed);
    CHECK(est.attempts == 3);
    sum += est.value;
  }
  const double mean = sum / runs;
  CHECK(mean > 0.0095);
  CHECK(mean < 0.0105);
}

TEST_CASE("tail bound: frozen values and edge cases") {
  CHECK(bernoulli_tail_bound(0.0, 8.0) ==
        doctest::Approx(oracle::kBernBound0_8).epsilon(1e-12));
  CHECK(bernoulli_tail_bound(10.0, 30.0) ==
        doctest::Approx(oracle::kBernBound10_30).epsilon(1e-12));
  CHECK(bernoulli_tail_bound(0.0, 0.0) == 1.0);
  CHECK(bernoulli_tail_bound(3.5, 3.5) == 1.0);  // exp(0) = 2, clamped
  CHECK(bernoulli_tail_bound(8.0, 0.0) ==
        doctest::Approx(oracle::kBernBound0_8).epsilon(1e-12));  // symmetric
  CHECK_THROWS_AS(bernoulli_tail_bound(-0.1, 1.0), PreconditionError);
  CHECK_THROWS_AS(bernoulli_tail_bound(1.0, -2.0), PreconditionError);
}

TEST_CASE("tail bound decreases as the means separate") {
  // Fixed sum keeps the denominator constant, so the bound is monotone in
  // the gap.
  double prev = 2.0;
  for (const double gap : {0.0, 10.0, 20.0, 30.0, 40.0}) {
    const double b = bernoulli_tail_bound(20.0 - gap / 2, 20.0 + gap / 2);
    CHECK(b <= prev);
    prev = b;
  }
  CHECK(prev == doctest::Approx(2.0 * std::exp(-5.0)).epsilon(1e-12));
}

TEST_CASE("bernoulli comparison: binomial overload") {
  RngStream rng(23);
  const BernoulliComparison c = bernoulli_comparison_mc(16, 0.0, 0.5, 20000, rng);
  CHECK(c.alpha == 0.0);
  CHECK(c.beta == 8.0);
  CHECK(c.bound == doctest::Approx(oracle::kBernBound0_8).epsilon(1e-12));
  // x is identically zero, so x >= y only when all 16 flips miss: 2^-16.
  CHECK(c.freq < 0.01);
  CHECK(c.within);
  CHECK(c.trials == 20000);
  CHECK_THROWS_AS(bernoulli_comparison_mc(0, 0.5, 0.5, 10, rng), PreconditionError);
  CHECK_THROWS_AS(bernoulli_comparison_mc(16, 0.5, 0.5, 0, rng), PreconditionError);
}

TEST_CASE("bernoulli comparison: heterogeneous ramp cell") {
  Eigen::VectorXd a(40), b(40);
  for (int i = 0; i < 40; ++i) {
    a[i] = 0.1 * (i + 1) / 40.0;
    b[i] = 0.2 + 0.2 * (i + 1) / 40.0;
  }
  RngStream rng(24);
  const BernoulliComparison c = bernoulli_comparison_mc(a, b, 20000, rng);
  CHECK(c.alpha == doctest::Approx(oracle::kBernRampAlpha).epsilon(1e-12));
  CHECK(c.beta == doctest::Approx(oracle::kBernRampBeta).epsilon(1e-12));
  CHECK(c.bound == doctest::Approx(oracle::kBernRampBound).epsilon(1e-12));
  CHECK(c.within);
  CHECK(c.freq < 0.05);  // means 2.05 vs 12.1: x >= y is a deep tail event
}

TEST_CASE("paired estimates are symmetric on identical sources") {
  RngStream rng(25);
  Source p(DiscreteDistribution::uniform(400));
  Source t(DiscreteDistribution::uniform(400));
  const TwoNormComparison c = two_norm_comparison_experiment(p, t, 100, 10000, rng);
  CHECK(c.trials == 10000);
  CHECK(c.p_greater + c.p_less + c.ties == c.trials);
  CHECK(std::abs(c.frac_greater - c.frac_less) <= 0.03);
  // At l = 100 over 400 bins a training cap of ln(100) is almost never hit.
  CHECK(c.failures < 200);
}

TEST_CASE("paired estimates separate under the norm gap condition") {
  // l * (|T|_2^2 - |P|_2^2) = 22.5 exceeds 4 ln^1.5(l) (|P|_2 + |T|_2) = 15.1,
  // so est(P) >= est(T) should be rare; here the gap is ~97 sigma wide.
  RngStream rng(26);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(400);
  for (int i = 0; i < 40; ++i) w[i] = 1.0;
  Source p(DiscreteDistribution::uniform(400));
  Source t(DiscreteDistribution::normalized(w));
  const TwoNormComparison c = two_norm_comparison_experiment(p, t, 1000, 200, rng);
  CHECK(c.trials == 200);
  CHECK(c.p_greater + c.ties <= 10);
}

TEST_CASE("paired comparison smoke at trials = 1") {
  RngStream rng(27);
  Source p(DiscreteDistribution::uniform(1000));
  Source t(DiscreteDistribution::uniform(1000));
  const TwoNormComparison c = two_norm_comparison_experiment(p, t, 50, 1, rng);
  CHECK(c.trials == 1);
  CHECK(c.p_greater + c.p_less + c.ties == 1);
  CHECK(c.frac_greater + c.frac_less <= 1.0);
  CHECK_THROWS_AS(two_norm_comparison_experiment(p, t, 50, 0, rng), PreconditionError);
}

TEST_CASE("no successful run ever exceeded its draw budget") {
  CHECK(l2_budget_violations() == 0);
}

}  // TEST_SUITE
