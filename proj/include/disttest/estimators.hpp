#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "disttest/sampling.hpp"

namespace disttest {

enum class SamplingMode {
  direct,   // literal draws everywhere
  batched,  // chain/pooled-binomial engines, distribution-identical
};

struct L2Options {
  int max_attempts = 3;  // total training attempts; 3 keeps the budget provable
  SamplingMode mode = SamplingMode::direct;
};

// One collision-based estimate of |P|_2^2. A run "fails" when every training
// attempt produced a configuration with max count >= ln(l); the value is still
// computed from the last configuration (it stays unbiased), but the budget
// bound draws_used <= 2*l*ln(l) + l is only promised for non-failed runs.
struct L2Estimate {
  double value = 0;
  long long l = 0;
  long long raw_hits = 0;
  bool failed = false;
  long long draws_used = 0;
  int attempts = 0;
  bool budget_ok = false;  // meaningful for non-failed runs
};

// Draws l training samples into a configuration, then runs l pattern
// samplings with fresh draws; reports sum of hits / l^2. Requires l >= 10.
L2Estimate estimate_l2_squared(Source& src, long long l, RngStream& rng,
                               const L2Options& opts = {});

// Number of successful runs (process-wide) whose draws exceeded the budget
// bound. Stays zero; the acceptance suite asserts it.
std::uint64_t l2_budget_violations();

// Tail bound 2*exp(-(alpha-beta)^2 / (8*(alpha+beta))) on the probability that
// a Bernoulli sum with mean alpha exceeds an independent one with mean beta,
// clamped to [0,1]. Degenerate alpha = beta = 0 returns 1.
double bernoulli_tail_bound(double alpha, double beta);

// Monte Carlo estimate of Pr[sum x_i >= sum y_i] for independent Bernoulli
// vectors with the given means, against the computed bound. The homogeneous
// overload draws the sums as binomials (exactly equivalent).
struct BernoulliComparison {
  double alpha = 0;
  double beta = 0;
  long long trials = 0;
  long long x_ge_y = 0;
  double freq = 0;
  double bound = 0;
  bool within = false;
};

BernoulliComparison bernoulli_comparison_mc(const Eigen::VectorXd& a_means,
                                            const Eigen::VectorXd& b_means,
                                            long long trials, RngStream& rng);
BernoulliComparison bernoulli_comparison_mc(long long flips, double a, double b,
                                            long long trials, RngStream& rng);

// Paired-estimate comparison: how often est(P) lands above/below est(T).
struct TwoNormComparison {
  long long trials = 0;
  long long p_greater = 0;
  long long p_less = 0;
  long long ties = 0;
  long long failures = 0;  // estimates with the failed flag, either side
  double frac_greater = 0;
  double frac_less = 0;
};

TwoNormComparison two_norm_comparison_experiment(Source& p, Source& t, long long l,
                                                 long long trials, RngStream& rng,
                                                 const L2Options& opts = {});

}  // namespace disttest
