#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "disttest/distinguisher.hpp"
#include "disttest/distribution.hpp"
#include "disttest/sampling.hpp"

namespace disttest {

// Masses revealed by the hint, all over the permuted domain: common /
// disjoint mass of the training distribution restricted to elements that
// training actually touched.
struct HintMasses {
  double c_p = 0, d_p = 0;  // common / P-only mass seen in P-training
  double c_q = 0, d_q = 0;  // common / Q-only mass seen in Q-training
};

struct HintReport {
  // Helpful: seen in testing, seen at least twice in one training phase, and
  // living in a disjoint set; such an element leaks the answer. Unhelpful:
  // trained at least twice but common, so it names only shared structure.
  std::vector<int> helpful;
  std::vector<int> unhelpful;
};

struct GameResult {
  Hypothesis truth = Hypothesis::H1;
  std::vector<int> perm;             // element x of the base pair plays as perm[x]
  DiscreteDistribution pi_p, pi_q;   // permuted pair
  Configuration train_p, train_q, test;  // counts over the permuted domain
  SignatureHistogram sigs;
  HintReport hint;
  HintMasses masses;
  long long s = 0;
  std::uint64_t seed = 0;
};

// One permutation game: permute the (weakly disjoint) pair by a fresh uniform
// permutation, train with s draws from each side, test with s draws from the
// side named by `truth`. Sub-streams are derived per phase so H1 and H2 at the
// same seed share the permutation and the training draws exactly.
GameResult play_permutation_game(const DiscreteDistribution& base_p,
                                 const DiscreteDistribution& base_q, long long s,
                                 Hypothesis truth, std::uint64_t seed,
                                 double tol = 1e-12);

// Likelihood ratio of the testing evidence (a, b, c) = (draws on P-trained
// elements, draws on Q-trained elements, draws on untrained elements) between
// the two hypotheses, given the hint masses. Computed in log space; returns
// +infinity when only the denominator vanishes and 1 when both do.
double likelihood_ratio(const HintMasses& m, long long a, long long b, long long c);

struct LowerBoundConfig {
  double c_constant = 10.0;       // s must stay below numsamples / c_constant
  bool enforce_preconditions = true;
  double tol = 1e-12;             // weak-disjointness tolerance
};

struct PreconditionReport {
  bool weakly_disjoint = false;
  double cap_l3 = 0;          // 1/4 over the L3 difference norm
  double cap_linf_p = 0, cap_linf_q = 0;
  double cap_numsamples = 0;  // numsamples / c_constant
  double s_cap = 0;           // min of the caps
  bool ok = false;            // weakly disjoint and s within every cap
  bool enforced = true;
};

PreconditionReport lower_bound_preconditions(const DiscreteDistribution& p,
                                             const DiscreteDistribution& q,
                                             long long s,
                                             const LowerBoundConfig& cfg = {});

struct LowerHBoundReport {
  long long s = 0;
  long long games = 0;
  long long ratio_le_8 = 0;
  double ratio_le_8_frac = 0;
  long long infinite_ratios = 0;
  double median_ratio = 0;
  long long helpful_nonempty = 0;
  double helpful_frac = 0;
  PreconditionReport pre;
};

// H1 games only: plays `games` permutation games, evaluates the likelihood
// ratio of the observed (a, b, c) under the revealed masses, and tallies how
// often the evidence stays weak (ratio <= 8) and how often the hint leaks
// (helpful set nonempty).
LowerHBoundReport lower_h_bound_experiment(const DiscreteDistribution& base_p,
                                           const DiscreteDistribution& base_q,
                                           long long s, long long games,
                                           std::uint64_t seed,
                                           const LowerBoundConfig& cfg = {});

// What a tester is allowed to see: the signature histogram, the public base
// pair, and black-box access to the permuted sources plus the unknown testing
// source. Draws from the view's sources are the tester's own budget.
struct GameView {
  const SignatureHistogram& sigs;
  const DiscreteDistribution& base_p;
  const DiscreteDistribution& base_q;
  long long s;
  Source& pi_p;
  Source& pi_q;
  Source& testing;
};

using Tester = std::function<Hypothesis(const GameView&, RngStream&)>;

struct TesterSpec {
  Tester fn;
  long long max_games = 0;  // 0 = play every game; else subsample by stride
};

// Decides by the sign of hits(1,0) - hits(0,1); ties by coin.
Tester tester_hits_difference();

// Thresholds likelihood_ratio at 1 using expected hint masses computed from
// the public base pair (mass of each class weighted by the probability of
// being trained at least once); ties by coin.
Tester tester_signature_likelihood();

// Runs the two-stage distinguisher on the view's sources at the game's s.
Tester tester_algorithm3(const DistinguishOptions& opts = {});

struct TesterReport {
  long long games = 0;
  long long errors = 0;
  double error_rate = 0;
};

struct IndistinguishabilityReport {
  long long s = 0;
  long long games = 0;
  std::map<std::string, TesterReport> testers;
  long long helpful_nonempty = 0;
  double helpful_frac = 0;
  PreconditionReport pre;
};

// Alternates truth H1/H2 across `games` permutation games and scores each
// tester's error rate. Honest testers near 1/2 are the point: below the
// sample-count threshold the games carry almost no signal.
IndistinguishabilityReport indistinguishability_experiment(
    const DiscreteDistribution& base_p, const DiscreteDistribution& base_q,
    long long s, const std::map<std::string, TesterSpec>& testers, long long games,
    std::uint64_t seed, const LowerBoundConfig& cfg = {});

}  // namespace disttest
