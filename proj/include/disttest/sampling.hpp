#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "disttest/distribution.hpp"
#include "disttest/errors.hpp"
#include "disttest/rng.hpp"

namespace disttest {

using CountVector = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

// Per-element occurrence counts of one sample ("balls in bins").
struct Configuration {
  CountVector counts;
  long long total = 0;

  int n() const { return static_cast<int>(counts.size()); }
  long long max_count() const { return counts.size() ? counts.maxCoeff() : 0; }
};

// Raw draws consumed, split by which black box produced them. Batched engines
// account the draws they simulate, so the counters always reflect the literal
// procedure's cost.
struct SampleBudget {
  std::uint64_t from_p = 0;
  std::uint64_t from_q = 0;
  std::uint64_t from_t = 0;

  std::uint64_t total() const { return from_p + from_q + from_t; }
};

// Binomial(trials, p) draw. Uses std::binomial_distribution, switching to a
// rounded normal approximation when trials*p*(1-p) > 1e7 (error there is far
// below any band this suite checks).
long long sample_binomial(RngStream& rng, long long trials, double p);

// A sampling black box: a distribution plus a draw counter. Copies share the
// alias table (it is immutable) but keep independent counters.
class Source {
 public:
  explicit Source(const DiscreteDistribution& d);

  const DiscreteDistribution& dist() const { return *dist_; }
  int n() const { return static_cast<int>(dist_->n()); }

  int draw(RngStream& rng);          // one sample, counts 1 toward drawn()
  void account(std::uint64_t draws); // batched engines report simulated draws
  std::uint64_t drawn() const { return drawn_; }

 private:
  struct AliasTable {
    std::vector<double> accept;
    std::vector<int> alias;
  };
  std::shared_ptr<const DiscreteDistribution> dist_;
  std::shared_ptr<const AliasTable> table_;
  std::uint64_t drawn_ = 0;
};

enum class Type1Engine {
  alias,      // s literal alias-table draws
  chain,      // conditional-binomial chain, O(n) regardless of s
  automatic,  // chain when s > 16n, else alias
};

// Type I sampling: counts of s i.i.d. draws (multinomial). Both engines are
// distribution-identical; both account s toward the source's counter.
Configuration sample_type1(Source& src, long long s, RngStream& rng,
                           Type1Engine engine = Type1Engine::alias);
Configuration sample_type1(const DiscreteDistribution& d, long long s, RngStream& rng,
                           Type1Engine engine = Type1Engine::alias);

// Type II sampling: counts[i] ~ independent Binomial(s, p_i); the total is not
// conserved. Not budget-tracked (it is an analysis device, not a black box).
Configuration sample_type2(const DiscreteDistribution& d, long long s, RngStream& rng);

// Exact configuration log-probabilities, log-space to avoid underflow.
// Guarded to desk scale: refuse when n * max(s,1) > 1e6.
double config_log_prob_type1(const DiscreteDistribution& d, const Configuration& cfg);
double config_prob_type1(const DiscreteDistribution& d, const Configuration& cfg);
double config_log_prob_type2(const DiscreteDistribution& d, const Configuration& cfg,
                             long long s);
double config_prob_type2(const DiscreteDistribution& d, const Configuration& cfg,
                         long long s);

// All type-I configurations over n bins with the given total, enumerated
// lexicographically. Refuses instances with more than 1e6 configurations.
std::vector<Configuration> enumerate_configurations(int n, long long total);

// Pattern sampling: draw m = max(cfg) fresh samples s_1..s_m from the source;
// sample i is selected iff cfg[s_i] >= i. Returns |S|; E[|S|] = sum c_i p_i.
long long pattern_sample(const Configuration& cfg, Source& src, RngStream& rng);

enum class PatternEngine {
  draws,     // reps literal pattern_sample invocations
  binomial,  // pooled binomials over distinct-count groups, same distribution
};

// Total of `reps` pattern_sample invocations. The pooled engine groups the
// phase indices j = 1..m by the distinct count values of cfg: phases in a
// group share the selection mass M = sum of src probs over bins with count
// >= that level, so the group's contribution is Binomial(reps * group_len, M).
long long pattern_sample_total(const Configuration& cfg, Source& src, long long reps,
                               RngStream& rng,
                               PatternEngine engine = PatternEngine::draws);

// Elements bucketed by (training-P count, training-Q count, testing count).
struct SignatureHistogram {
  std::map<std::array<long long, 3>, long long> m;
  long long s = 0;  // testing-phase draw count
  int n = 0;

  long long count(long long i, long long j, long long k) const;
  long long marginal(long long i, long long j) const;  // m_{ij*}
};

SignatureHistogram extract_signatures(const Configuration& train_p,
                                      const Configuration& train_q,
                                      const Configuration& test);

// hits(i,j) = sum_k k * m[(i,j,k)]: testing draws landing on elements of
// training signature (i,j).
long long hits(const SignatureHistogram& h, long long i, long long j);

// Reconstruction of {m002, m100, m010, m000, m200, m020} from the testing
// triples (m101, m011, m001) and training marginals. Applicable only in the
// no-higher-collision regime: every test count <= 2, test count 2 only at
// training signature (0,0), test count 1 only at (0,0), (1,0), (0,1).
struct SignatureIdentity {
  std::string name;
  long long reconstructed = 0;
  long long direct = 0;
  bool match = false;
};

struct SignatureReconstruction {
  bool applicable = false;
  std::array<long long, 3> violating{0, 0, 0};  // a signature outside the regime
  std::vector<SignatureIdentity> identities;

  bool all_match() const;
};

SignatureReconstruction reconstruct_sigs(const SignatureHistogram& h, long long s);

// Exhaustive type-I vs type-II comparison for configurations supported on the
// first `support` bins of d. In-regime: every count <= ln(s) and total within
// [s - sqrt(s), s + sqrt(s)]. Ratios are P_I[C] / P_II[C]; the window that
// must contain them is [(2/3) sqrt(s), 30 s^1.5].
struct BridgeCheck {
  long long s = 0;
  int support = 0;
  long long enumerated = 0;
  long long in_regime = 0;
  double min_ratio = 0;
  double max_ratio = 0;
  double lo_bound = 0;
  double hi_bound = 0;
  bool all_within = false;
  bool vacuous = true;  // no in-regime configurations at all
};

BridgeCheck bridge_check(const DiscreteDistribution& d, long long s, int support);

}  // namespace disttest
