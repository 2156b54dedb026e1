#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "disttest/estimators.hpp"
#include "disttest/sampling.hpp"

namespace disttest {

enum class Answer { P, Q };
enum class Stage { norm_stage, collision_stage };
enum class Hypothesis { H1, H2 };  // testing sample came from P (H1) or Q (H2)
enum class Closeness { same, different };

struct DistinguishOptions {
  // Accuracy parameter for the norm estimates and the training
  // configurations; defaults to 30 * s * ln(s)^1.5. Overriding it scales the
  // experiment down and is flagged in the stats.
  std::optional<long long> l_override;
  SamplingMode mode = SamplingMode::direct;
  int min_reps = 3;           // floor on the ceil(ln s) repetition count
  int estimator_attempts = 3;
};

struct DistinguishStats {
  std::vector<double> p_est, q_est, t_est;  // per-repetition norm estimates
  int reps = 0;
  long long l = 0;
  bool l_overridden = false;
  bool step2_fired = false;      // T-vs-P consistency held -> answered Q
  bool step3_fired = false;      // T-vs-Q consistency held -> answered P
  bool both_conditions = false;  // both held; step 2 wins, recorded here
  long long c_p = 0, c_q = 0;    // collision-stage totals
  long long m_p = 0, m_q = 0;    // training configuration max counts
  int estimator_failures = 0;
};

struct Decision {
  Answer answer = Answer::Q;
  Stage stage = Stage::collision_stage;
  DistinguishStats stats;
  SampleBudget budget;  // draws consumed by this call, per source
  double budget_bound = 0;
  // The budget formula assumes every estimate stayed within its own budget;
  // forced-compute failed estimates void it.
  bool budget_formula_applicable = false;
  bool budget_ok = false;
};

// Collision-stage comparison; ties go to Q, always.
Answer decide_by_collisions(long long c_p, long long c_q);

// Two-stage distinguisher. Stage 1 compares repeated norm estimates of T
// against P and against Q; an all-repetitions-consistent comparison decides
// (T-vs-P consistent means T is not P, so answer Q, and symmetrically).
// Stage 2 trains configurations C_P, C_Q with l draws each and pattern-samples
// both against s fresh testing draws; answer P iff c_P > c_Q. Requires s >= 10.
Decision distinguish(Source& p, Source& q, Source& t, long long s, RngStream& rng,
                     const DistinguishOptions& opts = {});

struct ClosenessResult {
  Closeness verdict = Closeness::same;
  int runs = 0;
  std::vector<Answer> answers;
  std::vector<std::uint64_t> call_budgets;  // per-run totals
  SampleBudget budget;                      // x-draws, y-draws, testing draws
  std::uint64_t max_call_budget = 0;
  bool budget_structure_ok = false;  // total <= runs * max single call
};

// Runs distinguish 3*ceil(ln s) times with the testing sample always drawn
// from x; reports "different" iff every run returned the same answer.
ClosenessResult closeness_from_distinguisher(Source& x, Source& y, long long s,
                                             RngStream& rng,
                                             const DistinguishOptions& opts = {});

// A closeness oracle decides whether two sources sample (almost) the same
// distribution.
using ClosenessOracle = std::function<Closeness(Source&, Source&, RngStream&)>;

// Tests t against x and against y; exactly one "same" answers that side,
// otherwise a fair coin.
Answer distinguisher_from_closeness(const ClosenessOracle& oracle, Source& x,
                                    Source& y, Source& t, RngStream& rng);

// Doubling wrapper: at each level s, 2s, 4s, ... runs max(ceil(ln s), 3)
// independent distinguish calls and stops when they all agree.
struct AutoSResult {
  Answer answer = Answer::Q;
  long long final_s = 0;
  int doublings = 0;
  bool agreed = false;
  std::vector<long long> levels;
};

AutoSResult auto_s(Source& p, Source& q, Source& t, long long s0, RngStream& rng,
                   const DistinguishOptions& opts = {}, int max_doublings = 12);

}  // namespace disttest
