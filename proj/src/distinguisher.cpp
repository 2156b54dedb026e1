#include "disttest/distinguisher.hpp"

#include <algorithm>
#include <cmath>

#include "disttest/errors.hpp"

namespace disttest {

namespace {

long long default_l(long long s) {
  const double ls = std::log(static_cast<double>(s));
  return static_cast<long long>(std::ceil(30.0 * static_cast<double>(s) * std::pow(ls, 1.5)));
}

// All-repetitions comparison: returns true when sign(t_i - x_i) never flips.
// Exact ties count as consistent with either direction.
bool consistent(const std::vector<double>& t, const std::vector<double>& x) {
  bool ge = true, le = true;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < x[i]) ge = false;
    if (t[i] > x[i]) le = false;
  }
  return ge || le;
}

}  // namespace

Answer decide_by_collisions(long long c_p, long long c_q) {
  return c_p > c_q ? Answer::P : Answer::Q;
}

Decision distinguish(Source& p, Source& q, Source& t, long long s, RngStream& rng,
                     const DistinguishOptions& opts) {
  if (s < 10) throw PreconditionError("distinguish: s must be at least 10");

  Decision d;
  DistinguishStats& st = d.stats;
  st.l = opts.l_override ? *opts.l_override : default_l(s);
  st.l_overridden = opts.l_override.has_value();
  if (st.l < 10) throw PreconditionError("distinguish: l must be at least 10");
  const double ls = std::log(static_cast<double>(s));
  st.reps = std::max(static_cast<int>(std::ceil(ls)), opts.min_reps);

  const std::uint64_t p0 = p.drawn(), q0 = q.drawn(), t0 = t.drawn();

  L2Options eopts;
  eopts.max_attempts = opts.estimator_attempts;
  eopts.mode = opts.mode;

  st.p_est.reserve(st.reps);
  st.q_est.reserve(st.reps);
  st.t_est.reserve(st.reps);
  for (int r = 0; r < st.reps; ++r) {
    const L2Estimate ep = estimate_l2_squared(p, st.l, rng, eopts);
    const L2Estimate eq = estimate_l2_squared(q, st.l, rng, eopts);
    const L2Estimate et = estimate_l2_squared(t, st.l, rng, eopts);
    st.p_est.push_back(ep.value);
    st.q_est.push_back(eq.value);
    st.t_est.push_back(et.value);
    st.estimator_failures += (ep.failed ? 1 : 0) + (eq.failed ? 1 : 0) + (et.failed ? 1 : 0);
  }

  const bool tp = consistent(st.t_est, st.p_est);
  const bool tq = consistent(st.t_est, st.q_est);
  st.both_conditions = tp && tq;

  if (tp) {
    // T's norm separates from P's in a consistent direction: T is not P.
    st.step2_fired = true;
    d.answer = Answer::Q;
    d.stage = Stage::norm_stage;
  } else if (tq) {
    st.step3_fired = true;
    d.answer = Answer::P;
    d.stage = Stage::norm_stage;
  } else {
    const Type1Engine eng =
        opts.mode == SamplingMode::batched ? Type1Engine::automatic : Type1Engine::alias;
    const PatternEngine peng =
        opts.mode == SamplingMode::batched ? PatternEngine::binomial : PatternEngine::draws;
    const Configuration cfg_p = sample_type1(p, st.l, rng, eng);
    const Configuration cfg_q = sample_type1(q, st.l, rng, eng);
    st.m_p = cfg_p.max_count();
    st.m_q = cfg_q.max_count();
    st.c_p = pattern_sample_total(cfg_p, t, s, rng, peng);
    st.c_q = pattern_sample_total(cfg_q, t, s, rng, peng);
    d.answer = decide_by_collisions(st.c_p, st.c_q);
    d.stage = Stage::collision_stage;
  }

  d.budget.from_p = p.drawn() - p0;
  d.budget.from_q = q.drawn() - q0;
  d.budget.from_t = t.drawn() - t0;

  const double dl = static_cast<double>(st.l);
  const double per_estimate = 2.0 * dl * std::ceil(std::log(dl)) + dl;
  d.budget_bound = (3.0 * st.reps + 2.0) * per_estimate + 2.0 * dl +
                   static_cast<double>(s) * static_cast<double>(st.m_p + st.m_q);
  d.budget_formula_applicable = st.estimator_failures == 0;
  d.budget_ok = !d.budget_formula_applicable ||
                static_cast<double>(d.budget.total()) <= d.budget_bound;
  return d;
}

ClosenessResult closeness_from_distinguisher(Source& x, Source& y, long long s,
                                             RngStream& rng,
                                             const DistinguishOptions& opts) {
  if (s < 10) throw PreconditionError("closeness: s must be at least 10");
  ClosenessResult r;
  r.runs = 3 * static_cast<int>(std::ceil(std::log(static_cast<double>(s))));

  // The testing sample is always drawn from the first distribution; its draws
  // are reported separately from the two candidate sources.
  Source t(x.dist());
  const std::uint64_t x0 = x.drawn(), y0 = y.drawn();

  r.answers.reserve(r.runs);
  r.call_budgets.reserve(r.runs);
  for (int i = 0; i < r.runs; ++i) {
    const Decision d = distinguish(x, y, t, s, rng, opts);
    r.answers.push_back(d.answer);
    r.call_budgets.push_back(d.budget.total());
    r.max_call_budget = std::max(r.max_call_budget, d.budget.total());
  }

  bool all_same = true;
  for (const Answer a : r.answers)
    if (a != r.answers.front()) all_same = false;
  // Identical distributions make every run a coin flip, so unanimity across
  // 3*ceil(ln s) runs certifies a real gap.
  r.verdict = all_same ? Closeness::different : Closeness::same;

  r.budget.from_p = x.drawn() - x0;
  r.budget.from_q = y.drawn() - y0;
  r.budget.from_t = t.drawn();
  r.budget_structure_ok =
      r.budget.total() <= static_cast<std::uint64_t>(r.runs) * r.max_call_budget;
  return r;
}

Answer distinguisher_from_closeness(const ClosenessOracle& oracle, Source& x,
                                    Source& y, Source& t, RngStream& rng) {
  const Closeness cx = oracle(x, t, rng);
  const Closeness cy = oracle(y, t, rng);
  if (cx == Closeness::same && cy != Closeness::same) return Answer::P;
  if (cy == Closeness::same && cx != Closeness::same) return Answer::Q;
  return (rng() & 1u) ? Answer::P : Answer::Q;
}

AutoSResult auto_s(Source& p, Source& q, Source& t, long long s0, RngStream& rng,
                   const DistinguishOptions& opts, int max_doublings) {
  if (s0 < 10) throw PreconditionError("auto_s: s0 must be at least 10");
  AutoSResult res;
  long long s = s0;
  for (int level = 0; level <= max_doublings; ++level) {
    res.levels.push_back(s);
    const int calls = std::max(
        static_cast<int>(std::ceil(std::log(static_cast<double>(s)))), 3);
    long long votes_p = 0;
    for (int i = 0; i < calls; ++i) {
      if (distinguish(p, q, t, s, rng, opts).answer == Answer::P) ++votes_p;
    }
    res.final_s = s;
    res.doublings = level;
    if (votes_p == 0 || votes_p == calls) {
      res.agreed = true;
      res.answer = votes_p == calls ? Answer::P : Answer::Q;
      return res;
    }
    // Disagreement means the sample size is too small to resolve the pair.
    // Majority carries, ties to Q as everywhere else.
    res.answer = 2 * votes_p > calls ? Answer::P : Answer::Q;
    if (level < max_doublings) s *= 2;
  }
  res.agreed = false;
  return res;
}

}  // namespace disttest
