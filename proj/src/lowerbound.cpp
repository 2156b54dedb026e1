#include "disttest/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "disttest/errors.hpp"

namespace disttest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ElementClass { common, p_only, q_only };

// Element classes of the base pair, indexed by base element id.
std::vector<ElementClass> classify(const DiscreteDistribution& p,
                                   const DiscreteDistribution& q, double tol) {
  const WeaklyDisjointResult wd = weakly_disjoint_decompose(p, q, tol);
  if (!wd.is_weakly_disjoint) {
    std::ostringstream msg;
    msg << "pair is not weakly disjoint (element " << wd.violating_element
        << " has mass on both sides)";
    throw PreconditionError(msg.str());
  }
  std::vector<ElementClass> cls(static_cast<std::size_t>(p.n()), ElementClass::common);
  for (const int x : wd.decomposition.disjoint_p) cls[static_cast<std::size_t>(x)] = ElementClass::p_only;
  for (const int x : wd.decomposition.disjoint_q) cls[static_cast<std::size_t>(x)] = ElementClass::q_only;
  return cls;
}

// log of x^e with the 0^0 = 1 convention.
double pow_log(long long e, double x) {
  if (e == 0) return 0.0;
  if (x <= 0.0) return -kInf;
  return static_cast<double>(e) * std::log(x);
}

// Probability that an element of mass p is touched at least once by s draws.
double touch_prob(double p, long long s) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(s) * std::log1p(-p));
}

}  // namespace

GameResult play_permutation_game(const DiscreteDistribution& base_p,
                                 const DiscreteDistribution& base_q, long long s,
                                 Hypothesis truth, std::uint64_t seed, double tol) {
  if (s < 1) throw PreconditionError("permutation game: s must be positive");
  const std::vector<ElementClass> base_cls = classify(base_p, base_q, tol);

  GameResult g;
  g.truth = truth;
  g.s = s;
  g.seed = seed;

  // Phase streams are fixed per index so that H1 and H2 at the same seed share
  // the permutation and both training draws; only the testing stream's target
  // distribution changes.
  const PermutedPair pair =
      apply_permutation(base_p, base_q, RngStream::derive_seed(seed, 0));
  g.perm = pair.perm;
  g.pi_p = pair.permuted_p();
  g.pi_q = pair.permuted_q();

  RngStream train_p_rng = RngStream::derive(seed, 1);
  RngStream train_q_rng = RngStream::derive(seed, 2);
  RngStream test_rng = RngStream::derive(seed, 3);
  g.train_p = sample_type1(g.pi_p, s, train_p_rng);
  g.train_q = sample_type1(g.pi_q, s, train_q_rng);
  g.test = sample_type1(truth == Hypothesis::H1 ? g.pi_p : g.pi_q, s, test_rng);
  g.sigs = extract_signatures(g.train_p, g.train_q, g.test);

  const int n = base_p.n();
  std::vector<ElementClass> cls(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) cls[static_cast<std::size_t>(g.perm[static_cast<std::size_t>(x)])] = base_cls[static_cast<std::size_t>(x)];

  for (int y = 0; y < n; ++y) {
    const long long tp = g.train_p.counts[y];
    const long long tq = g.train_q.counts[y];
    const long long tc = g.test.counts[y];
    const bool trained_twice = tp >= 2 || tq >= 2;
    const ElementClass c = cls[static_cast<std::size_t>(y)];
    if (trained_twice && c == ElementClass::common) g.hint.unhelpful.push_back(y);
    if (trained_twice && tc >= 1 && c != ElementClass::common) g.hint.helpful.push_back(y);
    if (tp >= 1) {
      if (c == ElementClass::common) g.masses.c_p += g.pi_p.probs[y];
      else if (c == ElementClass::p_only) g.masses.d_p += g.pi_p.probs[y];
    }
    if (tq >= 1) {
      if (c == ElementClass::common) g.masses.c_q += g.pi_q.probs[y];
      else if (c == ElementClass::q_only) g.masses.d_q += g.pi_q.probs[y];
    }
  }
  return g;
}

double likelihood_ratio(const HintMasses& m, long long a, long long b, long long c) {
  if (a < 0 || b < 0 || c < 0)
    throw PreconditionError("likelihood_ratio: negative evidence counts");
  const double vals[] = {m.c_p, m.d_p, m.c_q, m.d_q};
  for (const double v : vals)
    if (!(v >= 0.0 && v <= 1.0))
      throw PreconditionError("likelihood_ratio: masses must lie in [0, 1]");
  if (m.c_p + m.d_p > 1.0 + 1e-12 || m.c_q + m.d_q > 1.0 + 1e-12)
    throw PreconditionError("likelihood_ratio: per-side masses exceed 1");

  const double rest_num = std::max(0.0, 1.0 - m.c_p - m.c_q - m.d_p);
  const double rest_den = std::max(0.0, 1.0 - m.c_p - m.c_q - m.d_q);
  const double log_num =
      pow_log(a, m.c_p + m.d_p) + pow_log(b, m.c_q) + pow_log(c, rest_num);
  const double log_den =
      pow_log(a, m.c_p) + pow_log(b, m.c_q + m.d_q) + pow_log(c, rest_den);
  if (log_num == -kInf && log_den == -kInf) return 1.0;
  if (log_den == -kInf) return kInf;
  if (log_num == -kInf) return 0.0;
  return std::exp(log_num - log_den);
}

PreconditionReport lower_bound_preconditions(const DiscreteDistribution& p,
                                             const DiscreteDistribution& q,
                                             long long s,
                                             const LowerBoundConfig& cfg) {
  PreconditionReport r;
  r.enforced = cfg.enforce_preconditions;
  r.weakly_disjoint = weakly_disjoint_decompose(p, q, cfg.tol).is_weakly_disjoint;
  const SeparationParams nrm = norms(p, q);
  r.cap_l3 = nrm.l3_diff > 0 ? 0.25 / nrm.l3_diff : kInf;
  r.cap_linf_p = nrm.linf_p > 0 ? 1.0 / nrm.linf_p : kInf;
  r.cap_linf_q = nrm.linf_q > 0 ? 1.0 / nrm.linf_q : kInf;
  r.cap_numsamples =
      std::isfinite(nrm.numsamples) ? nrm.numsamples / cfg.c_constant : kInf;
  r.s_cap = std::min(std::min(r.cap_l3, r.cap_numsamples),
                     std::min(r.cap_linf_p, r.cap_linf_q));
  r.ok = r.weakly_disjoint && static_cast<double>(s) <= r.s_cap;
  return r;
}

namespace {

void enforce_or_throw(const PreconditionReport& pre, long long s) {
  if (!pre.enforced || pre.ok) return;
  std::ostringstream msg;
  msg << "lower-bound preconditions fail at s = " << s << " (cap " << pre.s_cap;
  if (!pre.weakly_disjoint) msg << ", pair not weakly disjoint";
  msg << ")";
  throw PreconditionError(msg.str());
}

}  // namespace

LowerHBoundReport lower_h_bound_experiment(const DiscreteDistribution& base_p,
                                           const DiscreteDistribution& base_q,
                                           long long s, long long games,
                                           std::uint64_t seed,
                                           const LowerBoundConfig& cfg) {
  if (games < 1) throw PreconditionError("lower_h_bound_experiment: games must be positive");
  LowerHBoundReport rep;
  rep.s = s;
  rep.games = games;
  rep.pre = lower_bound_preconditions(base_p, base_q, s, cfg);
  enforce_or_throw(rep.pre, s);

  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(games));
  for (long long g = 0; g < games; ++g) {
    const GameResult game = play_permutation_game(
        base_p, base_q, s, Hypothesis::H1, RngStream::derive_seed(seed, static_cast<std::uint64_t>(g)), cfg.tol);
    const long long a = hits(game.sigs, 1, 0);
    const long long b = hits(game.sigs, 0, 1);
    const long long c = hits(game.sigs, 0, 0);
    const double ratio = likelihood_ratio(game.masses, a, b, c);
    ratios.push_back(ratio);
    if (ratio <= 8.0) ++rep.ratio_le_8;
    if (std::isinf(ratio)) ++rep.infinite_ratios;
    if (!game.hint.helpful.empty()) ++rep.helpful_nonempty;
  }
  rep.ratio_le_8_frac = static_cast<double>(rep.ratio_le_8) / static_cast<double>(games);
  rep.helpful_frac = static_cast<double>(rep.helpful_nonempty) / static_cast<double>(games);
  // Lower median: deterministic even when the upper half holds infinities.
  std::nth_element(ratios.begin(), ratios.begin() + (ratios.size() - 1) / 2, ratios.end());
  rep.median_ratio = ratios[(ratios.size() - 1) / 2];
  return rep;
}

Tester tester_hits_difference() {
  return [](const GameView& v, RngStream& rng) {
    const long long a = hits(v.sigs, 1, 0);
    const long long b = hits(v.sigs, 0, 1);
    if (a > b) return Hypothesis::H1;
    if (b > a) return Hypothesis::H2;
    return (rng() & 1u) ? Hypothesis::H1 : Hypothesis::H2;
  };
}

Tester tester_signature_likelihood() {
  return [](const GameView& v, RngStream& rng) {
    const WeaklyDisjointResult wd = weakly_disjoint_decompose(v.base_p, v.base_q);
    if (!wd.is_weakly_disjoint)
      return (rng() & 1u) ? Hypothesis::H1 : Hypothesis::H2;
    // Expected hint masses are permutation invariant, so the tester can
    // compute them from the public pair without seeing the permutation.
    HintMasses m;
    for (const int x : wd.decomposition.common) {
      m.c_p += v.base_p.probs[x] * touch_prob(v.base_p.probs[x], v.s);
      m.c_q += v.base_q.probs[x] * touch_prob(v.base_q.probs[x], v.s);
    }
    for (const int x : wd.decomposition.disjoint_p)
      m.d_p += v.base_p.probs[x] * touch_prob(v.base_p.probs[x], v.s);
    for (const int x : wd.decomposition.disjoint_q)
      m.d_q += v.base_q.probs[x] * touch_prob(v.base_q.probs[x], v.s);
    const double lr = likelihood_ratio(m, hits(v.sigs, 1, 0), hits(v.sigs, 0, 1),
                                       hits(v.sigs, 0, 0));
    if (lr > 1.0) return Hypothesis::H1;
    if (lr < 1.0) return Hypothesis::H2;
    return (rng() & 1u) ? Hypothesis::H1 : Hypothesis::H2;
  };
}

Tester tester_algorithm3(const DistinguishOptions& opts) {
  return [opts](const GameView& v, RngStream& rng) {
    const Decision d = distinguish(v.pi_p, v.pi_q, v.testing, v.s, rng, opts);
    return d.answer == Answer::P ? Hypothesis::H1 : Hypothesis::H2;
  };
}

IndistinguishabilityReport indistinguishability_experiment(
    const DiscreteDistribution& base_p, const DiscreteDistribution& base_q,
    long long s, const std::map<std::string, TesterSpec>& testers, long long games,
    std::uint64_t seed, const LowerBoundConfig& cfg) {
  if (games < 1)
    throw PreconditionError("indistinguishability_experiment: games must be positive");
  IndistinguishabilityReport rep;
  rep.s = s;
  rep.games = games;
  rep.pre = lower_bound_preconditions(base_p, base_q, s, cfg);
  enforce_or_throw(rep.pre, s);

  std::vector<long long> strides;
  for (const auto& [name, spec] : testers) {
    rep.testers[name] = TesterReport{};
    strides.push_back(spec.max_games > 0 ? std::max<long long>(1, games / spec.max_games)
                                         : 1);
  }

  for (long long g = 0; g < games; ++g) {
    const Hypothesis truth = g % 2 == 0 ? Hypothesis::H1 : Hypothesis::H2;
    const std::uint64_t game_seed = RngStream::derive_seed(seed, static_cast<std::uint64_t>(g));
    const GameResult game = play_permutation_game(base_p, base_q, s, truth,
                                                  game_seed, cfg.tol);
    if (!game.hint.helpful.empty()) ++rep.helpful_nonempty;

    std::size_t ti = 0;
    for (const auto& [name, spec] : testers) {
      const long long stride = strides[ti];
      ++ti;
      if (g % stride != 0) continue;
      Source sp(game.pi_p), sq(game.pi_q);
      Source st(truth == Hypothesis::H1 ? game.pi_p : game.pi_q);
      const GameView view{game.sigs, base_p, base_q, s, sp, sq, st};
      RngStream trng = RngStream::derive(game_seed, 100 + static_cast<std::uint64_t>(ti));
      const Hypothesis guess = spec.fn(view, trng);
      TesterReport& tr = rep.testers[name];
      ++tr.games;
      if (guess != truth) ++tr.errors;
    }
  }
  for (auto& [name, tr] : rep.testers)
    if (tr.games > 0) tr.error_rate = static_cast<double>(tr.errors) / static_cast<double>(tr.games);
  rep.helpful_frac = static_cast<double>(rep.helpful_nonempty) / static_cast<double>(games);
  return rep;
}

}  // namespace disttest
