#include "disttest/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

namespace disttest {

long long sample_binomial(RngStream& rng, long long trials, double p) {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  const double npq = static_cast<double>(trials) * p * (1.0 - p);
  if (npq > 1e7) {
    std::normal_distribution<double> normal(static_cast<double>(trials) * p,
                                            std::sqrt(npq));
    const double v = std::round(normal(rng));
    if (v <= 0.0) return 0;
    if (v >= static_cast<double>(trials)) return trials;
    return static_cast<long long>(v);
  }
  std::binomial_distribution<long long> dist(trials, p);
  return dist(rng);
}

Source::Source(const DiscreteDistribution& d)
    : dist_(std::make_shared<DiscreteDistribution>(d)) {
  // Vose alias table: O(n) build, one uniform per draw.
  const int n = dist_->n();
  auto table = std::make_shared<AliasTable>();
  table->accept.assign(n, 1.0);
  table->alias.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<int> small, large;
  for (int i = 0; i < n; ++i) {
    scaled[i] = dist_->probs[i] * n;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    const int l = large.back();
    small.pop_back();
    large.pop_back();
    table->accept[s] = scaled[s];
    table->alias[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  // Whatever remains is within rounding of 1; accept stays 1.
  table_ = std::move(table);
}

int Source::draw(RngStream& rng) {
  ++drawn_;
  const int n = static_cast<int>(table_->accept.size());
  const double x = rng.uniform01() * n;
  int idx = static_cast<int>(x);
  if (idx >= n) idx = n - 1;  // guards the u*n == n rounding corner
  const double frac = x - idx;
  return frac < table_->accept[idx] ? idx : table_->alias[idx];
}

void Source::account(std::uint64_t draws) { drawn_ += draws; }

Configuration sample_type1(Source& src, long long s, RngStream& rng,
                           Type1Engine engine) {
  if (s < 0) throw PreconditionError("sample_type1: s must be >= 0");
  const int n = src.n();
  if (engine == Type1Engine::automatic)
    engine = (s > 16LL * n) ? Type1Engine::chain : Type1Engine::alias;
  Configuration cfg;
  cfg.counts = CountVector::Zero(n);
  cfg.total = s;
  if (engine == Type1Engine::alias) {
    for (long long i = 0; i < s; ++i) ++cfg.counts[src.draw(rng)];
    return cfg;
  }
  // Conditional-binomial chain: bin i gets Binomial(remaining, p_i / mass_left).
  // Identical in distribution to s i.i.d. draws, O(n) binomials.
  long long remaining = s;
  double mass_left = 1.0;
  const auto& p = src.dist().probs;
  for (int i = 0; i < n - 1 && remaining > 0; ++i) {
    const double cond = mass_left > 0 ? std::min(1.0, p[i] / mass_left) : 1.0;
    const long long c = sample_binomial(rng, remaining, cond);
    cfg.counts[i] = c;
    remaining -= c;
    mass_left -= p[i];
  }
  cfg.counts[n - 1] += remaining;
  src.account(static_cast<std::uint64_t>(s));
  return cfg;
}

Configuration sample_type1(const DiscreteDistribution& d, long long s,
                           RngStream& rng, Type1Engine engine) {
  Source src(d);
  return sample_type1(src, s, rng, engine);
}

Configuration sample_type2(const DiscreteDistribution& d, long long s,
                           RngStream& rng) {
  if (s < 0) throw PreconditionError("sample_type2: s must be >= 0");
  Configuration cfg;
  cfg.counts = CountVector::Zero(d.n());
  for (int i = 0; i < d.n(); ++i) cfg.counts[i] = sample_binomial(rng, s, d.probs[i]);
  cfg.total = cfg.counts.sum();
  return cfg;
}

namespace {

void check_prob_scale(int n, long long s) {
  if (static_cast<double>(n) * static_cast<double>(std::max<long long>(s, 1)) > 1e6)
    throw PreconditionError("config probability: instance too large (n*s > 1e6)");
}

double log_binomial_coeff(long long n, long long k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double config_log_prob_type1(const DiscreteDistribution& d, const Configuration& cfg) {
  if (d.n() != cfg.n()) throw DimensionError("config_prob_type1: size mismatch");
  const long long total = cfg.counts.sum();
  check_prob_scale(d.n(), total);
  double lp = std::lgamma(static_cast<double>(total) + 1.0);
  for (int i = 0; i < d.n(); ++i) {
    const long long c = cfg.counts[i];
    if (c < 0) throw DimensionError("negative count");
    if (c == 0) continue;
    if (d.probs[i] <= 0.0) return -std::numeric_limits<double>::infinity();
    lp += c * std::log(d.probs[i]) - std::lgamma(static_cast<double>(c) + 1.0);
  }
  return lp;
}

double config_prob_type1(const DiscreteDistribution& d, const Configuration& cfg) {
  return std::exp(config_log_prob_type1(d, cfg));
}

double config_log_prob_type2(const DiscreteDistribution& d, const Configuration& cfg,
                             long long s) {
  if (d.n() != cfg.n()) throw DimensionError("config_prob_type2: size mismatch");
  check_prob_scale(d.n(), s);
  double lp = 0.0;
  for (int i = 0; i < d.n(); ++i) {
    const long long c = cfg.counts[i];
    if (c < 0) throw DimensionError("negative count");
    if (c > s) throw DimensionError("type II count exceeds s");
    const double p = d.probs[i];
    if (c > 0) {
      if (p <= 0.0) return -std::numeric_limits<double>::infinity();
      lp += log_binomial_coeff(s, c) + c * std::log(p);
    }
    if (s - c > 0) {
      if (p >= 1.0) return -std::numeric_limits<double>::infinity();
      lp += (s - c) * std::log1p(-p);
    }
  }
  return lp;
}

double config_prob_type2(const DiscreteDistribution& d, const Configuration& cfg,
                         long long s) {
  return std::exp(config_log_prob_type2(d, cfg, s));
}

std::vector<Configuration> enumerate_configurations(int n, long long total) {
  if (n < 1 || total < 0) throw PreconditionError("enumerate: n >= 1, total >= 0");
  double count = 1.0;  // C(total + n - 1, n - 1)
  for (int i = 1; i < n; ++i) count *= static_cast<double>(total + i) / i;
  if (count > 1e6) throw PreconditionError("enumerate: more than 1e6 configurations");
  std::vector<Configuration> out;
  CountVector cur = CountVector::Zero(n);
  // Lexicographic recursion over prefix sums.
  auto rec = [&](auto&& self, int idx, long long left) -> void {
    if (idx == n - 1) {
      cur[idx] = left;
      out.push_back(Configuration{cur, total});
      return;
    }
    for (long long c = 0; c <= left; ++c) {
      cur[idx] = c;
      self(self, idx + 1, left - c);
    }
  };
  rec(rec, 0, total);
  return out;
}

long long pattern_sample(const Configuration& cfg, Source& src, RngStream& rng) {
  if (cfg.n() != src.n()) throw DimensionError("pattern_sample: size mismatch");
  const long long m = cfg.max_count();
  long long selected = 0;
  for (long long i = 1; i <= m; ++i) {
    const int s_i = src.draw(rng);
    if (cfg.counts[s_i] >= i) ++selected;
  }
  return selected;
}

long long pattern_sample_total(const Configuration& cfg, Source& src, long long reps,
                               RngStream& rng, PatternEngine engine) {
  if (reps < 0) throw PreconditionError("pattern_sample_total: reps >= 0");
  if (cfg.n() != src.n()) throw DimensionError("pattern_sample_total: size mismatch");
  const long long m = cfg.max_count();  // hoisted: maxCoeff is O(n)
  if (engine == PatternEngine::draws) {
    long long total = 0;
    for (long long r = 0; r < reps; ++r)
      for (long long i = 1; i <= m; ++i) {
        const int s_i = src.draw(rng);
        if (cfg.counts[s_i] >= i) ++total;
      }
    return total;
  }
  if (m == 0 || reps == 0) return 0;
  // Distinct count levels v_1 > v_2 > ... with selection masses
  // M_k = sum of probs over bins with count >= v_k; phases j in
  // (v_{k+1}, v_k] all carry mass M_k.
  std::vector<std::pair<long long, double>> positive;
  const auto& t = src.dist().probs;
  for (int i = 0; i < cfg.n(); ++i)
    if (cfg.counts[i] > 0) positive.emplace_back(cfg.counts[i], t[i]);
  std::sort(positive.begin(), positive.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  long long total = 0;
  double mass = 0.0;
  std::size_t idx = 0;
  while (idx < positive.size()) {
    const long long level = positive[idx].first;
    while (idx < positive.size() && positive[idx].first == level)
      mass += positive[idx++].second;
    const long long next_level =
        idx < positive.size() ? positive[idx].first : 0;
    const long long phase_span = level - next_level;
    const double m_clamped = std::min(mass, 1.0);
    total += sample_binomial(rng, reps * phase_span, m_clamped);
  }
  src.account(static_cast<std::uint64_t>(reps) * static_cast<std::uint64_t>(m));
  return total;
}

long long SignatureHistogram::count(long long i, long long j, long long k) const {
  const auto it = m.find({i, j, k});
  return it == m.end() ? 0 : it->second;
}

long long SignatureHistogram::marginal(long long i, long long j) const {
  long long total = 0;
  for (const auto& [key, cnt] : m)
    if (key[0] == i && key[1] == j) total += cnt;
  return total;
}

SignatureHistogram extract_signatures(const Configuration& train_p,
                                      const Configuration& train_q,
                                      const Configuration& test) {
  if (train_p.n() != train_q.n() || train_p.n() != test.n())
    throw DimensionError("extract_signatures: size mismatch");
  SignatureHistogram h;
  h.n = train_p.n();
  for (int x = 0; x < h.n; ++x) {
    ++h.m[{train_p.counts[x], train_q.counts[x], test.counts[x]}];
    h.s += test.counts[x];
  }
  return h;
}

long long hits(const SignatureHistogram& h, long long i, long long j) {
  long long total = 0;
  for (const auto& [key, cnt] : h.m)
    if (key[0] == i && key[1] == j) total += key[2] * cnt;
  return total;
}

bool SignatureReconstruction::all_match() const {
  if (!applicable) return false;
  for (const auto& id : identities)
    if (!id.match) return false;
  return true;
}

SignatureReconstruction reconstruct_sigs(const SignatureHistogram& h, long long s) {
  SignatureReconstruction rec;
  for (const auto& [key, cnt] : h.m) {
    if (cnt == 0) continue;
    const long long i = key[0], j = key[1], k = key[2];
    const bool ok =
        k == 0 || (k == 2 && i == 0 && j == 0) ||
        (k == 1 && ((i == 0 && j == 0) || (i == 1 && j == 0) || (i == 0 && j == 1)));
    if (!ok) {
      rec.applicable = false;
      rec.violating = key;
      return rec;
    }
  }
  rec.applicable = true;
  const long long m101 = h.count(1, 0, 1);
  const long long m011 = h.count(0, 1, 1);
  const long long m001 = h.count(0, 0, 1);
  auto add = [&rec](std::string name, long long reconstructed, long long direct) {
    rec.identities.push_back(
        {std::move(name), reconstructed, direct, reconstructed == direct});
  };
  const long long twice_m002 = s - m101 - m011 - m001;
  const long long m002 = twice_m002 / 2;
  add("m002 = (s - m101 - m011 - m001) / 2",
      twice_m002 % 2 == 0 ? m002 : -1, h.count(0, 0, 2));
  add("m100 = m10* - m101", h.marginal(1, 0) - m101, h.count(1, 0, 0));
  add("m010 = m01* - m011", h.marginal(0, 1) - m011, h.count(0, 1, 0));
  add("m000 = m00* - m001 - m002", h.marginal(0, 0) - m001 - m002,
      h.count(0, 0, 0));
  add("m200 = m20*", h.marginal(2, 0), h.count(2, 0, 0));
  add("m020 = m02*", h.marginal(0, 2), h.count(0, 2, 0));
  return rec;
}

BridgeCheck bridge_check(const DiscreteDistribution& d, long long s, int support) {
  if (s < 2) throw PreconditionError("bridge_check: s >= 2");
  if (support < 1 || support > d.n())
    throw PreconditionError("bridge_check: support out of range");
  for (int i = 0; i < d.n(); ++i)
    if (d.probs[i] > 1.0 / (2.0 * s) + 1e-15)
      throw PreconditionError("bridge_check: requires p_i <= 1/(2s) everywhere");

  BridgeCheck out;
  out.s = s;
  out.support = support;
  out.lo_bound = 2.0 * std::sqrt(static_cast<double>(s)) / 3.0;
  out.hi_bound = 30.0 * std::pow(static_cast<double>(s), 1.5);
  const long long cmax = static_cast<long long>(std::floor(std::log(s)));
  double combos = std::pow(static_cast<double>(cmax) + 1.0, support);
  if (combos > 1e6) throw PreconditionError("bridge_check: enumeration too large");

  const double lo_total = s - std::sqrt(static_cast<double>(s));
  const double hi_total = s + std::sqrt(static_cast<double>(s));
  double tail_log = 0.0;  // bins beyond the support contribute zero counts
  for (int i = support; i < d.n(); ++i) tail_log += s * std::log1p(-d.probs[i]);

  std::vector<long long> counts(support, 0);
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = -std::numeric_limits<double>::infinity();

  auto visit = [&](auto&& self, int idx) -> void {
    if (idx == support) {
      ++out.enumerated;
      long long total = 0;
      for (long long c : counts) total += c;
      if (total < lo_total || total > hi_total) return;
      ++out.in_regime;
      double log_p1 = std::lgamma(static_cast<double>(total) + 1.0);
      double log_p2 = tail_log;
      for (int i = 0; i < support; ++i) {
        const long long c = counts[i];
        const double p = d.probs[i];
        if (c > 0) log_p1 += c * std::log(p) - std::lgamma(static_cast<double>(c) + 1.0);
        log_p2 += log_binomial_coeff(s, c);
        if (c > 0) log_p2 += c * std::log(p);
        log_p2 += (s - c) * std::log1p(-p);
      }
      const double ratio = std::exp(log_p1 - log_p2);
      min_ratio = std::min(min_ratio, ratio);
      max_ratio = std::max(max_ratio, ratio);
      return;
    }
    for (long long c = 0; c <= cmax; ++c) {
      counts[idx] = c;
      self(self, idx + 1);
    }
  };
  visit(visit, 0);

  out.vacuous = out.in_regime == 0;
  if (!out.vacuous) {
    out.min_ratio = min_ratio;
    out.max_ratio = max_ratio;
    out.all_within = min_ratio >= out.lo_bound && max_ratio <= out.hi_bound;
  }
  return out;
}

}  // namespace disttest
