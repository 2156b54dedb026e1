#include "disttest/distribution.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "disttest/rng.hpp"

namespace disttest {

DiscreteDistribution DiscreteDistribution::from_probs(Eigen::VectorXd p) {
  if (p.size() < 1) throw DimensionError("distribution needs n >= 1");
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0))
      throw DimensionError("negative probability at element " + std::to_string(i));
  }
  const double sum = p.sum();
  if (std::abs(sum - 1.0) > 1e-9)
    throw DimensionError("probabilities sum to " + std::to_string(sum) + ", not 1");
  return DiscreteDistribution{std::move(p)};
}

DiscreteDistribution DiscreteDistribution::uniform(int n) {
  if (n < 1) throw DimensionError("uniform needs n >= 1");
  return DiscreteDistribution{Eigen::VectorXd::Constant(n, 1.0 / n)};
}

DiscreteDistribution DiscreteDistribution::point_mass(int n, int id) {
  if (n < 1 || id < 0 || id >= n) throw DimensionError("point mass id out of range");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  p[id] = 1.0;
  return DiscreteDistribution{std::move(p)};
}

DiscreteDistribution DiscreteDistribution::normalized(const Eigen::VectorXd& weights) {
  if (weights.size() < 1) throw DimensionError("normalized needs n >= 1");
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw DimensionError("negative weight");
  }
  const double sum = weights.sum();
  if (sum <= 0.0) throw DimensionError("weights sum to zero");
  return DiscreteDistribution{weights / sum};
}

SeparationParams norms(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.n() != q.n()) throw DimensionError("norms: domain sizes differ");
  const Eigen::VectorXd diff = p.probs - q.probs;
  const Eigen::VectorXd sum = p.probs + q.probs;
  SeparationParams out;
  out.l1 = diff.lpNorm<1>();
  out.l2_diff = diff.norm();
  out.l2_sum = sum.norm();
  out.l3_diff = std::cbrt(diff.array().abs().cube().sum());
  out.linf_p = p.probs.maxCoeff();
  out.linf_q = q.probs.maxCoeff();
  out.identical = out.l2_diff <= 1e-15 * out.l2_sum;
  if (out.identical) {
    out.alpha = 0.0;
    out.numsamples = std::numeric_limits<double>::infinity();
    out.has_recommended_s = false;
    out.recommended_s = 0;
  } else {
    out.numsamples = out.l2_sum / (out.l2_diff * out.l2_diff);
    out.alpha = 1.0 / out.numsamples;
    const double raw =
        60.0 * std::pow(std::abs(std::log(out.alpha)), 3.5) / out.alpha;
    // Values beyond ~9e15 stop being exactly representable as integers;
    // callers must treat such instances as "pick your own s".
    if (raw < 9e15) {
      out.has_recommended_s = true;
      out.recommended_s = static_cast<long long>(std::ceil(raw));
    }
  }
  return out;
}

WeaklyDisjointResult weakly_disjoint_decompose(const DiscreteDistribution& p,
                                               const DiscreteDistribution& q,
                                               double tol) {
  if (p.n() != q.n()) throw DimensionError("decompose: domain sizes differ");
  if (tol < 0) throw PreconditionError("tol must be >= 0");
  WeaklyDisjointResult res;
  auto& d = res.decomposition;
  for (int i = 0; i < p.n(); ++i) {
    const double pi = p.probs[i], qi = q.probs[i];
    const double scale = std::max(pi, qi);
    if (std::abs(pi - qi) <= tol * scale) {
      d.common.push_back(i);
      d.common_mass += pi;
    } else if (qi <= tol * pi) {
      d.disjoint_p.push_back(i);
      d.disjoint_mass_p += pi;
    } else if (pi <= tol * qi) {
      d.disjoint_q.push_back(i);
      d.disjoint_mass_q += qi;
    } else {
      res.is_weakly_disjoint = false;
      res.violating_element = i;
      res.decomposition = {};
      return res;
    }
  }
  res.is_weakly_disjoint = true;
  return res;
}

HardPair make_hard_pair(int n) {
  if (n < 8 || n % 4 != 0)
    throw PreconditionError("make_hard_pair needs n >= 8 divisible by 4");
  // Integer-exact ceil(n^(2/3)): smallest k with k^3 >= n^2.
  long long k = 1;
  const long long n2 = 1LL * n * n;
  while (k * k * k < n2) ++k;
  int h = static_cast<int>(k + (k % 2));
  while ((n - h) % 4 != 0) h += 2;
  const int r = n - h;
  if (r <= 0) throw PreconditionError("make_hard_pair: n too small for heavy block");
  const int quarter = r / 4;
  const double heavy = 0.5 / h;
  const double light = 1.0 / r;  // mass 1/2 over r/2 ids per side
  Eigen::VectorXd pv = Eigen::VectorXd::Zero(n), qv = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < h; ++i) pv[i] = qv[i] = heavy;
  for (int i = h; i < h + quarter; ++i) pv[i] = qv[i] = light;      // shared light
  for (int i = h + quarter; i < h + 2 * quarter; ++i) pv[i] = light;  // P only
  for (int i = h + 2 * quarter; i < h + 3 * quarter; ++i) qv[i] = light;  // Q only
  HardPair pair{DiscreteDistribution::from_probs(std::move(pv)),
                DiscreteDistribution::from_probs(std::move(qv)), h};

  // The pair must satisfy the lower-bound technical preconditions for every
  // s up to numsamples / 10.
  const SeparationParams sp = norms(pair.p, pair.q);
  const double s_cap = sp.numsamples / 10.0;
  if (!(s_cap * sp.l3_diff <= 0.25 && s_cap * sp.linf_p <= 1.0 &&
        s_cap * sp.linf_q <= 1.0))
    throw PreconditionError("make_hard_pair: generated pair violates its own gates");
  return pair;
}

DiscreteDistribution PermutedPair::permuted_p() const {
  Eigen::VectorXd out(base_p.n());
  for (int j = 0; j < base_p.n(); ++j) out[perm[j]] = base_p.probs[j];
  return DiscreteDistribution{std::move(out)};
}

DiscreteDistribution PermutedPair::permuted_q() const {
  Eigen::VectorXd out(base_q.n());
  for (int j = 0; j < base_q.n(); ++j) out[perm[j]] = base_q.probs[j];
  return DiscreteDistribution{std::move(out)};
}

PermutedPair apply_permutation(const DiscreteDistribution& p,
                               const DiscreteDistribution& q, std::uint64_t seed) {
  if (p.n() != q.n()) throw DimensionError("apply_permutation: domain sizes differ");
  const int n = p.n();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  RngStream rng(seed);
  for (int i = n - 1; i >= 1; --i) {
    // Bounded draw by rejection; keeps the permutation exactly uniform.
    const std::uint64_t bound = static_cast<std::uint64_t>(i) + 1;
    const std::uint64_t limit = RngStream::max() - RngStream::max() % bound;
    std::uint64_t v;
    do {
      v = rng();
    } while (v >= limit);
    std::swap(perm[i], perm[static_cast<int>(v % bound)]);
  }
  return PermutedPair{p, q, std::move(perm), seed};
}

}  // namespace disttest
