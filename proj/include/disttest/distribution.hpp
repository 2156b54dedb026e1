#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "disttest/errors.hpp"

namespace disttest {

// Finite distribution over element ids 0..n-1. Entries are validated on
// construction: non-negative, summing to 1 within 1e-9. Immutable by
// convention after construction.
struct DiscreteDistribution {
  Eigen::VectorXd probs;

  int n() const { return static_cast<int>(probs.size()); }

  static DiscreteDistribution from_probs(Eigen::VectorXd p);
  static DiscreteDistribution uniform(int n);
  static DiscreteDistribution point_mass(int n, int id);
  // Rescales non-negative weights to sum 1. Rejects all-zero input.
  static DiscreteDistribution normalized(const Eigen::VectorXd& weights);
};

// Norm-derived quantities of a pair. numsamples = |P+Q|_2 / |P-Q|_2^2 is the
// sample-complexity-controlling parameter; alpha its reciprocal. When the
// inputs are identical numsamples is +inf and recommended_s is meaningless:
// check has_recommended_s, not the value.
struct SeparationParams {
  double l1 = 0;
  double l2_diff = 0;
  double l2_sum = 0;
  double l3_diff = 0;
  double linf_p = 0;
  double linf_q = 0;
  double alpha = 0;
  double numsamples = 0;
  bool identical = false;
  bool has_recommended_s = false;
  long long recommended_s = 0;  // ceil(60 * |ln alpha|^3.5 / alpha)
};

SeparationParams norms(const DiscreteDistribution& p, const DiscreteDistribution& q);

// Three-way partition of the domain for a weakly disjoint pair. Masses obey
// disjoint_mass_p == disjoint_mass_q == |P-Q|_1 / 2.
struct WeaklyDisjointDecomposition {
  std::vector<int> common;
  std::vector<int> disjoint_p;
  std::vector<int> disjoint_q;
  double common_mass = 0;
  double disjoint_mass_p = 0;
  double disjoint_mass_q = 0;
};

struct WeaklyDisjointResult {
  bool is_weakly_disjoint = false;
  int violating_element = -1;          // first violator when not weakly disjoint
  WeaklyDisjointDecomposition decomposition;  // valid only on success
};

// Classifies every element as common (p_x == q_x up to tol, relative) or
// disjoint (the other side is zero up to tol). tol guards float construction
// noise only; exact-rational inputs work with tol = 0.
WeaklyDisjointResult weakly_disjoint_decompose(const DiscreteDistribution& p,
                                               const DiscreteDistribution& q,
                                               double tol = 1e-12);

// Benchmark pair with numsamples = Theta(n^(2/3)): a common heavy block of
// ~n^(2/3) ids carrying mass 1/2, and light mass 1/2 spread uniformly over a
// shared block plus per-side disjoint blocks (quarter of the remainder each;
// the last quarter stays at zero). Requires n >= 8, n % 4 == 0.
struct HardPair {
  DiscreteDistribution p;
  DiscreteDistribution q;
  int heavy_count = 0;
};

HardPair make_hard_pair(int n);

// A pair pushed through a seeded uniformly random domain permutation.
// perm maps old id -> new id, so permuted probs satisfy
// permuted[perm[j]] == base[j].
struct PermutedPair {
  DiscreteDistribution base_p;
  DiscreteDistribution base_q;
  std::vector<int> perm;
  std::uint64_t seed = 0;

  DiscreteDistribution permuted_p() const;
  DiscreteDistribution permuted_q() const;
};

PermutedPair apply_permutation(const DiscreteDistribution& p,
                               const DiscreteDistribution& q, std::uint64_t seed);

}  // namespace disttest
