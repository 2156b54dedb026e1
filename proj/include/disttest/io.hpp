#pragma once

#include <string>
#include <utility>

#include "disttest/distinguisher.hpp"
#include "disttest/distribution.hpp"
#include "disttest/sampling.hpp"

namespace disttest {

// JSON distribution files: dense {"n": N, "probs": [...]} or sparse
// {"n": N, "entries": [[id, prob], ...]}, unlisted ids zero. Entries must be
// nonnegative; a total within 1e-6 of 1 is renormalized, anything further off
// is rejected as corrupt rather than silently rescaled.
DiscreteDistribution load_distribution(const std::string& path);
void save_distribution(const DiscreteDistribution& d, const std::string& path,
                       bool sparse = false);

// A pair file is {"p": <distribution>, "q": <distribution>} with equal n.
std::pair<DiscreteDistribution, DiscreteDistribution> load_pair(const std::string& path);
void save_pair(const DiscreteDistribution& p, const DiscreteDistribution& q,
               const std::string& path, bool sparse = false);

// Configuration files: {"counts": [...]} of nonnegative integers.
Configuration load_configuration(const std::string& path);
void save_configuration(const Configuration& cfg, const std::string& path);

// Parse helpers shared with the CLI: accept a JSON string instead of a file.
DiscreteDistribution distribution_from_json(const std::string& text);
std::string distribution_to_json(const DiscreteDistribution& d, bool sparse = false);

std::string decision_to_json(const Decision& d);

}  // namespace disttest
