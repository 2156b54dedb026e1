#include "disttest/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "disttest/errors.hpp"

namespace disttest {

namespace {

using nlohmann::ordered_json;

ordered_json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return j;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write to " + path + " failed");
}

DiscreteDistribution dist_from_json(const ordered_json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("n"))
    throw IoError(where + ": distribution object must carry \"n\"");
  const long long n = j.at("n").get<long long>();
  if (n < 1 || n > (1LL << 26)) throw IoError(where + ": unreasonable n");
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(n);

  if (j.contains("probs")) {
    const auto& arr = j.at("probs");
    if (!arr.is_array() || static_cast<long long>(arr.size()) != n)
      throw IoError(where + ": \"probs\" must be an array of length n");
    for (long long i = 0; i < n; ++i) probs[i] = arr[static_cast<std::size_t>(i)].get<double>();
  } else if (j.contains("entries")) {
    const auto& arr = j.at("entries");
    if (!arr.is_array()) throw IoError(where + ": \"entries\" must be an array");
    for (const auto& e : arr) {
      if (!e.is_array() || e.size() != 2)
        throw IoError(where + ": each entry must be [id, prob]");
      const long long id = e[0].get<long long>();
      if (id < 0 || id >= n) throw IoError(where + ": entry id out of range");
      probs[id] = e[1].get<double>();
    }
  } else {
    throw IoError(where + ": need \"probs\" or \"entries\"");
  }

  for (long long i = 0; i < n; ++i)
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i]))
      throw IoError(where + ": probabilities must be finite and nonnegative");
  const double total = probs.sum();
  if (std::abs(total - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << where << ": probabilities sum to " << total
        << ", outside the 1e-6 normalization band";
    throw IoError(msg.str());
  }
  probs /= total;
  return DiscreteDistribution::from_probs(std::move(probs));
}

ordered_json dist_to_json(const DiscreteDistribution& d, bool sparse) {
  ordered_json j;
  j["n"] = d.n();
  if (sparse) {
    ordered_json entries = ordered_json::array();
    for (int i = 0; i < d.n(); ++i)
      if (d.probs[i] > 0.0) entries.push_back({i, d.probs[i]});
    j["entries"] = std::move(entries);
  } else {
    std::vector<double> probs(d.probs.data(), d.probs.data() + d.n());
    j["probs"] = probs;
  }
  return j;
}

}  // namespace

DiscreteDistribution load_distribution(const std::string& path) {
  return dist_from_json(parse_file(path), path);
}

void save_distribution(const DiscreteDistribution& d, const std::string& path,
                       bool sparse) {
  write_file(path, dist_to_json(d, sparse).dump(2) + "\n");
}

std::pair<DiscreteDistribution, DiscreteDistribution> load_pair(const std::string& path) {
  const ordered_json j = parse_file(path);
  if (!j.is_object() || !j.contains("p") || !j.contains("q"))
    throw IoError(path + ": pair file must carry \"p\" and \"q\"");
  DiscreteDistribution p = dist_from_json(j.at("p"), path + ":p");
  DiscreteDistribution q = dist_from_json(j.at("q"), path + ":q");
  if (p.n() != q.n()) throw IoError(path + ": p and q have different n");
  return {std::move(p), std::move(q)};
}

void save_pair(const DiscreteDistribution& p, const DiscreteDistribution& q,
               const std::string& path, bool sparse) {
  ordered_json j;
  j["p"] = dist_to_json(p, sparse);
  j["q"] = dist_to_json(q, sparse);
  write_file(path, j.dump(2) + "\n");
}

Configuration load_configuration(const std::string& path) {
  const ordered_json j = parse_file(path);
  if (!j.is_object() || !j.contains("counts") || !j.at("counts").is_array())
    throw IoError(path + ": configuration file must carry a \"counts\" array");
  const auto& arr = j.at("counts");
  Configuration cfg;
  cfg.counts = CountVector::Zero(static_cast<long long>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const long long c = arr[i].get<long long>();
    if (c < 0) throw IoError(path + ": counts must be nonnegative");
    cfg.counts[static_cast<long long>(i)] = c;
    cfg.total += c;
  }
  return cfg;
}

void save_configuration(const Configuration& cfg, const std::string& path) {
  ordered_json j;
  std::vector<long long> counts(cfg.counts.data(), cfg.counts.data() + cfg.counts.size());
  j["counts"] = counts;
  write_file(path, j.dump(2) + "\n");
}

DiscreteDistribution distribution_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("inline distribution: ") + e.what());
  }
  return dist_from_json(j, "inline distribution");
}

std::string distribution_to_json(const DiscreteDistribution& d, bool sparse) {
  return dist_to_json(d, sparse).dump(2);
}

std::string decision_to_json(const Decision& d) {
  ordered_json j;
  j["answer"] = d.answer == Answer::P ? "P" : "Q";
  j["stage"] = d.stage == Stage::norm_stage ? "norm" : "collision";
  j["reps"] = d.stats.reps;
  j["l"] = d.stats.l;
  j["l_overridden"] = d.stats.l_overridden;
  j["step2_fired"] = d.stats.step2_fired;
  j["step3_fired"] = d.stats.step3_fired;
  j["both_conditions"] = d.stats.both_conditions;
  j["c_p"] = d.stats.c_p;
  j["c_q"] = d.stats.c_q;
  j["estimator_failures"] = d.stats.estimator_failures;
  j["p_est"] = d.stats.p_est;
  j["q_est"] = d.stats.q_est;
  j["t_est"] = d.stats.t_est;
  j["budget"] = {{"from_p", d.budget.from_p},
                 {"from_q", d.budget.from_q},
                 {"from_t", d.budget.from_t},
                 {"total", d.budget.total()}};
  j["budget_bound"] = d.budget_bound;
  j["budget_formula_applicable"] = d.budget_formula_applicable;
  j["budget_ok"] = d.budget_ok;
  return j.dump(2);
}

}  // namespace disttest
