#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "disttest/distribution.hpp"

namespace disttest {

enum class OutputFormat { csv, json };

// One experiment request, as assembled by the CLI or a test.
struct ExperimentSpec {
  std::string subcommand;
  std::string instance;
  std::optional<long long> s;
  bool auto_s = false;
  long long trials = 100;
  std::uint64_t seed = 1;
  std::string out;  // empty = stdout
  OutputFormat format = OutputFormat::csv;
  std::map<std::string, std::string> overrides;
};

// Table cell. The wrapper exists to keep string literals from decaying into
// the bool alternative of the variant.
struct Value {
  std::variant<bool, long long, double, std::string> v;

  Value(bool b) : v(b) {}
  Value(int i) : v(static_cast<long long>(i)) {}
  Value(long long i) : v(i) {}
  Value(double d) : v(d) {}
  Value(std::string s) : v(std::move(s)) {}
  Value(const char* s) : v(std::string(s)) {}
};

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
};

// Deterministic emitters: same table, same bytes. Doubles print with
// shortest-round-trip formatting in both; non-finite doubles become the
// strings "inf"/"-inf"/"nan" in JSON so the two formats agree field by field.
std::string to_csv(const ResultTable& t);
std::string to_json_string(const ResultTable& t);
std::string render(const ResultTable& t, OutputFormat f);

struct Instance {
  std::string name;
  DiscreteDistribution p, q;
  bool identical = false;
};

// Accepts gen:hard:N, gen:uniform:N, gen:identical:N, file:path,
// file:path_p,path_q, or a bare path. A single-distribution file yields the
// identical pair (d, d).
Instance parse_instance(const std::string& desc);

// Worker pool size: DISTTEST_THREADS when set, hardware concurrency otherwise.
int worker_count();

// Runs fn(0..count-1) across the pool. Each index owns its output slot and its
// derived RNG stream, so scheduling cannot change any result.
void parallel_for_index(long long count, const std::function<void(long long)>& fn);

ResultTable run_norms(const ExperimentSpec& spec);
ResultTable run_distinguish_trials(const ExperimentSpec& spec);
ResultTable run_closeness_trials(const ExperimentSpec& spec);
ResultTable run_distinguish_sweep(const ExperimentSpec& spec);
ResultTable run_concentration_suite(const ExperimentSpec& spec);
ResultTable run_lowerbound_suite(const ExperimentSpec& spec);

// Dispatch by spec.subcommand; rejects unknown subcommands and unknown
// override keys.
ResultTable run_experiment(const ExperimentSpec& spec);

}  // namespace disttest
