// Command-line front end: every subcommand builds an ExperimentSpec, runs it
// through the harness, and emits one result table. Exit codes: 0 success,
// 2 invalid arguments or failed preconditions, 3 I/O failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "disttest/errors.hpp"
#include "disttest/harness.hpp"
#include "disttest/io.hpp"

namespace {

struct CliArgs {
  std::string instance;
  std::string s_text;
  long long trials = 100;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  std::vector<std::string> override_kvs;
  bool sparse = false;
};

void add_common_options(CLI::App* sub, CliArgs& args, bool instance_required) {
  auto* inst = sub->add_option("--instance", args.instance,
                               "gen:hard:N | gen:uniform:N | gen:identical:N | "
                               "file:path | file:path_p,path_q | path");
  if (instance_required) inst->required();
  sub->add_option("--s", args.s_text,
                  "testing sample count (integer, or 'auto' for the doubling "
                  "search under distinguish); defaults to the instance's "
                  "recommended count where one exists");
  sub->add_option("--trials", args.trials, "trials / games per row");
  sub->add_option("--seed", args.seed, "master seed; reruns with the same seed "
                                       "reproduce byte-identical output");
  sub->add_option("--out", args.out, "output file (default stdout)");
  sub->add_option("--format", args.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--override", args.override_kvs,
                  "experiment-specific knob, key=value; repeatable");
}

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& kvs) {
  std::map<std::string, std::string> out;
  for (const std::string& kv : kvs) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw disttest::PreconditionError("--override expects key=value, got " + kv);
    const std::string key = kv.substr(0, eq);
    if (out.count(key))
      throw disttest::PreconditionError("duplicate override " + key);
    out[key] = kv.substr(eq + 1);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw disttest::IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw disttest::IoError("write to " + path + " failed");
}

int run(int argc, char** argv) {
  CLI::App app{"sample-efficient distinguishability testing for black-box "
               "discrete distributions"};
  app.require_subcommand(1);
  CliArgs args;

  const struct {
    const char* name;
    const char* help;
    bool instance_required;
  } subs[] = {
      {"norms", "norm-derived separation parameters of a pair", true},
      {"distinguish", "repeated two-stage distinguisher trials", true},
      {"closeness", "closeness verdicts built from the distinguisher", true},
      {"sweep", "distinguisher accuracy across a grid of sample counts", true},
      {"concentration", "balls-and-bins concentration checks "
                        "(weighted occupancy, Bernoulli comparison, type-I/II "
                        "bridge, training outliers)", false},
      {"lowerbound", "permutation-game experiments for the lower-bound model", true},
  };
  for (const auto& s : subs)
    add_common_options(app.add_subcommand(s.name, s.help), args, s.instance_required);

  CLI::App* gen = app.add_subcommand("generate", "materialize an instance as a pair file");
  gen->add_option("--instance", args.instance, "generator description, e.g. gen:hard:1024")
      ->required();
  gen->add_option("--out", args.out, "output pair file")->required();
  gen->add_flag("--sparse", args.sparse, "write sparse entries instead of dense probs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  if (name == "generate") {
    const disttest::Instance inst = disttest::parse_instance(args.instance);
    disttest::save_pair(inst.p, inst.q, args.out, args.sparse);
    return 0;
  }

  disttest::ExperimentSpec spec;
  spec.subcommand = name;
  spec.instance = args.instance;
  spec.trials = args.trials;
  spec.seed = args.seed;
  spec.out = args.out;
  spec.format = args.format == "json" ? disttest::OutputFormat::json
                                      : disttest::OutputFormat::csv;
  spec.overrides = parse_overrides(args.override_kvs);
  if (!args.s_text.empty()) {
    if (args.s_text == "auto") {
      if (name != "distinguish")
        throw disttest::PreconditionError("--s auto only applies to distinguish");
      spec.auto_s = true;
    } else {
      try {
        std::size_t pos = 0;
        spec.s = std::stoll(args.s_text, &pos);
        if (pos != args.s_text.size()) throw std::invalid_argument("trailing junk");
      } catch (const std::exception&) {
        throw disttest::PreconditionError("--s expects an integer or 'auto'");
      }
    }
  }
  if (spec.auto_s && !spec.s) spec.s = 10;

  const disttest::ResultTable table = disttest::run_experiment(spec);
  write_text(spec.out, disttest::render(table, spec.format));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const disttest::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    // PreconditionError and DimensionError land here.
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 1;
  }
}
