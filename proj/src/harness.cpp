#include "disttest/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "disttest/distinguisher.hpp"
#include "disttest/errors.hpp"
#include "disttest/estimators.hpp"
#include "disttest/io.hpp"
#include "disttest/lowerbound.hpp"
#include "disttest/sampling.hpp"

namespace disttest {

namespace {

using nlohmann::ordered_json;

std::string format_double(double d) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), d);
  return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// ---- override parsing ----------------------------------------------------

long long get_ll(const ExperimentSpec& spec, const std::string& key, long long dflt) {
  const auto it = spec.overrides.find(key);
  if (it == spec.overrides.end()) return dflt;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw PreconditionError("override " + key + "=" + it->second + " is not an integer");
  }
}

double get_double(const ExperimentSpec& spec, const std::string& key, double dflt) {
  const auto it = spec.overrides.find(key);
  if (it == spec.overrides.end()) return dflt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw PreconditionError("override " + key + "=" + it->second + " is not a number");
  }
}

std::string get_str(const ExperimentSpec& spec, const std::string& key,
                    const std::string& dflt) {
  const auto it = spec.overrides.find(key);
  return it == spec.overrides.end() ? dflt : it->second;
}

bool emit_timings(const ExperimentSpec& spec) {
  return get_ll(spec, "emit_timings", 0) != 0;
}

DistinguishOptions distinguish_options(const ExperimentSpec& spec) {
  DistinguishOptions opts;
  const long long l = get_ll(spec, "l", 0);
  if (l > 0) opts.l_override = l;
  const std::string mode = get_str(spec, "mode", "direct");
  if (mode == "batched") opts.mode = SamplingMode::batched;
  else if (mode != "direct")
    throw PreconditionError("override mode must be direct or batched");
  opts.estimator_attempts = static_cast<int>(get_ll(spec, "attempts", 3));
  opts.min_reps = static_cast<int>(get_ll(spec, "min_reps", 3));
  if (opts.estimator_attempts < 1 || opts.min_reps < 1)
    throw PreconditionError("attempts and min_reps must be positive");
  return opts;
}

long long default_l_for(long long s) {
  const double ls = std::log(static_cast<double>(s));
  return static_cast<long long>(std::ceil(30.0 * static_cast<double>(s) * std::pow(ls, 1.5)));
}

// Chooses s for pair experiments: explicit --s wins, else the recommended
// sample count; identical pairs have none, so they require --s.
long long required_s(const ExperimentSpec& spec, const Instance& inst) {
  if (spec.s) {
    if (*spec.s < 10) throw PreconditionError("--s must be at least 10");
    return *spec.s;
  }
  const SeparationParams nrm = norms(inst.p, inst.q);
  if (!nrm.has_recommended_s)
    throw PreconditionError(
        "instance has no finite recommended sample count; pass --s explicitly");
  return nrm.recommended_s;
}

double wall_ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

const char* hyp_name(Hypothesis h) { return h == Hypothesis::H1 ? "H1" : "H2"; }
const char* answer_name(Answer a) { return a == Answer::P ? "P" : "Q"; }

}  // namespace

// ---- rendering -------------------------------------------------------------

std::string to_csv(const ResultTable& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(t.columns[i]);
  }
  out << '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size())
      throw DimensionError("result row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      std::visit(
          [&out](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, bool>) out << (v ? "true" : "false");
            else if constexpr (std::is_same_v<T, long long>) out << v;
            else if constexpr (std::is_same_v<T, double>) out << format_double(v);
            else out << csv_escape(v);
          },
          row[i].v);
    }
    out << '\n';
  }
  return out.str();
}

std::string to_json_string(const ResultTable& t) {
  ordered_json doc;
  doc["columns"] = t.columns;
  ordered_json rows = ordered_json::array();
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size())
      throw DimensionError("result row width does not match the header");
    ordered_json jrow = ordered_json::array();
    for (const auto& cell : row) {
      std::visit(
          [&jrow](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              // Non-finite doubles have no JSON number form; keep them as the
              // same strings the CSV emitter prints.
              if (std::isfinite(v)) jrow.push_back(v);
              else jrow.push_back(format_double(v));
            } else {
              jrow.push_back(v);
            }
          },
          cell.v);
    }
    rows.push_back(std::move(jrow));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string render(const ResultTable& t, OutputFormat f) {
  return f == OutputFormat::csv ? to_csv(t) : to_json_string(t);
}

// ---- instances -------------------------------------------------------------

namespace {

Instance instance_from_file(const std::string& paths_text) {
  Instance inst;
  inst.name = paths_text;
  const std::size_t comma = paths_text.find(',');
  if (comma != std::string::npos) {
    inst.p = load_distribution(paths_text.substr(0, comma));
    inst.q = load_distribution(paths_text.substr(comma + 1));
    if (inst.p.n() != inst.q.n())
      throw DimensionError("instance files disagree on n");
  } else {
    std::ifstream in(paths_text);
    if (!in) throw IoError("cannot open " + paths_text);
    ordered_json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw IoError(paths_text + ": " + e.what());
    }
    if (j.is_object() && j.contains("p") && j.contains("q")) {
      auto pq = load_pair(paths_text);
      inst.p = std::move(pq.first);
      inst.q = std::move(pq.second);
    } else {
      inst.p = load_distribution(paths_text);
      inst.q = inst.p;
    }
  }
  inst.identical = inst.p.n() == inst.q.n() &&
                   (inst.p.probs.array() == inst.q.probs.array()).all();
  return inst;
}

}  // namespace

Instance parse_instance(const std::string& desc) {
  if (desc.empty()) throw PreconditionError("empty instance description");
  if (desc.rfind("gen:", 0) == 0) {
    const std::string rest = desc.substr(4);
    const std::size_t colon = rest.find(':');
    if (colon == std::string::npos)
      throw PreconditionError("generator instances look like gen:<kind>:<n>");
    const std::string kind = rest.substr(0, colon);
    long long n = 0;
    try {
      n = std::stoll(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw PreconditionError("bad generator size in " + desc);
    }
    if (n < 1 || n > (1LL << 26)) throw PreconditionError("unreasonable generator size");
    Instance inst;
    inst.name = desc;
    if (kind == "hard") {
      const HardPair hp = make_hard_pair(static_cast<int>(n));
      inst.p = hp.p;
      inst.q = hp.q;
      inst.identical = false;
    } else if (kind == "uniform" || kind == "identical") {
      inst.p = DiscreteDistribution::uniform(static_cast<int>(n));
      inst.q = inst.p;
      inst.identical = true;
    } else {
      throw PreconditionError("unknown generator kind " + kind);
    }
    return inst;
  }
  if (desc.rfind("file:", 0) == 0) return instance_from_file(desc.substr(5));
  return instance_from_file(desc);
}

// ---- worker pool -----------------------------------------------------------

int worker_count() {
  if (const char* env = std::getenv("DISTTEST_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1)
      return static_cast<int>(std::min<long>(v, 256));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 256u));
}

void parallel_for_index(long long count, const std::function<void(long long)>& fn) {
  if (count <= 0) return;
  const int workers = static_cast<int>(std::min<long long>(worker_count(), count));
  if (workers <= 1) {
    for (long long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&]() {
    for (;;) {
      const long long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) threads.emplace_back(body);
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---- runners ---------------------------------------------------------------

ResultTable run_norms(const ExperimentSpec& spec) {
  const Instance inst = parse_instance(spec.instance);
  const SeparationParams nrm = norms(inst.p, inst.q);
  const WeaklyDisjointResult wd = weakly_disjoint_decompose(inst.p, inst.q);

  ResultTable t;
  t.columns = {"instance",  "n",          "l1",       "l2_diff",
               "l2_sum",    "l3_diff",    "linf_p",   "linf_q",
               "alpha",     "numsamples", "identical", "has_recommended_s",
               "recommended_s", "weakly_disjoint", "common_mass",
               "disjoint_mass_p", "disjoint_mass_q"};
  std::vector<Value> row{
      inst.name,   static_cast<long long>(inst.p.n()),
      nrm.l1,      nrm.l2_diff,
      nrm.l2_sum,  nrm.l3_diff,
      nrm.linf_p,  nrm.linf_q,
      nrm.alpha,   nrm.numsamples,
      nrm.identical, nrm.has_recommended_s,
      nrm.recommended_s, wd.is_weakly_disjoint};
  if (wd.is_weakly_disjoint) {
    row.emplace_back(wd.decomposition.common_mass);
    row.emplace_back(wd.decomposition.disjoint_mass_p);
    row.emplace_back(wd.decomposition.disjoint_mass_q);
  } else {
    row.emplace_back("");
    row.emplace_back("");
    row.emplace_back("");
  }
  t.rows.push_back(std::move(row));
  return t;
}

namespace {

Hypothesis trial_truth(const std::string& mode, long long trial) {
  if (mode == "h1") return Hypothesis::H1;
  if (mode == "h2") return Hypothesis::H2;
  if (mode == "alternate") return trial % 2 == 0 ? Hypothesis::H1 : Hypothesis::H2;
  throw PreconditionError("override hypothesis must be h1, h2 or alternate");
}

}  // namespace

ResultTable run_distinguish_trials(const ExperimentSpec& spec) {
  const Instance inst = parse_instance(spec.instance);
  if (spec.trials < 1) throw PreconditionError("--trials must be positive");
  const DistinguishOptions opts = distinguish_options(spec);
  const std::string hyp_mode = get_str(spec, "hypothesis", "alternate");
  const bool timings = emit_timings(spec);

  if (spec.auto_s) {
    const long long s0 = spec.s.value_or(10);
    if (s0 < 10) throw PreconditionError("--s must be at least 10");
    struct Out {
      Hypothesis truth;
      AutoSResult res;
    };
    std::vector<Out> outs(static_cast<std::size_t>(spec.trials),
                          Out{Hypothesis::H1, AutoSResult{}});
    parallel_for_index(spec.trials, [&](long long i) {
      const Hypothesis truth = trial_truth(hyp_mode, i);
      RngStream rng = RngStream::derive(spec.seed, static_cast<std::uint64_t>(i));
      Source sp(inst.p), sq(inst.q);
      Source st(truth == Hypothesis::H1 ? inst.p : inst.q);
      outs[static_cast<std::size_t>(i)] =
          Out{truth, auto_s(sp, sq, st, s0, rng, opts)};
    });
    ResultTable t;
    t.columns = {"trial", "hypothesis", "answer", "correct",
                 "s0",    "final_s",    "doublings", "agreed"};
    for (long long i = 0; i < spec.trials; ++i) {
      const Out& o = outs[static_cast<std::size_t>(i)];
      const bool correct = (o.truth == Hypothesis::H1) == (o.res.answer == Answer::P);
      t.rows.push_back({i, hyp_name(o.truth), answer_name(o.res.answer), correct, s0,
                        o.res.final_s, o.res.doublings, o.res.agreed});
    }
    return t;
  }

  const long long s = required_s(spec, inst);
  struct Out {
    Hypothesis truth;
    Decision d;
    double wall_ms = 0;
  };
  std::vector<Out> outs(static_cast<std::size_t>(spec.trials));
  parallel_for_index(spec.trials, [&](long long i) {
    const Hypothesis truth = trial_truth(hyp_mode, i);
    RngStream rng = RngStream::derive(spec.seed, static_cast<std::uint64_t>(i));
    Source sp(inst.p), sq(inst.q);
    Source st(truth == Hypothesis::H1 ? inst.p : inst.q);
    const auto t0 = std::chrono::steady_clock::now();
    Decision d = distinguish(sp, sq, st, s, rng, opts);
    const double ms = wall_ms_since(t0);
    outs[static_cast<std::size_t>(i)] = Out{truth, std::move(d), ms};
  });

  ResultTable t;
  t.columns = {"trial",       "hypothesis", "answer",     "correct",
               "stage",       "reps",       "l",          "l_overridden",
               "mode",        "step2_fired", "step3_fired", "both_conditions",
               "c_p",         "c_q",        "m_p",        "m_q",
               "estimator_failures", "budget_p", "budget_q", "budget_t",
               "budget_total", "budget_bound", "budget_applicable", "budget_ok"};
  if (timings) t.columns.push_back("wall_ms");
  for (long long i = 0; i < spec.trials; ++i) {
    const Out& o = outs[static_cast<std::size_t>(i)];
    const bool correct = (o.truth == Hypothesis::H1) == (o.d.answer == Answer::P);
    std::vector<Value> row{
        i,
        hyp_name(o.truth),
        answer_name(o.d.answer),
        correct,
        o.d.stage == Stage::norm_stage ? "norm" : "collision",
        o.d.stats.reps,
        o.d.stats.l,
        o.d.stats.l_overridden,
        opts.mode == SamplingMode::batched ? "batched" : "direct",
        o.d.stats.step2_fired,
        o.d.stats.step3_fired,
        o.d.stats.both_conditions,
        o.d.stats.c_p,
        o.d.stats.c_q,
        o.d.stats.m_p,
        o.d.stats.m_q,
        static_cast<long long>(o.d.stats.estimator_failures),
        static_cast<long long>(o.d.budget.from_p),
        static_cast<long long>(o.d.budget.from_q),
        static_cast<long long>(o.d.budget.from_t),
        static_cast<long long>(o.d.budget.total()),
        o.d.budget_bound,
        o.d.budget_formula_applicable,
        o.d.budget_ok};
    if (timings) row.emplace_back(o.wall_ms);
    t.rows.push_back(std::move(row));
  }
  return t;
}

ResultTable run_closeness_trials(const ExperimentSpec& spec) {
  const Instance inst = parse_instance(spec.instance);
  if (spec.trials < 1) throw PreconditionError("--trials must be positive");
  const DistinguishOptions opts = distinguish_options(spec);
  const long long s = required_s(spec, inst);
  const long long l = opts.l_override ? *opts.l_override : default_l_for(s);
  const Closeness truth = inst.identical ? Closeness::same : Closeness::different;
  const bool timings = emit_timings(spec);

  struct Out {
    ClosenessResult r;
    double wall_ms = 0;
  };
  std::vector<Out> outs(static_cast<std::size_t>(spec.trials));
  parallel_for_index(spec.trials, [&](long long i) {
    RngStream rng = RngStream::derive(spec.seed, static_cast<std::uint64_t>(i));
    Source sx(inst.p), sy(inst.q);
    const auto t0 = std::chrono::steady_clock::now();
    ClosenessResult r = closeness_from_distinguisher(sx, sy, s, rng, opts);
    const double ms = wall_ms_since(t0);
    outs[static_cast<std::size_t>(i)] = Out{std::move(r), ms};
  });

  ResultTable t;
  t.columns = {"trial",        "truth",   "verdict", "correct",
               "runs",         "s",       "l",       "budget_x",
               "budget_y",     "budget_t", "budget_total", "max_call_budget",
               "structure_ok"};
  if (timings) t.columns.push_back("wall_ms");
  for (long long i = 0; i < spec.trials; ++i) {
    const Out& o = outs[static_cast<std::size_t>(i)];
    std::vector<Value> row{
        i,
        truth == Closeness::same ? "same" : "different",
        o.r.verdict == Closeness::same ? "same" : "different",
        o.r.verdict == truth,
        o.r.runs,
        s,
        l,
        static_cast<long long>(o.r.budget.from_p),
        static_cast<long long>(o.r.budget.from_q),
        static_cast<long long>(o.r.budget.from_t),
        static_cast<long long>(o.r.budget.total()),
        static_cast<long long>(o.r.max_call_budget),
        o.r.budget_structure_ok};
    if (timings) row.emplace_back(o.wall_ms);
    t.rows.push_back(std::move(row));
  }
  return t;
}

ResultTable run_distinguish_sweep(const ExperimentSpec& spec) {
  const Instance inst = parse_instance(spec.instance);
  if (spec.trials < 1) throw PreconditionError("--trials must be positive");
  DistinguishOptions opts = distinguish_options(spec);
  const long long s_star = required_s(spec, inst);
  const long long l_cap = get_ll(spec, "l_cap", 200000);
  if (l_cap < 10) throw PreconditionError("l_cap must be at least 10");

  ResultTable t;
  t.columns = {"s", "trials", "accuracy", "norm_stage_frac", "mean_budget", "l",
               "l_capped"};
  for (int k = -4; k <= 2; ++k) {
    const long long s = std::max<long long>(
        10, static_cast<long long>(std::llround(static_cast<double>(s_star) * std::pow(2.0, k))));
    bool l_capped = false;
    DistinguishOptions row_opts = opts;
    if (!row_opts.l_override) {
      const long long l_formula = default_l_for(s);
      if (l_formula > l_cap) {
        row_opts.l_override = l_cap;
        l_capped = true;
      }
    }
    const long long l_used = row_opts.l_override ? *row_opts.l_override : default_l_for(s);

    std::vector<int> correct(static_cast<std::size_t>(spec.trials), 0);
    std::vector<int> norm_stage(static_cast<std::size_t>(spec.trials), 0);
    std::vector<std::uint64_t> budgets(static_cast<std::size_t>(spec.trials), 0);
    const std::uint64_t stream_base =
        static_cast<std::uint64_t>(k + 4) * static_cast<std::uint64_t>(spec.trials);
    parallel_for_index(spec.trials, [&](long long i) {
      const Hypothesis truth = i % 2 == 0 ? Hypothesis::H1 : Hypothesis::H2;
      RngStream rng =
          RngStream::derive(spec.seed, stream_base + static_cast<std::uint64_t>(i));
      Source sp(inst.p), sq(inst.q);
      Source st(truth == Hypothesis::H1 ? inst.p : inst.q);
      const Decision d = distinguish(sp, sq, st, s, rng, row_opts);
      correct[static_cast<std::size_t>(i)] =
          (truth == Hypothesis::H1) == (d.answer == Answer::P) ? 1 : 0;
      norm_stage[static_cast<std::size_t>(i)] = d.stage == Stage::norm_stage ? 1 : 0;
      budgets[static_cast<std::size_t>(i)] = d.budget.total();
    });
    long long n_correct = 0, n_norm = 0;
    double budget_sum = 0;
    for (long long i = 0; i < spec.trials; ++i) {
      n_correct += correct[static_cast<std::size_t>(i)];
      n_norm += norm_stage[static_cast<std::size_t>(i)];
      budget_sum += static_cast<double>(budgets[static_cast<std::size_t>(i)]);
    }
    t.rows.push_back({s, spec.trials,
                      static_cast<double>(n_correct) / static_cast<double>(spec.trials),
                      static_cast<double>(n_norm) / static_cast<double>(spec.trials),
                      budget_sum / static_cast<double>(spec.trials), l_used, l_capped});
  }
  return t;
}

namespace {

// Shared empty cell for columns a row does not use.
const Value kNone{""};

std::vector<Value> concentration_row(
    const std::string& kind, const std::string& instance, long long s,
    const std::string& detail, Value trials, Value threshold, Value exceed_frac,
    Value bound, Value pass, Value enumerated, Value in_regime, Value min_ratio,
    Value max_ratio, Value lo_bound, Value hi_bound, Value vacuous) {
  return {kind,       instance, s,         detail,    std::move(trials),
          std::move(threshold), std::move(exceed_frac), std::move(bound),
          std::move(pass),      std::move(enumerated),  std::move(in_regime),
          std::move(min_ratio), std::move(max_ratio),   std::move(lo_bound),
          std::move(hi_bound),  std::move(vacuous)};
}

struct WeightRowResult {
  double threshold = 0;
  double exceed_frac = 0;
};

// Samples `trials` type-I configurations and measures how often the weighted
// occupancy W = sum a_i c_i strays at least the threshold from its mean.
// Strict inequality: a zero weight vector has threshold 0 and never "exceeds".
WeightRowResult weight_row(const DiscreteDistribution& d, long long s,
                           const Eigen::VectorXd& a, long long trials,
                           std::uint64_t seed) {
  WeightRowResult res;
  const double mean = static_cast<double>(s) * a.dot(d.probs);
  const double a_l2 = a.norm();
  const double ls = std::log(static_cast<double>(s));
  res.threshold = 2.0 * std::pow(ls, 1.5) * a_l2;
  std::vector<int> exceed(static_cast<std::size_t>(trials), 0);
  parallel_for_index(trials, [&](long long i) {
    RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(i));
    const Configuration cfg = sample_type1(d, s, rng);
    const double w = a.dot(cfg.counts.cast<double>());
    exceed[static_cast<std::size_t>(i)] = std::abs(w - mean) > res.threshold ? 1 : 0;
  });
  long long count = 0;
  for (const int e : exceed) count += e;
  res.exceed_frac = static_cast<double>(count) / static_cast<double>(trials);
  return res;
}

}  // namespace

ResultTable run_concentration_suite(const ExperimentSpec& spec) {
  const long long s = spec.s.value_or(100);
  if (s < 2) throw PreconditionError("concentration needs s >= 2");
  if (spec.trials < 1) throw PreconditionError("--trials must be positive");
  const long long bern_trials = get_ll(spec, "bern_trials", spec.trials);
  if (bern_trials < 1) throw PreconditionError("bern_trials must be positive");

  const Instance inst = spec.instance.empty()
                            ? parse_instance("gen:uniform:" + std::to_string(4 * s))
                            : parse_instance(spec.instance);
  const DiscreteDistribution& d = inst.p;
  if (d.probs.maxCoeff() > 1.0 / (2.0 * static_cast<double>(s)) + 1e-15)
    throw PreconditionError(
        "concentration instance must satisfy p_i <= 1/(2s); lower --s or spread the mass");

  ResultTable t;
  t.columns = {"kind",      "instance",  "s",        "detail",   "trials",
               "threshold", "exceed_frac", "bound",  "pass",     "enumerated",
               "in_regime", "min_ratio", "max_ratio", "lo_bound", "hi_bound",
               "vacuous"};

  const double weight_bound = 1.0 / (static_cast<double>(s) * static_cast<double>(s));
  const int n = d.n();

  // Weighted-occupancy rows: A = the instance itself, a ramp, and the zero
  // vector (degenerate: zero threshold, never exceeded strictly).
  Eigen::VectorXd ramp(n);
  for (int i = 0; i < n; ++i)
    ramp[i] = static_cast<double>(i + 1) / (static_cast<double>(n) * static_cast<double>(n));
  const struct {
    const char* label;
    Eigen::VectorXd a;
  } weight_rows[] = {{"A=dist", d.probs}, {"A=ramp", ramp},
                     {"A=zero", Eigen::VectorXd::Zero(n)}};
  std::uint64_t row_seed = 0;
  for (const auto& wr : weight_rows) {
    const WeightRowResult res =
        weight_row(d, s, wr.a, spec.trials, RngStream::derive_seed(spec.seed, row_seed++));
    t.rows.push_back(concentration_row(
        "weight", inst.name, s, wr.label, spec.trials, res.threshold,
        res.exceed_frac, weight_bound, res.exceed_frac <= 1e-3, kNone, kNone, kNone,
        kNone, kNone, kNone, kNone));
  }

  // Bernoulli-sum comparison cells: four homogeneous and one heterogeneous.
  {
    const struct {
      const char* label;
      long long flips;
      double a, b;
    } cells[] = {{"binom:a0:b8", 16, 0.0, 0.5},
                 {"binom:a10:b30", 40, 0.25, 0.75},
                 {"binom:a1:b4", 8, 0.125, 0.5},
                 {"binom:a5:b5", 10, 0.5, 0.5}};
    for (const auto& c : cells) {
      RngStream rng = RngStream::derive(spec.seed, row_seed++);
      const BernoulliComparison bc =
          bernoulli_comparison_mc(c.flips, c.a, c.b, bern_trials, rng);
      t.rows.push_back(concentration_row(
          "bernoulli", "", s, c.label, bern_trials, kNone, bc.freq, bc.bound,
          bc.within, kNone, kNone, kNone, kNone, kNone, kNone, kNone));
    }
    Eigen::VectorXd am(40), bm(40);
    for (int i = 0; i < 40; ++i) {
      am[i] = 0.1 * static_cast<double>(i + 1) / 40.0;
      bm[i] = 0.2 + 0.2 * static_cast<double>(i + 1) / 40.0;
    }
    RngStream rng = RngStream::derive(spec.seed, row_seed++);
    const BernoulliComparison bc = bernoulli_comparison_mc(am, bm, bern_trials, rng);
    t.rows.push_back(concentration_row("bernoulli", "", s, "ramp:a2.05:b12.1",
                                       bern_trials, kNone, bc.freq, bc.bound,
                                       bc.within, kNone, kNone, kNone, kNone, kNone,
                                       kNone, kNone));
  }

  // Bridge rows: exhaustive type-I vs type-II ratio check at desk scale.
  {
    const struct {
      long long s_b;
      int support;
    } bridge_rows[] = {{9, 3}, {9, 4}, {12, 3}, {12, 4}};
    for (const auto& br : bridge_rows) {
      const DiscreteDistribution u =
          DiscreteDistribution::uniform(static_cast<int>(2 * br.s_b));
      const BridgeCheck bc = bridge_check(u, br.s_b, br.support);
      t.rows.push_back(concentration_row(
          "bridge", "uniform:" + std::to_string(2 * br.s_b), br.s_b,
          "support=" + std::to_string(br.support), kNone, kNone, kNone, kNone,
          bc.vacuous || bc.all_within, bc.enumerated, bc.in_regime,
          bc.vacuous ? kNone : Value(bc.min_ratio),
          bc.vacuous ? kNone : Value(bc.max_ratio), bc.lo_bound, bc.hi_bound,
          bc.vacuous));
    }
  }

  // Outlier rows: frequency of a training configuration failing the
  // max-count < ln(s) regime test. Gated on the given instance, reported
  // (no gate) on the exactly-boundary uniform(2s) instance.
  {
    const double threshold = std::log(static_cast<double>(s));
    const struct {
      const char* label;
      const DiscreteDistribution* dist;
      std::string name;
      bool gated;
    } outlier_rows[] = {
        {"gated", &d, inst.name, true},
        {"reported", nullptr, "uniform:" + std::to_string(2 * s), false}};
    const DiscreteDistribution boundary =
        DiscreteDistribution::uniform(static_cast<int>(2 * s));
    for (const auto& orow : outlier_rows) {
      const DiscreteDistribution& dist = orow.dist ? *orow.dist : boundary;
      std::vector<int> outlier(static_cast<std::size_t>(spec.trials), 0);
      const std::uint64_t seed = RngStream::derive_seed(spec.seed, row_seed++);
      parallel_for_index(spec.trials, [&](long long i) {
        RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(i));
        const Configuration cfg = sample_type1(dist, s, rng);
        outlier[static_cast<std::size_t>(i)] =
            static_cast<double>(cfg.max_count()) >= threshold ? 1 : 0;
      });
      long long count = 0;
      for (const int e : outlier) count += e;
      const double frac = static_cast<double>(count) / static_cast<double>(spec.trials);
      t.rows.push_back(concentration_row(
          "outlier", orow.name, s, orow.label, spec.trials, threshold, frac,
          orow.gated ? Value(0.01) : kNone, orow.gated ? Value(frac <= 0.01) : Value(true),
          kNone, kNone, kNone, kNone, kNone, kNone, kNone));
    }
  }
  return t;
}

ResultTable run_lowerbound_suite(const ExperimentSpec& spec) {
  const Instance inst = parse_instance(spec.instance);
  if (spec.trials < 1) throw PreconditionError("--trials must be positive");
  LowerBoundConfig cfg;
  cfg.c_constant = get_double(spec, "c_constant", 10.0);
  cfg.tol = get_double(spec, "tol", 1e-12);
  const long long alg3_games = get_ll(spec, "alg3_games", 0);
  const long long alg3_l = get_ll(spec, "alg3_l", 0);
  const bool warn_row = get_ll(spec, "warn_row", 1) != 0;
  const long long games = spec.trials;

  const SeparationParams nrm = norms(inst.p, inst.q);
  const PreconditionReport pre0 = lower_bound_preconditions(inst.p, inst.q, 1, cfg);
  long long s1;
  if (spec.s) {
    s1 = *spec.s;
  } else if (std::isfinite(pre0.s_cap)) {
    s1 = static_cast<long long>(std::floor(pre0.s_cap));
  } else {
    throw PreconditionError("instance has no finite s cap; pass --s explicitly");
  }
  if (s1 < 1) throw PreconditionError("lower-bound s must be positive");

  struct RowPlan {
    long long s;
    bool enforce;
    bool with_alg3;
  };
  std::vector<RowPlan> plans{{s1, true, alg3_games > 0}};
  if (warn_row && nrm.has_recommended_s) {
    const long long s2 = static_cast<long long>(std::ceil(20.0 * nrm.numsamples));
    plans.push_back({s2, false, false});
  }

  ResultTable t;
  t.columns = {"s",          "games",        "enforced",      "pre_ok",
               "s_cap",      "weakly_disjoint", "ratio_le_8_frac", "infinite_ratios",
               "median_ratio", "helpful_frac", "err_hits_difference",
               "err_signature_likelihood", "err_algorithm3", "alg3_games"};

  std::uint64_t row_index = 0;
  for (const RowPlan& plan : plans) {
    LowerBoundConfig row_cfg = cfg;
    row_cfg.enforce_preconditions = plan.enforce;
    const LowerHBoundReport hb = lower_h_bound_experiment(
        inst.p, inst.q, plan.s, games, RngStream::derive_seed(spec.seed, row_index * 2),
        row_cfg);
    std::map<std::string, TesterSpec> testers;
    testers["hits_difference"] = TesterSpec{tester_hits_difference(), 0};
    testers["signature_likelihood"] = TesterSpec{tester_signature_likelihood(), 0};
    if (plan.with_alg3) {
      DistinguishOptions a3;
      if (alg3_l > 0) a3.l_override = alg3_l;
      a3.mode = SamplingMode::batched;
      testers["algorithm3"] = TesterSpec{tester_algorithm3(a3), alg3_games};
    }
    const IndistinguishabilityReport ind = indistinguishability_experiment(
        inst.p, inst.q, plan.s, testers, games,
        RngStream::derive_seed(spec.seed, row_index * 2 + 1), row_cfg);
    t.rows.push_back(
        {plan.s, games, plan.enforce, hb.pre.ok, hb.pre.s_cap, hb.pre.weakly_disjoint,
         hb.ratio_le_8_frac, hb.infinite_ratios, hb.median_ratio, hb.helpful_frac,
         ind.testers.at("hits_difference").error_rate,
         ind.testers.at("signature_likelihood").error_rate,
         plan.with_alg3 ? Value(ind.testers.at("algorithm3").error_rate) : kNone,
         plan.with_alg3 ? Value(ind.testers.at("algorithm3").games) : kNone});
    ++row_index;
  }
  return t;
}

namespace {

void check_overrides(const ExperimentSpec& spec, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : spec.overrides) {
    if (!allowed.count(key)) {
      std::ostringstream msg;
      msg << "unknown override " << key << " for " << spec.subcommand << "; allowed:";
      for (const auto& k : allowed) msg << ' ' << k;
      throw PreconditionError(msg.str());
    }
  }
}

}  // namespace

ResultTable run_experiment(const ExperimentSpec& spec) {
  if (spec.subcommand == "norms") {
    check_overrides(spec, {});
    return run_norms(spec);
  }
  if (spec.subcommand == "distinguish") {
    check_overrides(spec, {"l", "mode", "attempts", "min_reps", "hypothesis",
                           "emit_timings"});
    return run_distinguish_trials(spec);
  }
  if (spec.subcommand == "closeness") {
    check_overrides(spec, {"l", "mode", "attempts", "min_reps", "emit_timings"});
    return run_closeness_trials(spec);
  }
  if (spec.subcommand == "sweep") {
    check_overrides(spec, {"l", "mode", "attempts", "min_reps", "l_cap",
                           "emit_timings"});
    return run_distinguish_sweep(spec);
  }
  if (spec.subcommand == "concentration") {
    check_overrides(spec, {"bern_trials", "emit_timings"});
    return run_concentration_suite(spec);
  }
  if (spec.subcommand == "lowerbound") {
    check_overrides(spec, {"alg3_games", "alg3_l", "c_constant", "tol", "warn_row",
                           "emit_timings"});
    return run_lowerbound_suite(spec);
  }
  throw PreconditionError("unknown subcommand " + spec.subcommand);
}

}  // namespace disttest
