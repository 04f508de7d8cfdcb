#include "selcal/cli.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "selcal/adapter.hpp"
#include "selcal/errors.hpp"
#include "selcal/io.hpp"
#include "selcal/metrics.hpp"
#include "selcal/scoring.hpp"

namespace selcal::cli {
namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

unsigned effective_jobs(unsigned jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string adapter_method_name(const CliConfig& c) { return "avg-" + c.adapter_name; }

bool is_builtin_method(const std::string& name) {
  return std::find(std::begin(kBuiltinMethods), std::end(kBuiltinMethods), name) !=
         std::end(kBuiltinMethods);
}

bool classifier_uses_adapter(const CliConfig& c) {
  return c.classifier.rfind("adapter-threshold", 0) == 0;
}

bool needs_adapter(const CliConfig& c) {
  if (classifier_uses_adapter(c)) return true;
  return std::find(c.methods.begin(), c.methods.end(), adapter_method_name(c)) != c.methods.end();
}

// Everything that can be checked without touching the filesystem.
void validate_config(const CliConfig& c) {
  if (c.methods.empty()) throw UsageError("--methods: at least one method is required");
  std::set<std::string> seen;
  for (const auto& m : c.methods) {
    if (!seen.insert(m).second) throw UsageError("--methods: '" + m + "' listed twice");
    if (is_builtin_method(m)) continue;
    if (c.adapter_cmd && m == adapter_method_name(c)) continue;
    std::string known = "likelihood, repetition, diversity, avg-bleu";
    if (c.adapter_cmd) known += ", " + adapter_method_name(c);
    throw UsageError("--methods: unknown method '" + m + "' (known: " + known + ")");
  }
  if (c.classifier != "em" && c.classifier != "bleu-threshold" &&
      c.classifier != "adapter-threshold" &&
      c.classifier != "adapter-threshold:" + c.adapter_name) {
    throw UsageError("--classifier: unknown classifier '" + c.classifier +
                     "' (expected em|bleu-threshold|adapter-threshold)");
  }
  if (classifier_uses_adapter(c) && !c.adapter_cmd) {
    throw UsageError("--classifier " + c.classifier + " requires --adapter-cmd");
  }
  if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) {
    throw UsageError("--threshold must lie in [0, 1]");
  }
  if (c.bins < 1) throw UsageError("--bins must be >= 1");
  if (c.max_order < 1) throw UsageError("--max-order must be >= 1");
  if (c.acc_targets.empty()) throw UsageError("--acc-targets: at least one target is required");
  for (double t : c.acc_targets) {
    if (!(t > 0.0 && t <= 100.0)) throw UsageError("--acc-targets must lie in (0, 100]");
  }
  try {
    parse_token_mode(c.sim_mode);
    parse_curve_format(c.curve_format);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

struct Pipeline {
  std::vector<ScoringMethod> methods;
  std::vector<CorrectnessClassifier> classifiers;
  std::optional<double> threshold;
};

Pipeline build_pipeline(const CliConfig& c) {
  Pipeline p;
  auto bleu = std::make_shared<const BleuSimilarity>(
      BleuConfig{c.max_order, parse_token_mode(c.sim_mode)});
  std::shared_ptr<const SimilarityFn> adapter;
  if (c.adapter_cmd && needs_adapter(c)) {
    auto pool = std::make_shared<AdapterPool>(*c.adapter_cmd, effective_jobs(c.jobs));
    adapter = std::make_shared<const AdapterSimilarity>(c.adapter_name, std::move(pool));
  }
  for (const auto& m : c.methods) {
    if (m == "likelihood") {
      p.methods.push_back(ScoringMethod::likelihood());
    } else if (m == "repetition") {
      p.methods.push_back(ScoringMethod::repetition());
    } else if (m == "diversity") {
      p.methods.push_back(ScoringMethod::diversity());
    } else if (m == "avg-bleu") {
      p.methods.push_back(ScoringMethod::avg_similarity(bleu));
    } else {
      p.methods.push_back(ScoringMethod::avg_similarity(adapter));
    }
  }
  if (c.classifier == "em") {
    p.classifiers.push_back(CorrectnessClassifier::exact_match());
  } else if (c.classifier == "bleu-threshold") {
    p.classifiers.push_back(CorrectnessClassifier::bleu_threshold(bleu, c.threshold));
    p.threshold = c.threshold;
  } else {
    p.classifiers.push_back(CorrectnessClassifier::adapter_threshold(adapter, c.threshold));
    p.threshold = c.threshold;
  }
  return p;
}

// Parallel per-record scoring; results and the reported error (the one for
// the lowest record index) are independent of the thread count.
std::vector<ScoredPrediction> score_records(const std::vector<JoinedRecord>& records,
                                            const Pipeline& p, unsigned jobs) {
  std::vector<ScoredPrediction> results(records.size());
  std::vector<std::exception_ptr> errors(records.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        results[i] = score_all(*records[i].prediction, records[i].gold, p.methods, p.classifiers);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(1, records.size())));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

bool to_stdout(const CliConfig& c) { return !c.out || c.out->string() == "-"; }

// Commits staged files, then prints the stdout artifact if there is one.
void deliver(const CliConfig& c, StagedOutput& staged, const std::string& primary,
             std::ostream& out) {
  if (to_stdout(c)) {
    staged.commit();
    out << primary;
  } else {
    staged.add(*c.out, primary);
    staged.commit();
  }
}

struct Loaded {
  std::vector<PredictionRecord> predictions;
  std::vector<GoldRecord> gold;
  JoinResult joined;
};

Loaded load_inputs(const CliConfig& c, std::ostream& err) {
  Loaded in;
  in.predictions = load_predictions(c.predictions);
  if (c.gold) {
    in.gold = load_gold(*c.gold);
    in.joined = join(in.predictions, in.gold);
    if (!in.joined.summary.empty()) err << "selcal: join: " << in.joined.summary.describe() << "\n";
  } else {
    require_unique_ids(in.predictions);
    for (const auto& p : in.predictions) in.joined.records.push_back({&p, nullptr});
  }
  return in;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    err << "selcal: usage-error: " << e.what() << "\n";
    return kUsageError;
  } catch (const AdapterError& e) {
    err << "selcal: adapter-error: " << e.what() << "\n";
    return kAdapterError;
  } catch (const IoError& e) {
    err << "selcal: io-error: " << e.what() << "\n";
  } catch (const ParseError& e) {
    err << "selcal: parse-error: " << e.what() << "\n";
  } catch (const ValidationError& e) {
    err << "selcal: validation-error: " << e.what() << "\n";
  } catch (const DuplicateKeyError& e) {
    err << "selcal: duplicate-key-error: " << e.what() << "\n";
  } catch (const JoinError& e) {
    err << "selcal: join-error: " << e.what() << "\n";
  } catch (const InvalidArgument& e) {
    err << "selcal: invalid-argument: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "selcal: error: " << e.what() << "\n";
  }
  return kDataError;
}

struct ScoredRun {
  std::vector<ScoredPrediction> scored;
  std::string classifier;
  std::optional<double> threshold;
};

ScoredRun load_and_score(const CliConfig& c, std::ostream& err) {
  const Loaded in = load_inputs(c, err);
  const Pipeline p = build_pipeline(c);
  ScoredRun run;
  run.scored = score_records(in.joined.records, p, effective_jobs(c.jobs));
  run.classifier = p.classifiers.front().name();
  run.threshold = p.threshold;
  return run;
}

template <typename Format, typename Parse>
Format parse_format_or_usage(const std::optional<std::string>& name, const char* fallback,
                             Parse parse) {
  try {
    return parse(name.value_or(fallback));
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

int cmd_evaluate(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate_config(config);
    const auto format =
        parse_format_or_usage<ReportFormat>(config.format, "markdown", parse_report_format);
    if (!config.gold) throw UsageError("evaluate requires --gold");

    const ScoredRun run = load_and_score(config, err);
    if (run.scored.empty()) {
      throw InvalidArgument("no records left after joining predictions and gold");
    }

    ReportOptions options;
    options.methods = config.methods;
    options.acc_targets = config.acc_targets;
    options.n_bins = config.bins;
    options.classifier = run.classifier;
    options.threshold = run.threshold;
    const CalibrationReport report = build_report(run.scored, options);

    StagedOutput staged;
    if (config.curves_dir) {
      const CurveFormat cf = parse_curve_format(config.curve_format);
      std::filesystem::create_directories(*config.curves_dir);
      for (const auto& method : config.methods) {
        const auto points = eval_points(run.scored, method, run.classifier);
        const auto curve =
            points.empty() ? std::vector<RiskCoveragePoint>{} : risk_coverage_curve(points);
        const std::string file = "curve_" + method + (cf == CurveFormat::Csv ? ".csv" : ".json");
        staged.add(*config.curves_dir / file, emit_curve(curve, cf));
      }
    }
    deliver(config, staged, emit_report(report, format), out);
    return static_cast<int>(kSuccess);
  });
}

int cmd_score(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate_config(config);
    const ScoredRun run = load_and_score(config, err);
    std::string lines;
    for (const auto& s : run.scored) {
      lines += serialize_scored(s);
      lines += '\n';
    }
    StagedOutput staged;
    deliver(config, staged, lines, out);
    return static_cast<int>(kSuccess);
  });
}

int cmd_sweep(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate_config(config);
    const auto format = parse_format_or_usage<CurveFormat>(config.format, "csv", parse_curve_format);
    if (!config.gold) throw UsageError("sweep requires --gold");

    const ScoredRun run = load_and_score(config, err);
    std::vector<std::pair<std::string, std::vector<SweepRow>>> sweeps;
    for (const auto& method : config.methods) {
      const auto points = eval_points(run.scored, method, run.classifier);
      sweeps.emplace_back(method,
                          points.empty() ? std::vector<SweepRow>{} : threshold_sweep(points));
    }
    StagedOutput staged;
    deliver(config, staged, emit_sweep(sweeps, format), out);
    return static_cast<int>(kSuccess);
  });
}

int cmd_synth(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!config.out || config.out->string() == "-") {
      throw UsageError("synth requires --out <directory>");
    }
    try {
      validate(config.synth);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    const SynthDump dump = generate(config.synth);

    std::error_code ec;
    std::filesystem::create_directories(*config.out, ec);
    if (ec) throw IoError("cannot create '" + config.out->string() + "': " + ec.message());
    const auto predictions_path = *config.out / "predictions.jsonl";
    const auto gold_path = *config.out / "gold.json";

    StagedOutput staged;
    staged.add(predictions_path, serialize_predictions(dump.predictions));
    staged.add(gold_path, serialize_gold(dump.gold));
    staged.commit();

    nlohmann::ordered_json echo;
    echo["n"] = config.synth.n;
    echo["seed"] = config.synth.seed;
    echo["miscalibration"] = config.synth.miscalibration_shift;
    echo["cluster_rate"] = config.synth.paraphrase_cluster_rate;
    echo["abstain_rate"] = config.synth.abstain_rate;
    echo["samples"] = config.synth.samples_per_q;
    echo["predictions"] = predictions_path.string();
    echo["gold"] = gold_path.string();
    out << echo.dump() << "\n";
    return static_cast<int>(kSuccess);
  });
}

namespace {

void add_scoring_options(CLI::App* sub, CliConfig& c, bool gold_required) {
  sub->add_option("--predictions", c.predictions, "prediction dump (JSONL)")->required();
  auto* gold = sub->add_option("--gold", c.gold, "gold annotations (JSON array)");
  if (gold_required) gold->required();
  sub->add_option("--methods", c.methods, "comma-separated scoring methods")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--classifier", c.classifier, "em | bleu-threshold | adapter-threshold")
      ->capture_default_str();
  sub->add_option("--threshold", c.threshold, "similarity threshold for correctness")
      ->capture_default_str();
  sub->add_option("--sim-mode", c.sim_mode, "BLEU tokenization: word | char")
      ->capture_default_str();
  sub->add_option("--max-order", c.max_order, "BLEU maximum n-gram order")->capture_default_str();
  sub->add_option("--adapter-cmd", c.adapter_cmd, "external similarity scorer command");
  sub->add_option("--adapter-name", c.adapter_name, "name of the external scorer")
      ->capture_default_str();
  sub->add_option("--out", c.out, "output file (default: stdout)");
  sub->add_option("--jobs", c.jobs, "scoring threads (default: all cores)");
}

void add_report_options(CLI::App* sub, CliConfig& c) {
  sub->add_option("--acc-targets", c.acc_targets, "comma-separated accuracy targets (percent)")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--bins", c.bins, "ECE bins")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig config;
  CLI::App app{"Selective-QA confidence scoring and calibration evaluation", "selcal"};
  app.require_subcommand(1);

  auto* evaluate = app.add_subcommand("evaluate", "score, classify and report calibration");
  add_scoring_options(evaluate, config, true);
  add_report_options(evaluate, config);
  evaluate->add_option("--format", config.format, "json | csv | markdown (default markdown)");
  evaluate->add_option("--curves", config.curves_dir, "directory for risk-coverage curves");
  evaluate->add_option("--curve-format", config.curve_format, "csv | json")->capture_default_str();

  auto* score = app.add_subcommand("score", "emit per-record scores as JSONL");
  add_scoring_options(score, config, false);

  auto* sweep = app.add_subcommand("sweep", "threshold sweep per method");
  add_scoring_options(sweep, config, true);
  add_report_options(sweep, config);
  sweep->add_option("--format", config.format, "csv | json (default csv)");

  auto* synth = app.add_subcommand("synth", "write a synthetic prediction dump");
  synth->add_option("--n", config.synth.n, "questions")->capture_default_str();
  synth->add_option("--seed", config.synth.seed, "PRNG seed")->capture_default_str();
  synth->add_option("--miscalibration", config.synth.miscalibration_shift,
                    "shift added to the correctness probability")
      ->capture_default_str();
  synth->add_option("--cluster-rate", config.synth.paraphrase_cluster_rate,
                    "fraction of questions with paraphrased samples")
      ->capture_default_str();
  synth->add_option("--abstain-rate", config.synth.abstain_rate,
                    "fraction of abstaining greedy answers")
      ->capture_default_str();
  synth->add_option("--samples", config.synth.samples_per_q, "samples per question")
      ->capture_default_str();
  synth->add_option("--out", config.out, "output directory")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? static_cast<int>(kSuccess) : static_cast<int>(kUsageError);
  }

  if (evaluate->parsed()) return cmd_evaluate(config, out, err);
  if (score->parsed()) return cmd_score(config, out, err);
  if (sweep->parsed()) return cmd_sweep(config, out, err);
  return cmd_synth(config, out, err);
}

}  // namespace selcal::cli
