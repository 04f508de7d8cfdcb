#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace selcal {

// Natural-log token probabilities, each <= 0.
using TokenLogProbs = std::vector<double>;

struct SampledAnswer {
  std::string text;
  TokenLogProbs logprobs;

  bool operator==(const SampledAnswer&) const = default;
};

struct PredictionRecord {
  std::string question_id;
  SampledAnswer greedy;
  std::vector<SampledAnswer> samples;
  // Opaque metadata (model name, temperature, K). Never interpreted.
  std::map<std::string, std::string> meta;

  bool operator==(const PredictionRecord&) const = default;
};

struct Annotation {
  std::string answer;
  bool answerable = true;
  std::optional<std::string> answer_confidence;

  bool operator==(const Annotation&) const = default;
};

struct GoldRecord {
  std::string question_id;
  std::vector<Annotation> annotations;

  // OR over the per-annotation flags.
  bool answerable() const;

  bool operator==(const GoldRecord&) const = default;
};

struct ScoredPrediction {
  std::string question_id;
  bool triggered = false;
  std::map<std::string, double> scores;
  // Empty for abstained records.
  std::map<std::string, bool> correct;
  // Unknown when the record was scored without gold annotations.
  std::optional<bool> answerable;
};

struct MethodMetrics {
  std::optional<double> auc;
  std::optional<double> ece;
  // acc target (percent) -> coverage (percent)
  std::map<double, std::optional<double>> coverage_at;

  bool operator==(const MethodMetrics&) const = default;
};

struct AccuracyAtTrigger {
  std::optional<double> accuracy;  // percent, undefined when nothing triggered
  double trigger_rate = 0.0;       // percent

  bool operator==(const AccuracyAtTrigger&) const = default;
};

struct CalibrationReport {
  // Rows keep the requested method order.
  std::vector<std::pair<std::string, MethodMetrics>> methods;
  AccuracyAtTrigger accuracy_at_trigger;
  std::size_t n_total = 0;
  std::size_t n_triggered = 0;
  std::string classifier;
  std::optional<double> threshold;
  int n_bins = 10;

  const MethodMetrics* find(const std::string& method) const;

  bool operator==(const CalibrationReport&) const = default;
};

struct ValidationResult {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

ValidationResult validate_record(const PredictionRecord& record);
ValidationResult validate_gold(const GoldRecord& gold);

}  // namespace selcal
