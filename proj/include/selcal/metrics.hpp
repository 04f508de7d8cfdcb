#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "selcal/core.hpp"

namespace selcal {

struct EvalPoint {
  double score = 0.0;
  bool correct = false;
  std::string record_id;  // tie-break key
};

struct RiskCoveragePoint {
  double coverage = 0.0;  // percent
  double accuracy = 0.0;  // percent

  bool operator==(const RiskCoveragePoint&) const = default;
};

// Every metric below orders points by descending score, breaking ties by
// ascending record_id, so results do not depend on input order.
std::vector<EvalPoint> rank_by_confidence(std::span<const EvalPoint> points);

// Equal-count bins over the ranked points; the first N mod n_bins bins get one
// extra point. Unweighted mean of |mean score - accuracy| over non-empty bins.
double ece(std::span<const EvalPoint> points, int n_bins = 10);

// Mann-Whitney estimate with ties counted as 1/2. Undefined when every point
// has the same label.
std::optional<double> roc_auc(std::span<const EvalPoint> points);

// 100 * (largest m whose top-m prefix has accuracy >= acc_target / 100) / N,
// or 0 when no prefix qualifies.
double coverage_at_accuracy(std::span<const EvalPoint> points, double acc_target);

std::vector<RiskCoveragePoint> risk_coverage_curve(std::span<const EvalPoint> points);

// Operating point for "answer when score > tau".
struct SweepRow {
  double tau = 0.0;
  double coverage = 0.0;  // percent
  double accuracy = 0.0;  // percent

  bool operator==(const SweepRow&) const = default;
};

// One row per distinct score d, retaining exactly the points scoring >= d.
// tau is the midpoint between d and the next lower distinct score, or d - 1
// below the minimum. Rows come in increasing coverage.
std::vector<SweepRow> threshold_sweep(std::span<const EvalPoint> points);

// Throws InvalidArgument when a triggered record has no verdict for
// `classifier`.
AccuracyAtTrigger accuracy_at_trigger(std::span<const ScoredPrediction> scored,
                                      const std::string& classifier);

// EvalPoints for `method` over the triggered records.
std::vector<EvalPoint> eval_points(std::span<const ScoredPrediction> scored,
                                   const std::string& method, const std::string& classifier);

struct ReportOptions {
  std::vector<std::string> methods;
  std::vector<double> acc_targets = {60.0, 70.0, 80.0};
  int n_bins = 10;
  std::string classifier = "em";
  std::optional<double> threshold;
};

CalibrationReport build_report(std::span<const ScoredPrediction> scored,
                               const ReportOptions& options);

}  // namespace selcal
