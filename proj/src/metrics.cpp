#include "selcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "selcal/errors.hpp"

namespace selcal {
namespace {

void require_points(std::span<const EvalPoint> points, const char* who) {
  if (points.empty()) throw InvalidArgument(std::string(who) + ": no points");
}

void check_score(const EvalPoint& p) {
  if (!std::isfinite(p.score) || p.score < 0.0 || p.score > 1.0) {
    throw InvalidArgument("score of '" + p.record_id + "' is outside [0, 1]");
  }
}

}  // namespace

std::vector<EvalPoint> rank_by_confidence(std::span<const EvalPoint> points) {
  std::vector<EvalPoint> ranked(points.begin(), points.end());
  for (const auto& p : ranked) check_score(p);
  std::sort(ranked.begin(), ranked.end(), [](const EvalPoint& a, const EvalPoint& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.record_id < b.record_id;
  });
  return ranked;
}

double ece(std::span<const EvalPoint> points, int n_bins) {
  if (n_bins < 1) throw InvalidArgument("ece: n_bins must be >= 1");
  require_points(points, "ece");
  const std::vector<EvalPoint> ranked = rank_by_confidence(points);
  const std::size_t n = ranked.size();
  const auto bins = static_cast<std::size_t>(n_bins);
  const std::size_t base = n / bins;
  const std::size_t extra = n % bins;

  double gap_sum = 0.0;
  std::size_t non_empty = 0;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    if (size == 0) continue;
    double score_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = pos; i < pos + size; ++i) {
      score_sum += ranked[i].score;
      correct += ranked[i].correct ? 1 : 0;
    }
    pos += size;
    const double mean_score = score_sum / static_cast<double>(size);
    const double accuracy = static_cast<double>(correct) / static_cast<double>(size);
    gap_sum += std::abs(mean_score - accuracy);
    ++non_empty;
  }
  return gap_sum / static_cast<double>(non_empty);
}

std::optional<double> roc_auc(std::span<const EvalPoint> points) {
  std::vector<EvalPoint> sorted(points.begin(), points.end());
  for (const auto& p : sorted) check_score(p);
  std::sort(sorted.begin(), sorted.end(),
            [](const EvalPoint& a, const EvalPoint& b) { return a.score < b.score; });

  // Twice the Mann-Whitney U, kept integral so the final division is the only
  // rounding step.
  std::uint64_t twice_u = 0;
  std::uint64_t incorrect_below = 0;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    std::uint64_t pos_tied = 0;
    std::uint64_t neg_tied = 0;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      (sorted[j].correct ? pos_tied : neg_tied) += 1;
      ++j;
    }
    twice_u += 2 * pos_tied * incorrect_below + pos_tied * neg_tied;
    incorrect_below += neg_tied;
    positives += pos_tied;
    negatives += neg_tied;
    i = j;
  }
  if (positives == 0 || negatives == 0) return std::nullopt;
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double coverage_at_accuracy(std::span<const EvalPoint> points, double acc_target) {
  require_points(points, "coverage_at_accuracy");
  if (!(acc_target > 0.0 && acc_target <= 100.0)) {
    throw InvalidArgument("coverage_at_accuracy: target must lie in (0, 100]");
  }
  const std::vector<EvalPoint> ranked = rank_by_confidence(points);
  const double threshold = acc_target / 100.0;
  std::size_t correct = 0;
  std::size_t best = 0;
  for (std::size_t m = 1; m <= ranked.size(); ++m) {
    correct += ranked[m - 1].correct ? 1 : 0;
    if (static_cast<double>(correct) / static_cast<double>(m) >= threshold) best = m;
  }
  return 100.0 * static_cast<double>(best) / static_cast<double>(ranked.size());
}

std::vector<RiskCoveragePoint> risk_coverage_curve(std::span<const EvalPoint> points) {
  require_points(points, "risk_coverage_curve");
  const std::vector<EvalPoint> ranked = rank_by_confidence(points);
  const auto n = static_cast<double>(ranked.size());
  std::vector<RiskCoveragePoint> curve;
  curve.reserve(ranked.size());
  std::size_t correct = 0;
  for (std::size_t m = 1; m <= ranked.size(); ++m) {
    correct += ranked[m - 1].correct ? 1 : 0;
    curve.push_back({100.0 * static_cast<double>(m) / n,
                     100.0 * static_cast<double>(correct) / static_cast<double>(m)});
  }
  return curve;
}

std::vector<SweepRow> threshold_sweep(std::span<const EvalPoint> points) {
  require_points(points, "threshold_sweep");
  const std::vector<EvalPoint> ranked = rank_by_confidence(points);
  const auto n = static_cast<double>(ranked.size());
  std::vector<SweepRow> rows;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ranked.size();) {
    const double d = ranked[i].score;
    while (i < ranked.size() && ranked[i].score == d) {
      correct += ranked[i].correct ? 1 : 0;
      ++i;
    }
    double tau = d - 1.0;
    if (i < ranked.size()) {
      const double lower = ranked[i].score;
      tau = lower + (d - lower) / 2.0;
      // Adjacent doubles: the midpoint may round onto d itself.
      if (!(tau < d)) tau = lower;
    }
    rows.push_back({tau, 100.0 * static_cast<double>(i) / n,
                    100.0 * static_cast<double>(correct) / static_cast<double>(i)});
  }
  return rows;
}

AccuracyAtTrigger accuracy_at_trigger(std::span<const ScoredPrediction> scored,
                                      const std::string& classifier) {
  if (scored.empty()) throw InvalidArgument("accuracy_at_trigger: no records");
  std::size_t triggered = 0;
  std::size_t correct = 0;
  for (const auto& s : scored) {
    if (!s.triggered) continue;
    ++triggered;
    const auto it = s.correct.find(classifier);
    if (it == s.correct.end()) {
      throw InvalidArgument("record '" + s.question_id + "' has no '" + classifier +
                            "' verdict");
    }
    correct += it->second ? 1 : 0;
  }
  AccuracyAtTrigger out;
  out.trigger_rate = 100.0 * static_cast<double>(triggered) / static_cast<double>(scored.size());
  if (triggered > 0) {
    out.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(triggered);
  }
  return out;
}

std::vector<EvalPoint> eval_points(std::span<const ScoredPrediction> scored,
                                   const std::string& method, const std::string& classifier) {
  std::vector<EvalPoint> points;
  for (const auto& s : scored) {
    if (!s.triggered) continue;
    const auto score = s.scores.find(method);
    if (score == s.scores.end()) {
      throw InvalidArgument("record '" + s.question_id + "' has no '" + method + "' score");
    }
    const auto verdict = s.correct.find(classifier);
    if (verdict == s.correct.end()) {
      throw InvalidArgument("record '" + s.question_id + "' has no '" + classifier +
                            "' verdict");
    }
    points.push_back({score->second, verdict->second, s.question_id});
  }
  return points;
}

CalibrationReport build_report(std::span<const ScoredPrediction> scored,
                               const ReportOptions& options) {
  CalibrationReport report;
  report.accuracy_at_trigger = accuracy_at_trigger(scored, options.classifier);
  report.n_total = scored.size();
  report.n_triggered = static_cast<std::size_t>(
      std::count_if(scored.begin(), scored.end(), [](const auto& s) { return s.triggered; }));
  report.classifier = options.classifier;
  report.threshold = options.threshold;
  report.n_bins = options.n_bins;

  for (const auto& method : options.methods) {
    MethodMetrics m;
    const std::vector<EvalPoint> points = eval_points(scored, method, options.classifier);
    if (!points.empty()) {
      m.auc = roc_auc(points);
      m.ece = ece(points, options.n_bins);
    }
    for (double target : options.acc_targets) {
      m.coverage_at[target] =
          points.empty() ? std::nullopt
                         : std::optional<double>(coverage_at_accuracy(points, target));
    }
    report.methods.emplace_back(method, std::move(m));
  }
  return report;
}

}  // namespace selcal
