#include "selcal/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <unordered_map>

#include "selcal/errors.hpp"

namespace selcal {
namespace {

// Slack for the [0, 1] postcondition on avg-similarity; rounding in the
// weighted sum can overshoot 1 by a few ulps.
constexpr double kUnitSlack = 1e-9;

void require_samples(std::span<const SampledAnswer> samples, const char* who) {
  if (samples.empty()) throw InvalidArgument(std::string(who) + ": empty sample list");
}

std::unordered_map<std::string, std::size_t> normalized_counts(
    std::span<const SampledAnswer> samples) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& s : samples) ++counts[normalize_answer(s.text).text()];
  return counts;
}

}  // namespace

double likelihood_score(const SampledAnswer& answer) {
  if (answer.logprobs.empty()) throw InvalidArgument("likelihood: empty logprobs");
  double total = 0.0;
  for (double lp : answer.logprobs) total += lp;
  return std::exp(total);
}

double repetition_score(std::span<const SampledAnswer> samples) {
  require_samples(samples, "repetition");
  std::size_t mode = 0;
  for (const auto& [text, count] : normalized_counts(samples)) mode = std::max(mode, count);
  return static_cast<double>(mode) / static_cast<double>(samples.size());
}

double diversity_score(std::span<const SampledAnswer> samples) {
  require_samples(samples, "diversity");
  const std::size_t unique = normalized_counts(samples).size();
  return 1.0 - static_cast<double>(unique) / static_cast<double>(samples.size());
}

double avg_similarity_score(std::span<const SampledAnswer> samples, const SimilarityFn& fn) {
  require_samples(samples, "avg-similarity");

  std::vector<NormalizedAnswer> distinct;
  std::vector<double> weight;
  std::map<NormalizedAnswer, std::size_t> seen;
  for (const auto& s : samples) {
    NormalizedAnswer n = normalize_answer(s.text);
    if (seen.contains(n)) continue;
    seen.emplace(n, distinct.size());
    weight.push_back(likelihood_score(s));
    distinct.push_back(std::move(n));
  }

  const SimilarityMatrix sim = pairwise_matrix(distinct, fn);
  const std::size_t k = distinct.size();
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) total += weight[i] * sim[i][j];
  }
  const double score = total / static_cast<double>(k);
  if (!(score >= 0.0 && score <= 1.0 + kUnitSlack)) {
    throw InvalidArgument("avg-" + fn.name() + " score " + std::to_string(score) +
                          " exceeds 1: distinct sample probabilities sum past 1");
  }
  return std::min(score, 1.0);
}

double avg_bleu_score(std::span<const SampledAnswer> samples, BleuConfig config) {
  return avg_similarity_score(samples, BleuSimilarity(config));
}

bool trigger_decision(const SampledAnswer& greedy) {
  std::string lowered(greedy.text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lowered.find(kAbstentionMarker) == std::string::npos;
}

ScoringMethod::ScoringMethod(std::string name, MethodKind kind,
                             std::shared_ptr<const SimilarityFn> fn)
    : name_(std::move(name)), kind_(kind), similarity_(std::move(fn)) {}

ScoringMethod ScoringMethod::likelihood() {
  return ScoringMethod("likelihood", MethodKind::Likelihood, nullptr);
}
ScoringMethod ScoringMethod::repetition() {
  return ScoringMethod("repetition", MethodKind::Repetition, nullptr);
}
ScoringMethod ScoringMethod::diversity() {
  return ScoringMethod("diversity", MethodKind::Diversity, nullptr);
}
ScoringMethod ScoringMethod::avg_similarity(std::shared_ptr<const SimilarityFn> fn) {
  if (!fn) throw InvalidArgument("avg-similarity method needs a similarity function");
  std::string name = "avg-" + fn->name();
  return ScoringMethod(std::move(name), MethodKind::AvgSimilarity, std::move(fn));
}

double ScoringMethod::operator()(const PredictionRecord& record) const {
  switch (kind_) {
    case MethodKind::Likelihood:
      return likelihood_score(record.greedy);
    case MethodKind::Repetition:
      return repetition_score(record.samples);
    case MethodKind::Diversity:
      return diversity_score(record.samples);
    case MethodKind::AvgSimilarity:
      return avg_similarity_score(record.samples, *similarity_);
  }
  return 0.0;
}

ScoredPrediction score_all(const PredictionRecord& record, const GoldRecord* gold,
                           std::span<const ScoringMethod> methods,
                           std::span<const CorrectnessClassifier> classifiers) {
  if (gold != nullptr && gold->question_id != record.question_id) {
    throw JoinError("score_all: prediction '" + record.question_id + "' joined with gold '" +
                    gold->question_id + "'");
  }
  ScoredPrediction out;
  out.question_id = record.question_id;
  out.triggered = trigger_decision(record.greedy);
  for (const auto& m : methods) {
    try {
      out.scores[m.name()] = m(record);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("record '" + record.question_id + "': " + e.what());
    }
  }
  if (gold != nullptr) {
    out.answerable = answerable_label(*gold);
    if (out.triggered) {
      for (const auto& c : classifiers) out.correct[c.name()] = c(record.greedy.text, *gold);
    }
  }
  return out;
}

}  // namespace selcal
