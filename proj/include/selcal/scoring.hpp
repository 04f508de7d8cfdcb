#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selcal/core.hpp"
#include "selcal/correctness.hpp"
#include "selcal/similarity.hpp"

namespace selcal {

double likelihood_score(const SampledAnswer& answer);
double repetition_score(std::span<const SampledAnswer> samples);
double diversity_score(std::span<const SampledAnswer> samples);

// (1/k) * sum over ordered pairs (i, j) of the k distinct normalized samples,
// diagonal included, of p(a_i|q) * sim(a_i, a_j). p(a_i|q) is the sequence
// probability of the first occurrence of a_i. The result is checked to lie in
// [0, 1]; dumps whose distinct-answer probabilities sum past 1 are rejected.
double avg_similarity_score(std::span<const SampledAnswer> samples, const SimilarityFn& fn);

// avg_similarity_score with the built-in BLEU.
double avg_bleu_score(std::span<const SampledAnswer> samples, BleuConfig config = {});

// True (answer) iff the raw greedy text does not contain "unanswerable",
// ignoring ASCII case.
bool trigger_decision(const SampledAnswer& greedy);

enum class MethodKind { Likelihood, Repetition, Diversity, AvgSimilarity };

// A confidence-scoring method. Built-in names: likelihood, repetition,
// diversity, avg-bleu. Adapter-backed variants are named avg-<adapter>.
class ScoringMethod {
 public:
  static ScoringMethod likelihood();
  static ScoringMethod repetition();
  static ScoringMethod diversity();
  static ScoringMethod avg_similarity(std::shared_ptr<const SimilarityFn> fn);

  const std::string& name() const { return name_; }
  MethodKind kind() const { return kind_; }

  double operator()(const PredictionRecord& record) const;

 private:
  ScoringMethod(std::string name, MethodKind kind, std::shared_ptr<const SimilarityFn> fn);

  std::string name_;
  MethodKind kind_;
  std::shared_ptr<const SimilarityFn> similarity_;
};

inline constexpr std::string_view kBuiltinMethods[] = {"likelihood", "repetition", "diversity",
                                                       "avg-bleu"};

// Scores every requested method. With gold, also records the answerable label
// and, for triggered records only, one verdict per classifier applied to the
// greedy text. Throws JoinError when the ids differ.
ScoredPrediction score_all(const PredictionRecord& record, const GoldRecord* gold,
                           std::span<const ScoringMethod> methods,
                           std::span<const CorrectnessClassifier> classifiers);

}  // namespace selcal
