#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "selcal/core.hpp"
#include "selcal/similarity.hpp"

namespace selcal {

// Default threshold for similarity-based correctness.
inline constexpr double kDefaultSimilarityThreshold = 0.5;

// True iff the normalized prediction equals at least one normalized gold answer.
bool exact_match_correct(std::string_view prediction, const GoldRecord& gold);

// True iff max over gold answers of answer_similarity(prediction, gold) >= threshold.
bool similarity_correct(std::string_view prediction, const GoldRecord& gold,
                        const SimilarityFn& fn, double threshold);

// OR over annotators. Throws InvalidArgument for a record without annotations.
bool answerable_label(const GoldRecord& gold);

enum class ClassifierKind { ExactMatch, SimilarityThreshold };

// em | bleu-threshold | adapter-threshold:<name>
class CorrectnessClassifier {
 public:
  static CorrectnessClassifier exact_match();
  static CorrectnessClassifier bleu_threshold(std::shared_ptr<const SimilarityFn> bleu,
                                              double threshold);
  static CorrectnessClassifier adapter_threshold(std::shared_ptr<const SimilarityFn> adapter,
                                                 double threshold);

  const std::string& name() const { return name_; }
  ClassifierKind kind() const { return kind_; }
  double threshold() const { return threshold_; }

  bool operator()(std::string_view prediction, const GoldRecord& gold) const;

 private:
  CorrectnessClassifier(std::string name, ClassifierKind kind, double threshold,
                        std::shared_ptr<const SimilarityFn> similarity);

  std::string name_;
  ClassifierKind kind_;
  double threshold_;
  std::shared_ptr<const SimilarityFn> similarity_;
};

}  // namespace selcal
