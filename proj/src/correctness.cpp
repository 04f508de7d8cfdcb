#include "selcal/correctness.hpp"

#include <algorithm>

#include "selcal/errors.hpp"

namespace selcal {

bool exact_match_correct(std::string_view prediction, const GoldRecord& gold) {
  const NormalizedAnswer pred = normalize_answer(prediction);
  return std::any_of(gold.annotations.begin(), gold.annotations.end(),
                     [&](const Annotation& a) { return normalize_answer(a.answer) == pred; });
}

bool similarity_correct(std::string_view prediction, const GoldRecord& gold,
                        const SimilarityFn& fn, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InvalidArgument("similarity threshold must lie in [0, 1]");
  }
  const NormalizedAnswer pred = normalize_answer(prediction);
  double best = 0.0;
  bool any = false;
  for (const auto& a : gold.annotations) {
    best = std::max(best, answer_similarity(pred, normalize_answer(a.answer), fn));
    any = true;
  }
  return any && best >= threshold;
}

bool answerable_label(const GoldRecord& gold) {
  if (gold.annotations.empty()) {
    throw InvalidArgument("gold record '" + gold.question_id + "' has no annotations");
  }
  return gold.answerable();
}

CorrectnessClassifier::CorrectnessClassifier(std::string name, ClassifierKind kind,
                                             double threshold,
                                             std::shared_ptr<const SimilarityFn> similarity)
    : name_(std::move(name)),
      kind_(kind),
      threshold_(threshold),
      similarity_(std::move(similarity)) {
  if (!(threshold_ >= 0.0 && threshold_ <= 1.0)) {
    throw InvalidArgument("classifier threshold must lie in [0, 1]");
  }
  if (kind_ == ClassifierKind::SimilarityThreshold && !similarity_) {
    throw InvalidArgument("classifier '" + name_ + "' needs a similarity function");
  }
}

CorrectnessClassifier CorrectnessClassifier::exact_match() {
  return CorrectnessClassifier("em", ClassifierKind::ExactMatch, 1.0, nullptr);
}

CorrectnessClassifier CorrectnessClassifier::bleu_threshold(
    std::shared_ptr<const SimilarityFn> bleu, double threshold) {
  return CorrectnessClassifier("bleu-threshold", ClassifierKind::SimilarityThreshold, threshold,
                               std::move(bleu));
}

CorrectnessClassifier CorrectnessClassifier::adapter_threshold(
    std::shared_ptr<const SimilarityFn> adapter, double threshold) {
  std::string name = "adapter-threshold:" + (adapter ? adapter->name() : std::string());
  return CorrectnessClassifier(std::move(name), ClassifierKind::SimilarityThreshold, threshold,
                               std::move(adapter));
}

bool CorrectnessClassifier::operator()(std::string_view prediction,
                                       const GoldRecord& gold) const {
  if (kind_ == ClassifierKind::ExactMatch) return exact_match_correct(prediction, gold);
  return similarity_correct(prediction, gold, *similarity_, threshold_);
}

}  // namespace selcal
