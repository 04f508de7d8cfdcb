#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "selcal/textnorm.hpp"

namespace selcal {

// Sentence-level BLEU of `candidate` against a single `reference`.
//
// The effective order is min(max_order, |candidate|). Unigram precision is
// the plain clipped precision; orders >= 2 use add-one smoothing
// (matches + 1) / (total + 1). The brevity penalty is
// exp(1 - |reference| / |candidate|) for short candidates. An empty
// candidate or zero unigram precision scores 0.
//
// Throws InvalidArgument when max_order < 1.
double bleu(const TokenSeq& candidate, const TokenSeq& reference, int max_order = 4);

enum class SimilarityKind { BuiltinBleu, ExternalAdapter };

// Answer-pair similarity in [0, 1] over normalized answers. The first
// argument plays the candidate role; implementations may be asymmetric.
class SimilarityFn {
 public:
  virtual ~SimilarityFn() = default;

  virtual const std::string& name() const = 0;
  virtual SimilarityKind kind() const = 0;
  virtual double operator()(const NormalizedAnswer& candidate,
                            const NormalizedAnswer& reference) const = 0;
};

struct BleuConfig {
  int max_order = 4;
  TokenMode mode = TokenMode::Word;
};

class BleuSimilarity final : public SimilarityFn {
 public:
  explicit BleuSimilarity(BleuConfig config = {});

  const std::string& name() const override { return name_; }
  SimilarityKind kind() const override { return SimilarityKind::BuiltinBleu; }
  double operator()(const NormalizedAnswer& candidate,
                    const NormalizedAnswer& reference) const override;

  const BleuConfig& config() const { return config_; }

 private:
  BleuConfig config_;
  std::string name_ = "bleu";
};

// Substring that marks an abstention in normalized or raw answer text.
inline constexpr std::string_view kAbstentionMarker = "unanswerable";

bool is_abstention(const NormalizedAnswer& answer);

// Normalizes both answers, then: exactly one abstention -> 0, two
// abstentions -> 1, otherwise fn(a, b). Results outside [0, 1] from an
// external adapter raise AdapterError.
double answer_similarity(std::string_view a, std::string_view b, const SimilarityFn& fn);
double answer_similarity(const NormalizedAnswer& a, const NormalizedAnswer& b,
                         const SimilarityFn& fn);

using SimilarityMatrix = std::vector<std::vector<double>>;

// Entry (i, j) = answer_similarity(answers[i], answers[j]). Not symmetric in
// general. Throws InvalidArgument on an empty list.
SimilarityMatrix pairwise_matrix(const std::vector<std::string>& answers,
                                 const SimilarityFn& fn);
SimilarityMatrix pairwise_matrix(const std::vector<NormalizedAnswer>& answers,
                                 const SimilarityFn& fn);

}  // namespace selcal
