#include "selcal/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "selcal/errors.hpp"

namespace selcal {
namespace {

using NgramCounts = std::map<std::string, int>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key.append(tokens[i + k]);
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

double bleu(const TokenSeq& candidate, const TokenSeq& reference, int max_order) {
  if (max_order < 1) throw InvalidArgument("bleu: max_order must be >= 1");
  if (candidate.empty()) return 0.0;

  const std::size_t c = candidate.size();
  const std::size_t r = reference.size();
  const std::size_t order = std::min<std::size_t>(static_cast<std::size_t>(max_order), c);

  double product = 1.0;
  for (std::size_t n = 1; n <= order; ++n) {
    const NgramCounts cand = count_ngrams(candidate.tokens, n);
    const NgramCounts ref = count_ngrams(reference.tokens, n);
    long matches = 0;
    for (const auto& [gram, count] : cand) {
      const auto it = ref.find(gram);
      if (it != ref.end()) matches += std::min(count, it->second);
    }
    const auto total = static_cast<long>(c - n + 1);
    if (n == 1) {
      if (matches == 0) return 0.0;
      product *= static_cast<double>(matches) / static_cast<double>(total);
    } else {
      product *= static_cast<double>(matches + 1) / static_cast<double>(total + 1);
    }
  }

  const double brevity =
      c >= r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return brevity * std::pow(product, 1.0 / static_cast<double>(order));
}

BleuSimilarity::BleuSimilarity(BleuConfig config) : config_(config) {
  if (config_.max_order < 1) throw InvalidArgument("bleu: max_order must be >= 1");
}

double BleuSimilarity::operator()(const NormalizedAnswer& candidate,
                                  const NormalizedAnswer& reference) const {
  return bleu(tokenize(candidate, config_.mode), tokenize(reference, config_.mode),
              config_.max_order);
}

bool is_abstention(const NormalizedAnswer& answer) {
  return answer.contains(kAbstentionMarker);
}

double answer_similarity(const NormalizedAnswer& a, const NormalizedAnswer& b,
                         const SimilarityFn& fn) {
  const bool abstain_a = is_abstention(a);
  const bool abstain_b = is_abstention(b);
  if (abstain_a != abstain_b) return 0.0;
  if (abstain_a) return 1.0;

  const double s = fn(a, b);
  if (!(s >= 0.0 && s <= 1.0)) {
    if (fn.kind() == SimilarityKind::ExternalAdapter) {
      throw AdapterError("similarity '" + fn.name() + "' returned " + std::to_string(s) +
                         ", outside [0, 1]");
    }
    throw Error("similarity '" + fn.name() + "' returned a value outside [0, 1]");
  }
  return s;
}

double answer_similarity(std::string_view a, std::string_view b, const SimilarityFn& fn) {
  return answer_similarity(normalize_answer(a), normalize_answer(b), fn);
}

SimilarityMatrix pairwise_matrix(const std::vector<NormalizedAnswer>& answers,
                                 const SimilarityFn& fn) {
  if (answers.empty()) throw InvalidArgument("pairwise_matrix: empty answer list");
  const std::size_t k = answers.size();
  SimilarityMatrix m(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      m[i][j] = answer_similarity(answers[i], answers[j], fn);
    }
  }
  return m;
}

SimilarityMatrix pairwise_matrix(const std::vector<std::string>& answers,
                                 const SimilarityFn& fn) {
  std::vector<NormalizedAnswer> normalized;
  normalized.reserve(answers.size());
  for (const auto& a : answers) normalized.push_back(normalize_answer(a));
  return pairwise_matrix(normalized, fn);
}

}  // namespace selcal
