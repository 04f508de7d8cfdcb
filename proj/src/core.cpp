#include "selcal/core.hpp"

#include <cmath>

namespace selcal {

bool GoldRecord::answerable() const {
  for (const auto& a : annotations) {
    if (a.answerable) return true;
  }
  return false;
}

const MethodMetrics* CalibrationReport::find(const std::string& method) const {
  for (const auto& [name, metrics] : methods) {
    if (name == method) return &metrics;
  }
  return nullptr;
}

namespace {

void check_answer(const SampledAnswer& answer, const std::string& where,
                  std::vector<std::string>& out) {
  if (!answer.text.empty() && answer.logprobs.empty()) {
    out.push_back(where + ": empty logprobs for non-empty answer");
  }
  if (answer.text.empty() && !answer.logprobs.empty()) {
    out.push_back(where + ": logprobs present for empty answer");
  }
  for (std::size_t i = 0; i < answer.logprobs.size(); ++i) {
    const double lp = answer.logprobs[i];
    if (!std::isfinite(lp)) {
      out.push_back(where + ": non-finite logprob at token " + std::to_string(i));
    } else if (lp > 0.0) {
      out.push_back(where + ": logprob > 0 at token " + std::to_string(i));
    }
  }
}

}  // namespace

ValidationResult validate_record(const PredictionRecord& record) {
  ValidationResult result;
  if (record.question_id.empty()) result.violations.push_back("empty id");
  check_answer(record.greedy, "greedy", result.violations);
  for (std::size_t i = 0; i < record.samples.size(); ++i) {
    check_answer(record.samples[i], "samples[" + std::to_string(i) + "]",
                 result.violations);
  }
  return result;
}

ValidationResult validate_gold(const GoldRecord& gold) {
  ValidationResult result;
  if (gold.question_id.empty()) result.violations.push_back("empty id");
  if (gold.annotations.empty()) result.violations.push_back("no annotations");
  return result;
}

}  // namespace selcal
