#include "selcal/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "selcal/errors.hpp"

namespace selcal {
namespace {

constexpr std::array<const char*, 8> kColors = {"red",   "blue",  "green", "yellow",
                                                "black", "white", "brown", "orange"};
constexpr std::array<const char*, 10> kObjects = {"apple", "car",   "bottle", "phone", "book",
                                                  "shirt", "chair", "mug",    "box",   "bag"};
constexpr std::size_t kAnswerCount = kColors.size() * kObjects.size();
constexpr std::size_t kWrongCount = kAnswerCount - 1;

// Paraphrase templates over (color, object); all normalize to distinct strings.
constexpr std::array<const char*, 6> kParaphrases = {
    "{c} {o}",        "it is {c} {o}",  "{c} {o} probably",
    "maybe {c} {o}",  "{o} that is {c}", "looks like {c} {o}"};

constexpr std::array<const char*, 3> kAbstentions = {"unanswerable", "Unanswerable.",
                                                     "it is unanswerable"};

struct Answer {
  std::size_t color;
  std::size_t object;

  std::size_t index() const { return color * kObjects.size() + object; }
  std::string text() const { return std::string(kColors[color]) + " " + kObjects[object]; }
};

Answer answer_at(std::size_t index) {
  return {index / kObjects.size(), index % kObjects.size()};
}

// Uniform over every answer except `excluded`.
Answer wrong_answer(SynthRng& rng, const Answer& excluded) {
  std::size_t idx = rng.below(kWrongCount);
  if (idx >= excluded.index()) ++idx;
  return answer_at(idx);
}

std::string fill(const char* tmpl, const Answer& a) {
  std::string out;
  for (const char* p = tmpl; *p != '\0'; ++p) {
    if (p[0] == '{' && p[1] != '\0' && p[2] == '}') {
      out += p[1] == 'c' ? kColors[a.color] : kObjects[a.object];
      p += 2;
    } else {
      out.push_back(*p);
    }
  }
  return out;
}

// Case or trailing-punctuation noise that normalization removes.
std::string surface_variant(SynthRng& rng, const std::string& text) {
  switch (rng.below(3)) {
    case 0:
      return text;
    case 1: {
      std::string s = text;
      s[0] = static_cast<char>(s[0] - 'a' + 'A');
      return s;
    }
    default:
      return text + ".";
  }
}

// One token per word; the first carries the whole log-probability so the
// sum is exact.
SampledAnswer with_logprob(std::string text, double logprob) {
  const auto words = static_cast<std::size_t>(
      1 + std::count(text.begin(), text.end(), ' '));
  SampledAnswer a;
  a.text = std::move(text);
  a.logprobs.assign(words, 0.0);
  a.logprobs[0] = logprob;
  return a;
}

std::string question_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%06zu", i);
  return buf;
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

double SynthRng::unit() {
  const std::uint64_t x = engine_();
  return (static_cast<double>(x >> 12) + 0.5) * 0x1p-52;
}

std::size_t SynthRng::below(std::size_t n) {
  return static_cast<std::size_t>(engine_() % static_cast<std::uint64_t>(n));
}

void validate(const SynthConfig& config) {
  if (config.n < 1) throw InvalidArgument("synth: n must be >= 1");
  if (config.samples_per_q < 1) throw InvalidArgument("synth: samples_per_q must be >= 1");
  if (!(config.miscalibration_shift >= -1.0 && config.miscalibration_shift <= 1.0)) {
    throw InvalidArgument("synth: miscalibration_shift must lie in [-1, 1]");
  }
  if (!in_unit(config.paraphrase_cluster_rate)) {
    throw InvalidArgument("synth: paraphrase_cluster_rate must lie in [0, 1]");
  }
  if (!in_unit(config.abstain_rate)) {
    throw InvalidArgument("synth: abstain_rate must lie in [0, 1]");
  }
}

SynthDump generate(const SynthConfig& config) {
  validate(config);
  SynthRng rng(config.seed);
  SynthDump dump;
  dump.predictions.reserve(config.n);
  dump.gold.reserve(config.n);

  const double paraphrase_count = static_cast<double>(kParaphrases.size());
  const double wrong_count = static_cast<double>(kWrongCount);

  for (std::size_t q = 0; q < config.n; ++q) {
    const double log_u = std::log(rng.unit());
    const double u = std::exp(log_u);
    const bool abstain = rng.chance(config.abstain_rate);
    const bool cluster = rng.chance(config.paraphrase_cluster_rate);
    const bool correct =
        rng.chance(std::clamp(u + config.miscalibration_shift, 0.0, 1.0));
    const Answer truth = answer_at(rng.below(kAnswerCount));
    const bool with_article = rng.chance(0.2);

    PredictionRecord record;
    record.question_id = question_id(q);
    if (abstain) {
      record.greedy = with_logprob(kAbstentions[rng.below(kAbstentions.size())], log_u);
    } else {
      record.greedy = with_logprob((with_article ? "a " : "") + truth.text(), log_u);
    }

    // Cluster questions draw wrong answers without replacement so that the
    // sample set always holds more than one distinct text.
    std::vector<std::size_t> wrong_pool;
    const auto refill = [&] {
      for (std::size_t i = 0; i < kAnswerCount; ++i) {
        if (i != truth.index()) wrong_pool.push_back(i);
      }
    };
    const std::size_t offset = rng.below(kParaphrases.size());
    std::size_t agreeing = 0;
    for (std::size_t s = 0; s < config.samples_per_q; ++s) {
      if (rng.chance(u)) {
        if (cluster) {
          const char* tmpl = kParaphrases[(offset + agreeing) % kParaphrases.size()];
          record.samples.push_back(with_logprob(fill(tmpl, truth), std::log(u / paraphrase_count)));
        } else {
          record.samples.push_back(with_logprob(surface_variant(rng, truth.text()), log_u));
        }
        ++agreeing;
      } else {
        Answer wrong{};
        if (cluster) {
          if (wrong_pool.empty()) refill();
          const std::size_t pick = rng.below(wrong_pool.size());
          wrong = answer_at(wrong_pool[pick]);
          wrong_pool.erase(wrong_pool.begin() + static_cast<std::ptrdiff_t>(pick));
        } else {
          wrong = wrong_answer(rng, truth);
        }
        record.samples.push_back(with_logprob(wrong.text(), std::log((1.0 - u) / wrong_count)));
      }
    }
    record.meta = {{"generator", "selcal-synth"},
                   {"k", std::to_string(config.samples_per_q)},
                   {"seed", std::to_string(config.seed)}};

    GoldRecord gold;
    gold.question_id = record.question_id;
    constexpr std::size_t kAnnotators = 10;
    if (abstain && rng.chance(0.5)) {
      for (std::size_t i = 0; i < kAnnotators; ++i) {
        gold.annotations.push_back({"unanswerable", false, "yes"});
      }
    } else {
      const std::size_t matches = correct ? 1 + rng.below(3) : 0;
      for (std::size_t i = 0; i < kAnnotators; ++i) {
        std::string text =
            i < matches ? surface_variant(rng, truth.text()) : wrong_answer(rng, truth).text();
        gold.annotations.push_back({std::move(text), true, rng.chance(0.5) ? "yes" : "maybe"});
      }
      for (std::size_t i = kAnnotators - 1; i > 0; --i) {
        std::swap(gold.annotations[i], gold.annotations[rng.below(i + 1)]);
      }
    }

    dump.predictions.push_back(std::move(record));
    dump.gold.push_back(std::move(gold));
  }
  return dump;
}

}  // namespace selcal
