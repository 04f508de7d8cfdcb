#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "selcal/core.hpp"

namespace selcal {

// Portable random source for synthetic dumps: std::mt19937_64 (whose output
// sequence is fixed by the C++ standard) with explicit conversions, so other
// implementations can reproduce fixtures bit for bit.
//   unit()     = ((x >> 12) + 0.5) * 2^-52, in (0, 1)
//   below(n)   = x mod n
//   chance(p)  = unit() < p
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  double unit();
  std::size_t below(std::size_t n);
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

struct SynthConfig {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double miscalibration_shift = 0.0;      // in [-1, 1]
  double paraphrase_cluster_rate = 0.0;   // in [0, 1]
  double abstain_rate = 0.0;              // in [0, 1]
  std::size_t samples_per_q = 10;
};

struct SynthDump {
  std::vector<PredictionRecord> predictions;
  std::vector<GoldRecord> gold;
};

// Per question: latent confidence u (the greedy likelihood, exactly), greedy
// correct with probability clamp(u + shift), each sample agreeing with the
// greedy answer with probability u. Agreeing samples are surface variants of
// the greedy text, or, for paraphrase-cluster questions, cyclically chosen
// distinct paraphrases. Throws InvalidArgument on an invalid config.
SynthDump generate(const SynthConfig& config);

void validate(const SynthConfig& config);

}  // namespace selcal
