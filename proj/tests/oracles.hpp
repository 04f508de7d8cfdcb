// Brute-force reference computations for the metric tests. These deliberately
// avoid the library's sorting and counting helpers.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "selcal/metrics.hpp"

namespace selcal::oracle {

// Exhaustive pairwise comparison over every (correct, incorrect) pair.
inline std::optional<double> pairwise_auc(const std::vector<EvalPoint>& points) {
  double total = 0.0;
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const auto& p : points) (p.correct ? pos : neg) += 1;
  if (pos == 0 || neg == 0) return std::nullopt;
  for (const auto& a : points) {
    if (!a.correct) continue;
    for (const auto& b : points) {
      if (b.correct) continue;
      if (a.score > b.score) {
        total += 1.0;
      } else if (a.score == b.score) {
        total += 0.5;
      }
    }
  }
  return total / (static_cast<double>(pos) * static_cast<double>(neg));
}

// Selection-sort ranking: repeatedly take the highest score, smallest id.
inline std::vector<EvalPoint> selection_rank(std::vector<EvalPoint> pts) {
  std::vector<EvalPoint> out;
  while (!pts.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const bool higher = pts[i].score > pts[best].score;
      const bool tie_smaller = pts[i].score == pts[best].score && pts[i].record_id < pts[best].record_id;
      if (higher || tie_smaller) best = i;
    }
    out.push_back(pts[best]);
    pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

// Scans every prefix, recounting from scratch each time.
inline double prefix_scan_coverage(const std::vector<EvalPoint>& points, double target) {
  const auto ranked = selection_rank(points);
  std::size_t best = 0;
  for (std::size_t m = 1; m <= ranked.size(); ++m) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < m; ++i) correct += ranked[i].correct ? 1 : 0;
    if (static_cast<double>(correct) / static_cast<double>(m) >= target / 100.0) best = m;
  }
  return 100.0 * static_cast<double>(best) / static_cast<double>(ranked.size());
}

inline std::vector<RiskCoveragePoint> prefix_scan_curve(const std::vector<EvalPoint>& points) {
  const auto ranked = selection_rank(points);
  std::vector<RiskCoveragePoint> out;
  for (std::size_t m = 1; m <= ranked.size(); ++m) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < m; ++i) correct += ranked[i].correct ? 1 : 0;
    out.push_back({100.0 * static_cast<double>(m) / static_cast<double>(ranked.size()),
                   100.0 * static_cast<double>(correct) / static_cast<double>(m)});
  }
  return out;
}

// Random instance with scores on a coarse grid so that ties are frequent.
inline std::vector<EvalPoint> random_points(std::mt19937_64& rng, std::size_t max_n = 200) {
  std::uniform_int_distribution<std::size_t> size(1, max_n);
  std::uniform_int_distribution<int> grid(0, 20);
  std::uniform_real_distribution<double> fine(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution use_grid(0.6);
  const std::size_t n = size(rng);
  std::vector<EvalPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = use_grid(rng) ? grid(rng) / 20.0 : fine(rng);
    pts.push_back({s, coin(rng), "r" + std::to_string(1000 + i)});
  }
  std::shuffle(pts.begin(), pts.end(), rng);
  return pts;
}

}  // namespace selcal::oracle
