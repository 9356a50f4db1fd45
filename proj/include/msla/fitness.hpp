#pragma once

/// @file fitness.hpp
/// Attack objectives over the oracle's output distribution. Lower is better.
///
///   Prob    : p(gt)
///   LogProb : ln(p(gt) + eps)
///   Multi   : ln(p(gt) + eps) - H(p)
///
/// eps = e^-10 guards the logarithm only; the entropy is in nats with
/// 0 ln 0 = 0.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "msla/errors.hpp"
#include "msla/oracle.hpp"

namespace msla {

enum class FitnessVariant { Prob, LogProb, Multi };

inline const double kLogEpsilon = std::exp(-10.0);

inline std::string_view to_string(FitnessVariant v) {
  switch (v) {
    case FitnessVariant::Prob: return "prob";
    case FitnessVariant::LogProb: return "logprob";
    case FitnessVariant::Multi: return "multi";
  }
  return "multi";
}

inline std::optional<FitnessVariant> parse_fitness_variant(std::string_view s) {
  if (s == "prob") return FitnessVariant::Prob;
  if (s == "logprob") return FitnessVariant::LogProb;
  if (s == "multi") return FitnessVariant::Multi;
  return std::nullopt;
}

inline double shannon_entropy(const ProbDist& dist) {
  double h = 0.0;
  for (double p : dist.values()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

inline double evaluate_fitness(const ProbDist& dist, std::size_t gt_index,
                               FitnessVariant variant) {
  if (gt_index >= dist.size()) throw InvalidArgument("ground-truth index out of range");
  const double p_gt = dist[gt_index];
  switch (variant) {
    case FitnessVariant::Prob: return p_gt;
    case FitnessVariant::LogProb: return std::log(p_gt + kLogEpsilon);
    case FitnessVariant::Multi: return std::log(p_gt + kLogEpsilon) - shannon_entropy(dist);
  }
  return p_gt;
}

}  // namespace msla
