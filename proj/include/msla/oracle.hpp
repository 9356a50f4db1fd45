#pragma once

/// @file oracle.hpp
/// The black-box scoring boundary: an image and a label set go in, a
/// probability distribution over the labels comes out.
///
/// Concrete oracles implement do_score(). The public score() wrapper validates
/// every returned distribution and counts successful queries, so attack code
/// can rely on both regardless of the backend.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "msla/errors.hpp"
#include "msla/image.hpp"

namespace msla {

/// Ordered candidate labels plus the ground-truth index.
class LabelSet {
 public:
  LabelSet(std::vector<std::string> labels, std::size_t ground_truth)
      : labels_(std::move(labels)), gt_(ground_truth) {
    if (labels_.size() < 2) throw InvalidArgument("a label set needs at least two labels");
    if (std::set<std::string>(labels_.begin(), labels_.end()).size() != labels_.size()) {
      throw InvalidArgument("labels must be distinct");
    }
    if (gt_ >= labels_.size()) throw InvalidArgument("ground-truth index out of range");
  }

  /// Resolves `ground_truth` by exact match.
  static LabelSet with_label(std::vector<std::string> labels, const std::string& ground_truth) {
    const auto it = std::find(labels.begin(), labels.end(), ground_truth);
    if (it == labels.end()) {
      throw InvalidArgument("label '" + ground_truth + "' is not in the label set");
    }
    const auto idx = static_cast<std::size_t>(it - labels.begin());
    return LabelSet(std::move(labels), idx);
  }

  [[nodiscard]] std::size_t size() const { return labels_.size(); }
  [[nodiscard]] std::size_t ground_truth() const { return gt_; }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] const std::string& operator[](std::size_t i) const { return labels_[i]; }

 private:
  std::vector<std::string> labels_;
  std::size_t gt_;
};

/// Probability vector; every entry in [0,1] and the total within 1e-5 of 1.
class ProbDist {
 public:
  static constexpr double kSumTolerance = 1e-5;

  ProbDist() = default;
  explicit ProbDist(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.empty()) throw InvalidDistribution("empty distribution");
    double sum = 0.0;
    for (double v : p_) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidDistribution("probability " + std::to_string(v) + " outside [0,1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
    }
  }

  static ProbDist uniform(std::size_t k) { return ProbDist(std::vector<double>(k, 1.0 / k)); }
  static ProbDist one_hot(std::size_t k, std::size_t at) {
    std::vector<double> v(k, 0.0);
    v.at(at) = 1.0;
    return ProbDist(std::move(v));
  }

  [[nodiscard]] std::size_t size() const { return p_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return p_[i]; }
  [[nodiscard]] std::span<const double> values() const { return p_; }

  /// Arg-max; ties resolve to the lowest index.
  [[nodiscard]] std::size_t top1() const {
    return static_cast<std::size_t>(std::max_element(p_.begin(), p_.end()) - p_.begin());
  }

  friend bool operator==(const ProbDist&, const ProbDist&) = default;

 private:
  std::vector<double> p_;
};

/// Max-shifted softmax.
inline ProbDist softmax(std::span<const double> logits) {
  if (logits.size() < 2) throw InvalidArgument("softmax needs at least two logits");
  for (double z : logits) {
    if (!std::isfinite(z)) throw NonFiniteLogit("non-finite logit");
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return ProbDist(std::move(out));
}

class ProbabilityOracle {
 public:
  virtual ~ProbabilityOracle() = default;

  /// Scores one image. Throws InvalidDistribution (or MalformedResponse for
  /// remote backends) if the backend breaks the distribution contract.
  ProbDist score(const Image& img, const LabelSet& labels) const {
    ProbDist d = do_score(img, labels);
    if (d.size() != labels.size()) {
      throw InvalidDistribution("oracle returned " + std::to_string(d.size()) +
                                " probabilities for " + std::to_string(labels.size()) +
                                " labels");
    }
    queries_.fetch_add(1, std::memory_order_relaxed);
    return d;
  }

  /// Number of concurrent score() calls this backend tolerates.
  [[nodiscard]] virtual int max_concurrency() const { return 1; }

  [[nodiscard]] std::uint64_t query_count() const {
    return queries_.load(std::memory_order_relaxed);
  }

 protected:
  virtual ProbDist do_score(const Image& img, const LabelSet& labels) const = 0;

 private:
  mutable std::atomic<std::uint64_t> queries_{0};
};

struct Region {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const Region&, const Region&) = default;
};

/// Synthetic classifier: label k's logit is the negative distance between the
/// region's mean color and anchor k, divided by `sharpness`.
class RegionColorOracle final : public ProbabilityOracle {
 public:
  RegionColorOracle(std::vector<Rgb> anchors, Region region, double sharpness)
      : anchors_(std::move(anchors)), region_(region), sharpness_(sharpness) {
    if (anchors_.size() < 2) throw InvalidArgument("need at least two anchor colors");
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
      for (std::size_t j = i + 1; j < anchors_.size(); ++j) {
        if (anchors_[i] == anchors_[j]) throw InvalidArgument("anchor colors must be distinct");
      }
    }
    if (region_.width <= 0 || region_.height <= 0) {
      throw InvalidArgument("region must have positive size");
    }
    if (!(sharpness_ > 0.0) || !std::isfinite(sharpness_)) {
      throw InvalidArgument("sharpness must be positive");
    }
  }

  [[nodiscard]] int max_concurrency() const override { return std::numeric_limits<int>::max(); }
  [[nodiscard]] const std::vector<Rgb>& anchors() const { return anchors_; }
  [[nodiscard]] const Region& region() const { return region_; }

  /// Mean color of the scored region, per channel.
  [[nodiscard]] std::array<double, 3> region_mean(const Image& img) const {
    if (region_.x < 0 || region_.y < 0 || region_.x + region_.width > img.width() ||
        region_.y + region_.height > img.height()) {
      throw RegionOutOfBounds("scoring region exceeds image bounds");
    }
    std::array<double, 3> sum{};
    for (int r = region_.y; r < region_.y + region_.height; ++r) {
      for (int c = region_.x; c < region_.x + region_.width; ++c) {
        const Rgb px = img.at(r, c);
        sum[0] += px.r;
        sum[1] += px.g;
        sum[2] += px.b;
      }
    }
    const double n = static_cast<double>(region_.width) * region_.height;
    return {sum[0] / n, sum[1] / n, sum[2] / n};
  }

 protected:
  ProbDist do_score(const Image& img, const LabelSet& labels) const override {
    if (labels.size() != anchors_.size()) {
      throw InvalidArgument("label count differs from anchor count");
    }
    const auto m = region_mean(img);
    std::vector<double> logits(anchors_.size());
    for (std::size_t k = 0; k < anchors_.size(); ++k) {
      const double dr = m[0] - anchors_[k].r;
      const double dg = m[1] - anchors_[k].g;
      const double db = m[2] - anchors_[k].b;
      logits[k] = -std::sqrt(dr * dr + dg * dg + db * db) / sharpness_;
    }
    return softmax(logits);
  }

 private:
  std::vector<Rgb> anchors_;
  Region region_;
  double sharpness_;
};

/// Returns the same distribution for every image.
class ConstantOracle final : public ProbabilityOracle {
 public:
  explicit ConstantOracle(ProbDist dist) : dist_(std::move(dist)) {}

  [[nodiscard]] int max_concurrency() const override { return std::numeric_limits<int>::max(); }

 protected:
  ProbDist do_score(const Image&, const LabelSet&) const override { return dist_; }

 private:
  ProbDist dist_;
};

}  // namespace msla
