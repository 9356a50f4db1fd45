#pragma once

/// @file metrics.hpp
/// Top-1 accuracy, attack success rate and frame-level ASR, all in percent.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msla/errors.hpp"
#include "msla/oracle.hpp"
#include "msla/png_io.hpp"

namespace msla {

struct EvalRecord {
  std::string sample_id;
  std::size_t clean_top1 = 0;
  std::size_t adversarial_top1 = 0;
  std::size_t ground_truth = 0;
  double clean_p_gt = 0.0;
  double adversarial_p_gt = 0.0;
};

enum class Which { Clean, Adversarial };

inline double top1_accuracy(std::span<const EvalRecord> records, Which which) {
  if (records.empty()) throw EmptyEvaluation("no records to evaluate");
  const auto correct = std::count_if(records.begin(), records.end(), [&](const EvalRecord& r) {
    const auto pred = which == Which::Clean ? r.clean_top1 : r.adversarial_top1;
    return pred == r.ground_truth;
  });
  return 100.0 * static_cast<double>(correct) / static_cast<double>(records.size());
}

/// Share of records whose adversarial top-1 is not the ground truth. Callers
/// pass only samples that were correct when clean.
inline double attack_success_rate(std::span<const EvalRecord> records) {
  if (records.empty()) throw EmptyEvaluation("no records to evaluate");
  const auto flipped = std::count_if(records.begin(), records.end(), [](const EvalRecord& r) {
    return r.adversarial_top1 != r.ground_truth;
  });
  return 100.0 * static_cast<double>(flipped) / static_cast<double>(records.size());
}

inline double accuracy_drop(std::span<const EvalRecord> records) {
  return top1_accuracy(records, Which::Clean) - top1_accuracy(records, Which::Adversarial);
}

struct FrameScore {
  std::string file;
  std::size_t top1 = 0;
  double p_gt = 0.0;
};

struct FrameReport {
  std::vector<FrameScore> frames;  // lexicographic by file name
  std::size_t misclassified = 0;
  double asr = 0.0;
};

/// PNG frames in `dir`, sorted by file name.
inline std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) {
    throw NoFrames("frame directory " + dir.string() + " does not exist");
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

/// Scores every frame independently. Frames that fail to decode are an error,
/// not a silent skip.
inline FrameReport frame_level_asr(std::span<const std::filesystem::path> frames,
                                   const LabelSet& labels, const ProbabilityOracle& oracle) {
  if (frames.empty()) throw NoFrames("no frames to evaluate");
  FrameReport rep;
  for (const auto& f : frames) {
    const ProbDist d = oracle.score(png::read_rgb(f), labels);
    FrameScore s{f.filename().string(), d.top1(), d[labels.ground_truth()]};
    if (s.top1 != labels.ground_truth()) ++rep.misclassified;
    rep.frames.push_back(std::move(s));
  }
  rep.asr = 100.0 * static_cast<double>(rep.misclassified) / static_cast<double>(frames.size());
  return rep;
}

inline FrameReport frame_level_asr(const std::filesystem::path& dir, const LabelSet& labels,
                                   const ProbabilityOracle& oracle) {
  const auto frames = list_frames(dir);
  return frame_level_asr(std::span<const std::filesystem::path>(frames), labels, oracle);
}

}  // namespace msla
