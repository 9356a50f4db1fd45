#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "msla/metrics.hpp"
#include "support/scenario.hpp"

namespace msla {
namespace {

namespace fs = std::filesystem;

std::vector<EvalRecord> records(int n, int clean_ok, int adv_ok) {
  std::vector<EvalRecord> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].sample_id = "s" + std::to_string(i);
    out[i].ground_truth = 1;
    out[i].clean_top1 = i < clean_ok ? 1 : 2;
    out[i].adversarial_top1 = i < adv_ok ? 1 : 3;
  }
  return out;
}

TEST(Metrics, AttackSuccessRate) {
  const auto r = records(100, 100, 71);
  EXPECT_DOUBLE_EQ(attack_success_rate(r), 29.0);
}

TEST(Metrics, AccuracyDrop) {
  const auto r = records(100, 93, 11);
  EXPECT_DOUBLE_EQ(top1_accuracy(r, Which::Clean), 93.0);
  EXPECT_DOUBLE_EQ(top1_accuracy(r, Which::Adversarial), 11.0);
  EXPECT_DOUBLE_EQ(accuracy_drop(r), 82.0);
}

TEST(Metrics, EmptyInputIsAnError) {
  const std::vector<EvalRecord> none;
  EXPECT_THROW(top1_accuracy(none, Which::Clean), EmptyEvaluation);
  EXPECT_THROW(attack_success_rate(none), EmptyEvaluation);
  EXPECT_THROW(accuracy_drop(none), EmptyEvaluation);
}

TEST(MetricsProperties, AccuracyAndSuccessAreComplementary) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + static_cast<int>(rng() % 300);
    const int ok = static_cast<int>(rng() % (n + 1));
    const auto r = records(n, n, ok);
    ASSERT_NEAR(top1_accuracy(r, Which::Adversarial) + attack_success_rate(r), 100.0, 1e-9);
  }
}

TEST(MetricsProperties, PermutationInvariant) {
  std::mt19937_64 rng(6);
  auto r = records(57, 40, 13);
  const double acc = top1_accuracy(r, Which::Clean), asr = attack_success_rate(r);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(r.begin(), r.end(), rng);
    ASSERT_EQ(top1_accuracy(r, Which::Clean), acc);
    ASSERT_EQ(attack_success_rate(r), asr);
  }
}

class FrameDir : public ::testing::Test {
 protected:
  fs::path dir = fs::path(MSLA_TEST_TMP) / "frames" /
                 ::testing::UnitTest::GetInstance()->current_test_info()->name();

  void SetUp() override {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }

  // Frame whose scored region carries anchor `k`.
  static Image frame(std::size_t k) {
    Image img = testing::scenario_image();
    const Region reg = testing::scenario_region();
    const Rgb c = testing::scenario_anchors()[k];
    for (int r = reg.y; r < reg.y + reg.height; ++r) {
      for (int col = reg.x; col < reg.x + reg.width; ++col) img.set(r, col, c);
    }
    return img;
  }
};

TEST_F(FrameDir, SevenOfTenMisclassified) {
  for (int i = 0; i < 10; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03d.png", i);
    png::write_rgb(dir / name, frame(i < 7 ? 3 + i % 4 : 0));
  }
  { std::ofstream(dir / "notes.txt") << "ignored"; }
  const auto oracle = testing::scenario_oracle();
  const FrameReport rep = frame_level_asr(dir, testing::scenario_label_set(), oracle);
  EXPECT_EQ(rep.frames.size(), 10u);
  EXPECT_EQ(rep.misclassified, 7u);
  EXPECT_DOUBLE_EQ(rep.asr, 70.0);
  EXPECT_EQ(rep.frames.front().file, "frame_000.png");
  EXPECT_EQ(rep.frames.back().file, "frame_009.png");
  EXPECT_EQ(oracle.query_count(), 10u);
}

TEST_F(FrameDir, EmptyDirectory) {
  const auto oracle = testing::scenario_oracle();
  EXPECT_THROW(frame_level_asr(dir, testing::scenario_label_set(), oracle), NoFrames);
}

TEST_F(FrameDir, MissingDirectory) {
  const auto oracle = testing::scenario_oracle();
  EXPECT_THROW(frame_level_asr(dir / "absent", testing::scenario_label_set(), oracle), NoFrames);
}

TEST_F(FrameDir, CorruptFrameIsAnError) {
  png::write_rgb(dir / "a.png", frame(0));
  { std::ofstream(dir / "b.png") << "not a png"; }
  const auto oracle = testing::scenario_oracle();
  EXPECT_THROW(frame_level_asr(dir, testing::scenario_label_set(), oracle), ImageIoError);
}

}  // namespace
}  // namespace msla
