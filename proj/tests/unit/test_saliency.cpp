#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "salisa/errors.hpp"
#include "salisa/saliency.hpp"

using namespace salisa;

namespace {

Detection box(double x, double y, double w, double h, double score = 0.9) { return {{x, y, x + w, y + h}, score}; }

int count_label(const SaliencyMap& m, float label) {
  return static_cast<int>(std::count(m.values().begin(), m.values().end(), label));
}

}  // namespace

TEST(ClassifySize, SmallBelowThreshold) {
  // 60 x 70 = 4200 px^2 = 0.456% of 1280 x 720
  EXPECT_EQ(classify_size(box(10, 10, 60, 70), {720, 1280}, {}), ObjectSizeClass::Small);
}

TEST(ClassifySize, LargeAboveThreshold) {
  EXPECT_EQ(classify_size(box(10, 10, 100, 100), {720, 1280}, {}), ObjectSizeClass::Large);
}

TEST(ClassifySize, ExactThresholdIsLarge) {
  // 0.5% of 1000 x 1000 = 5000 = 50 x 100
  EXPECT_EQ(classify_size(box(0, 0, 50, 100), {1000, 1000}, {}), ObjectSizeClass::Large);
  EXPECT_EQ(classify_size(box(0, 0, 50, 99.99), {1000, 1000}, {}), ObjectSizeClass::Small);
}

TEST(GenerateSaliency, EmptyInputGivesZeroMap) {
  const auto m = generate_saliency({}, {720, 1280}, {});
  EXPECT_EQ(m.extent(), (Extent{128, 128}));
  EXPECT_EQ(count_label(m, 0.0f), 128 * 128);
}

TEST(GenerateSaliency, ScoreThresholdIsInclusive) {
  const std::vector<Detection> dets{box(100, 100, 40, 40, 0.6), box(800, 400, 40, 40, 0.4)};
  const auto m = generate_saliency(dets, {720, 1280}, {});
  const auto only_first = generate_saliency(std::vector<Detection>{dets[0]}, {720, 1280}, {});
  EXPECT_EQ(std::vector<float>(m.values().begin(), m.values().end()),
            std::vector<float>(only_first.values().begin(), only_first.values().end()));
  EXPECT_GT(count_label(m, 1.0f), 0);

  const auto at_tau = generate_saliency(std::vector<Detection>{box(100, 100, 40, 40, 0.5)}, {720, 1280}, {});
  EXPECT_GT(count_label(at_tau, 1.0f), 0);
}

TEST(GenerateSaliency, OverlapTakesMaximumLabel) {
  const std::vector<Detection> dets{box(200, 200, 400, 300), box(300, 300, 40, 40)};
  const auto m = generate_saliency(dets, {720, 1280}, {});
  EXPECT_GT(count_label(m, 1.0f), 0);
  EXPECT_GT(count_label(m, 0.5f), 0);
  // Cell holding the small box center: (320,320) px -> cell units t = p * 128 / (dim - 1)
  const int col = static_cast<int>(320.0 * 128 / 1279);
  const int row = static_cast<int>(320.0 * 128 / 719);
  EXPECT_EQ(m.at(row, col), 1.0f);
}

TEST(GenerateSaliency, CoverageFollowsCellCenters) {
  // 128 x 128 image and map: t = p * 128 / 127. Box [0, 127] covers all cells.
  SaliencyConfig cfg;
  cfg.alpha_pct = 200.0;
  const auto full = generate_saliency(std::vector<Detection>{box(0, 0, 127, 127)}, {128, 128}, cfg);
  EXPECT_EQ(count_label(full, 1.0f), 128 * 128);
  // A box whose extent in cell units is [9.6, 12.2) covers cells 10 and 11 only.
  const double a = 9.6 * 127 / 128;
  const double b = 12.2 * 127 / 128;
  const auto part = generate_saliency(std::vector<Detection>{box(a, a, b - a, b - a)}, {128, 128}, cfg);
  EXPECT_EQ(count_label(part, 1.0f), 4);
  EXPECT_EQ(part.at(10, 10), 1.0f);
  EXPECT_EQ(part.at(11, 11), 1.0f);
}

TEST(GenerateSaliency, PermutationInvariant) {
  std::mt19937_64 rng(7);
  std::vector<Detection> dets;
  for (int k = 0; k < 12; ++k) {
    const double x = static_cast<double>(rng() % 1100);
    const double y = static_cast<double>(rng() % 600);
    dets.push_back(box(x, y, 10.0 + rng() % 170, 10.0 + rng() % 110, (rng() % 100) / 100.0));
  }
  const auto ref = generate_saliency(dets, {720, 1280}, {});
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(dets.begin(), dets.end(), rng);
    const auto m = generate_saliency(dets, {720, 1280}, {});
    ASSERT_TRUE(std::equal(ref.values().begin(), ref.values().end(), m.values().begin()));
  }
}

TEST(GenerateSaliency, RaisingTauNeverAddsCoverage) {
  std::mt19937_64 rng(11);
  std::vector<Detection> dets;
  for (int k = 0; k < 20; ++k) {
    dets.push_back(box(rng() % 1200, rng() % 650, 5.0 + rng() % 60, 5.0 + rng() % 60, (rng() % 101) / 100.0));
  }
  SaliencyConfig lo;
  SaliencyConfig hi;
  for (int t = 0; t < 10; ++t) {
    lo.tau = t / 10.0;
    hi.tau = (t + 1) / 10.0;
    const auto a = generate_saliency(dets, {720, 1280}, lo);
    const auto b = generate_saliency(dets, {720, 1280}, hi);
    for (std::size_t k = 0; k < a.values().size(); ++k) ASSERT_LE(b.values()[k], a.values()[k]);
  }
}

TEST(GenerateSaliency, RejectsResampledSpaceInput) {
  Detection d = box(0, 0, 10, 10);
  d.space = CoordinateSpace::resampled(42);
  EXPECT_THROW(generate_saliency(std::vector<Detection>{d}, {720, 1280}, {}), InvalidInput);
}

TEST(MapComposition, Classes) {
  SaliencyConfig cfg;
  EXPECT_EQ(map_composition(SaliencyMap(4, 4), cfg), MapComposition::Empty);
  std::vector<float> v(16, 0.0f);
  v[3] = 1.0f;
  EXPECT_EQ(map_composition(SaliencyMap(4, 4, v), cfg), MapComposition::OnlySmall);
  v[3] = 0.5f;
  EXPECT_EQ(map_composition(SaliencyMap(4, 4, v), cfg), MapComposition::OnlyLarge);
  v[5] = 1.0f;
  EXPECT_EQ(map_composition(SaliencyMap(4, 4, v), cfg), MapComposition::Mixed);
}

TEST(SaliencyConfigValidation, RejectsBadValues) {
  SaliencyConfig cfg;
  cfg.tau = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.out_size = {0, 4};
  EXPECT_THROW(cfg.validate(), ConfigError);
}
