#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "greyshill/dataset.hpp"
#include "greyshill/features.hpp"
#include "oracles.hpp"

using namespace greyshill;

TEST(AmplitudeFeatures, WorkedVector) {
  const std::vector<double> x{3, -4};
  const auto f = amplitude_features(x);
  EXPECT_EQ(f.min, -4);
  EXPECT_EQ(f.max, 3);
  EXPECT_EQ(f.mean, -0.5);
  EXPECT_EQ(f.peak, 4);
  EXPECT_NEAR(f.rms, 3.53553, 1e-5);
  EXPECT_NEAR(f.rms_amplitude, 3.48205, 1e-5);
  EXPECT_EQ(f.abs_mean, 3.5);
  EXPECT_NEAR(f.variance, 12.25, 1e-12);
  EXPECT_NEAR(f.skewness, -18.5, 1e-12);
  EXPECT_NEAR(f.kurtosis, 168.5, 1e-12);
  EXPECT_NEAR(f.shape_factor, 1.01015, 1e-5);
  EXPECT_NEAR(f.crest_factor, 1.13137, 1e-5);
  EXPECT_NEAR(f.impulse_factor, 1.14286, 1e-5);
  EXPECT_NEAR(f.clearance_factor, 1.14875, 1e-5);
  EXPECT_NEAR(f.kurtosis_value, 1.0784, 1e-4);
}

TEST(AmplitudeFeatures, ZerosGiveZeros) {
  const std::vector<double> x(9, 0.0);
  for (double v : amplitude_features(x).as_array()) EXPECT_EQ(v, 0.0);
}

TEST(AmplitudeFeatures, ConstantSignal) {
  const std::vector<double> x(7, 2.5);
  const auto f = amplitude_features(x);
  EXPECT_DOUBLE_EQ(f.mean, 2.5);
  EXPECT_DOUBLE_EQ(f.abs_mean, 2.5);
  EXPECT_DOUBLE_EQ(f.rms, 2.5);
  EXPECT_DOUBLE_EQ(f.peak, 2.5);
  EXPECT_NEAR(f.variance, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(f.shape_factor, 1.0);
  EXPECT_DOUBLE_EQ(f.crest_factor, 1.0);
  EXPECT_DOUBLE_EQ(f.impulse_factor, 1.0);
}

TEST(AmplitudeFeatures, EmptySignalIsAnError) {
  EXPECT_THROW(amplitude_features(std::span<const double>{}), DataError);
}

TEST(AmplitudeFeatures, MatchesOracleOnRandomSignals) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-2, 2)(rng));
    std::normal_distribution<double> d(std::uniform_real_distribution<double>(-1, 1)(rng), scale);
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    const auto got = amplitude_features(x).as_array();
    const auto want = oracle::table3(x);
    for (std::size_t k = 0; k < kFeatureCount; ++k)
      ASSERT_NEAR(got[k], want.v[k], 1e-10 * std::max(1.0, std::abs(want.v[k])))
          << kFeatureNames[k] << " trial " << trial;
  }
}

TEST(AmplitudeFeatures, InvariantsHold) {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> x(2 + rng() % 50);
    std::uniform_real_distribution<double> d(-5, 5);
    for (auto& v : x) v = d(rng);
    const auto f = amplitude_features(x);
    EXPECT_LE(f.min, f.mean);
    EXPECT_LE(f.mean, f.max);
    EXPECT_EQ(f.peak, std::max(std::abs(f.min), std::abs(f.max)));
    EXPECT_GE(f.variance, -1e-12);
    EXPECT_LE(f.abs_mean, f.peak);
    for (double r : {f.shape_factor, f.crest_factor, f.impulse_factor, f.clearance_factor})
      EXPECT_GE(r, 1 - 1e-9);
  }
}

TEST(AmplitudeFeatures, PermutationBehaviour) {
  std::mt19937 rng(31);
  std::vector<double> x(32);
  std::uniform_real_distribution<double> d(-3, 3);
  for (auto& v : x) v = d(rng);
  auto y = x;
  std::shuffle(y.begin(), y.end(), rng);
  const auto fx = amplitude_features(x), fy = amplitude_features(y);
  // Order-free statistics agree.
  for (auto mem : {&FeatureVector::mean, &FeatureVector::rms, &FeatureVector::abs_mean, &FeatureVector::variance,
                   &FeatureVector::skewness, &FeatureVector::kurtosis, &FeatureVector::min, &FeatureVector::max,
                   &FeatureVector::peak})
    EXPECT_NEAR(fx.*mem, fy.*mem, 1e-12);

  // After a DWT the features depend on sample positions.
  const auto w = WaveletSpec::haar();
  const std::vector<double> a{1, 1, -1, -1}, b{1, -1, 1, -1};
  const auto fa = amplitude_features(dwt_level(a, w).approx);
  const auto fb = amplitude_features(dwt_level(b, w).approx);
  EXPECT_NE(fa.rms, fb.rms);
}

namespace {

RatingMatrix toy_matrix() {
  RatingMatrix::Builder b;
  for (const char* i : {"i1", "i2", "i3", "i4", "i5", "i6"}) b.add_item(i);
  b.add_rating("a", "i1", 8);
  b.add_rating("a", "i2", 3);
  b.add_rating("b", "i1", 6);
  b.add_rating("b", "i3", 9);
  b.add_rating("b", "i4", 2);
  b.add_rating("c", "i2", 5);
  b.add_rating("c", "i5", 5);
  b.add_rating("d", "i1", 8);
  b.add_rating("d", "i2", 3);
  b.add_user("e");
  return b.build();
}

}  // namespace

TEST(UserFeatures, HandComposedPipeline) {
  const auto m = toy_matrix();
  const auto ord = compute_orderings(m);
  const auto w = WaveletSpec::haar();
  const auto got = extract_user_features(m, "b", ord, w, 1);
  // Popularity order: i1 (3), i2 (3), then i3, i4, i5 (1 each), i6 (0).
  // b rated i1, i3, i4 -> rated flags [1,0,1,1,0,0] -> series [1,-1,1,0,-1,0].
  const std::vector<double> s{1, -1, 1, 0, -1, 0};
  ASSERT_EQ(ord.popularity.order, (std::vector<Index>{0, 1, 2, 3, 4, 5}));
  std::vector<double> a, d;
  oracle::dwt(s, w.low_pass, w.high_pass, a, d);
  const auto want = oracle::table3(a);
  const auto arr = got.popularity.as_array();
  for (std::size_t k = 0; k < kFeatureCount; ++k) EXPECT_NEAR(arr[k], want.v[k], 1e-12);
}

TEST(UserFeatures, EmptyProfileGivesIdenticalVectors) {
  const auto m = toy_matrix();
  const auto f = extract_user_features(m, "e", compute_orderings(m), WaveletSpec::haar(), 1);
  EXPECT_EQ(f.rating_deviation, f.popularity);
  EXPECT_EQ(f.popularity, f.novelty);
}

TEST(UserFeatures, IdenticalProfilesGiveIdenticalFeatures) {
  const auto m = toy_matrix();
  const auto ord = compute_orderings(m);
  auto fa = extract_user_features(m, "a", ord, WaveletSpec::haar(), 1);
  auto fd = extract_user_features(m, "d", ord, WaveletSpec::haar(), 1);
  fd.user = fa.user;
  EXPECT_EQ(fa, fd);
}

TEST(UserFeatures, PipelineIsDeterministic) {
  SyntheticConfig cfg;
  cfg.users = 150;
  cfg.items = 200;
  cfg.mean_activity = 10;
  const auto m = generate_synthetic(cfg);
  for (auto wl : {WaveletName::Haar, WaveletName::Db2, WaveletName::Db4}) {
    const FeatureConfig fc{wl, 2};
    const auto a = extract_all_features(m, fc);
    const auto b = extract_all_features(m, fc);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), m.num_users());
  }
}

TEST(UserFeatures, CsvLayout) {
  const auto m = toy_matrix();
  const auto f = extract_all_features(m);
  std::ostringstream out;
  write_features_csv(f, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("user_id,kind,f1,", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("a,rd,", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("a,p,", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("a,n,", 0), 0u);
}
