#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "greyshill/dataset.hpp"
#include "greyshill/io.hpp"
#include "greyshill/rating_matrix.hpp"
#include "oracles.hpp"

using namespace greyshill;

namespace {

RatingMatrix from_csv(const std::string& text) {
  std::istringstream in(text);
  return load_ratings(in, RatingFormat::GenericCsv);
}

RatingMatrix random_matrix(std::mt19937& rng, std::size_t users, std::size_t items, double density) {
  RatingMatrix::Builder b;
  std::bernoulli_distribution coin(density);
  std::uniform_int_distribution<int> rating(1, 10);
  for (std::size_t u = 0; u < users; ++u)
    for (std::size_t i = 0; i < items; ++i)
      if (coin(rng)) b.add_rating(synthetic_id('u', u), synthetic_id('i', i), rating(rng));
  return b.build();
}

}  // namespace

TEST(LoadRatings, SingleGenericRow) {
  const auto m = from_csv("user_id,item_id,rating\nu1,i1,7\n");
  EXPECT_EQ(m.num_users(), 1u);
  EXPECT_EQ(m.num_items(), 1u);
  EXPECT_EQ(m.rating(0, 0), 7);
}

TEST(LoadRatings, OutOfScaleRatingIsRejected) {
  try {
    from_csv("user_id,item_id,rating\nu1,i1,12\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("rating out of scale"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadRatings, MalformedRowNamesLine) {
  try {
    from_csv("user_id,item_id,rating\nu1,i1,3\nu2,i2\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(from_csv("user_id,item_id,rating\nu1,i1,abc\n"), DataError);
}

TEST(LoadRatings, EmptyFileIsAnError) {
  EXPECT_THROW(from_csv(""), DataError);
}

TEST(LoadRatings, DuplicatePairKeepsLastOccurrence) {
  const auto m = from_csv("user_id,item_id,rating\nu1,i1,3\nu1,i2,4\nu1,i1,9\n");
  EXPECT_EQ(m.num_ratings(), 2u);
  EXPECT_EQ(m.rating(0, *m.find_item("i1")), 9);
}

TEST(LoadRatings, BookCrossingDropsImplicitZeros) {
  std::istringstream in(
      "\"User-ID\";\"ISBN\";\"Book-Rating\"\n"
      "\"276725\";\"034545104X\";\"0\"\n"
      "\"276726\";\"0155061224\";\"5\"\n"
      "\"276727\";\"0446520802\";\"10\"\n"
      "\"276729\";\"052165615X\";\"3\"\n");
  const auto m = load_ratings(in, RatingFormat::BookCrossing);
  EXPECT_EQ(m.num_ratings(), 3u);
  EXPECT_FALSE(m.find_user("276725"));
  EXPECT_EQ(m.rating(*m.find_user("276727"), *m.find_item("0446520802")), 10);
}

TEST(LoadRatings, HetRecHalfStarsAreDoubled) {
  std::istringstream in(
      "userID\tmovieID\trating\tdate_day\tdate_month\tdate_year\n"
      "75\t3\t1\t29\t10\t2006\n"
      "75\t32\t4.5\t29\t10\t2006\n"
      "78\t110\t0.5\t1\t1\t2007\n"
      "78\t160\t5\t1\t1\t2007\n");
  const auto m = load_ratings(in, RatingFormat::HetRec);
  EXPECT_EQ(m.rating(*m.find_user("75"), *m.find_item("3")), 2);
  EXPECT_EQ(m.rating(*m.find_user("75"), *m.find_item("32")), 9);
  EXPECT_EQ(m.rating(*m.find_user("78"), *m.find_item("110")), 1);
  EXPECT_EQ(m.rating(*m.find_user("78"), *m.find_item("160")), 10);
}

TEST(LoadRatings, GenericCsvRoundTrip) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_matrix(rng, 1 + rng() % 30, 1 + rng() % 30, 0.3);
    std::stringstream buf;
    write_ratings_csv(m, buf);
    const auto back = load_ratings(buf, RatingFormat::GenericCsv);
    // Only users and items with ratings survive a round trip.
    RatingMatrix::Builder b;
    for (Index u = 0; u < m.num_users(); ++u)
      for (const auto& e : m.profile(u)) b.add_rating(m.user_id(u), m.item_id(e.item), e.rating);
    EXPECT_EQ(back, b.build());
  }
}

TEST(ItemStats, HandComputedValues) {
  const auto m = from_csv("user_id,item_id,rating\na,x,2\nb,x,4\nc,x,6\na,y,5\n");
  const auto s = compute_item_stats(m);
  const Index x = *m.find_item("x"), y = *m.find_item("y");
  EXPECT_DOUBLE_EQ(s.mean[x], 4.0);
  EXPECT_NEAR(s.stddev[x], std::sqrt(8.0 / 3.0), 1e-12);
  EXPECT_NEAR(s.stddev[x], 1.63299, 1e-5);
  EXPECT_DOUBLE_EQ(s.mean[y], 5.0);
  EXPECT_DOUBLE_EQ(s.stddev[y], 0.0);
  EXPECT_EQ(s.count[x], 3u);
}

TEST(ItemStats, SystemMeanOfTwoRatings) {
  const auto m = from_csv("user_id,item_id,rating\na,x,1\nb,y,10\n");
  EXPECT_DOUBLE_EQ(compute_item_stats(m).system_mean, 5.5);
}

TEST(ItemStats, UnratedItemFallsBackToSystemStatistics) {
  RatingMatrix::Builder b;
  b.add_item("lonely");
  b.add_rating("a", "x", 2);
  b.add_rating("b", "x", 8);
  const auto m = b.build();
  const auto s = compute_item_stats(m);
  const Index l = *m.find_item("lonely");
  EXPECT_EQ(s.count[l], 0u);
  EXPECT_DOUBLE_EQ(s.mean[l], s.system_mean);
  EXPECT_DOUBLE_EQ(s.stddev[l], s.system_std);
}

TEST(ItemStats, AgreesWithTwoPassOracle) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_matrix(rng, 1 + rng() % 50, 1 + rng() % 50, 0.25);
    if (m.empty()) continue;
    const auto s = compute_item_stats(m);
    std::map<Index, std::vector<int>> per_item;
    std::vector<int> all;
    for (Index u = 0; u < m.num_users(); ++u)
      for (const auto& e : m.profile(u)) {
        per_item[e.item].push_back(e.rating);
        all.push_back(e.rating);
      }
    for (const auto& [i, v] : per_item) {
      const auto [mean, sd] = oracle::mean_std(v);
      EXPECT_NEAR(s.mean[i], mean, 1e-12);
      EXPECT_NEAR(s.stddev[i], sd, 1e-12);
      EXPECT_EQ(s.count[i], v.size());
    }
    const auto [gm, gs] = oracle::mean_std(all);
    EXPECT_NEAR(s.system_mean, gm, 1e-12);
    EXPECT_NEAR(s.system_std, gs, 1e-12);
  }
}

TEST(SampleGenuine, FullSampleKeepsEveryUser) {
  std::mt19937 rng(3);
  const auto m = random_matrix(rng, 40, 30, 0.2);
  const auto s = sample_genuine(m, m.num_users(), 99);
  EXPECT_EQ(s.user_ids(), m.user_ids());
}

TEST(SampleGenuine, DeterministicPerSeed) {
  std::mt19937 rng(3);
  const auto m = random_matrix(rng, 40, 30, 0.2);
  EXPECT_EQ(sample_genuine(m, 3, 7), sample_genuine(m, 3, 7));
  EXPECT_EQ(sample_genuine(m, 3, 7).num_users(), 3u);
}

TEST(SampleGenuine, TooManyUsersIsAnError) {
  std::mt19937 rng(3);
  const auto m = random_matrix(rng, 10, 10, 0.5);
  EXPECT_THROW(sample_genuine(m, 11, 1), DataError);
}

TEST(SampleGenuine, ItemUniverseRestrictedToSampledRatings) {
  SyntheticConfig cfg;
  cfg.users = 300;
  cfg.items = 500;
  cfg.mean_activity = 5;
  const auto pop = generate_synthetic(cfg);
  const auto s = sample_genuine(pop, 20, 4);
  for (Index i = 0; i < s.num_items(); ++i) EXPECT_FALSE(s.raters(i).empty());
  EXPECT_LT(s.num_items(), pop.num_items());
}

TEST(SampleGenuine, DifferentSeedsGiveDifferentSamples) {
  SyntheticConfig cfg;
  cfg.users = 120;
  cfg.items = 200;
  const auto pop = generate_synthetic(cfg);
  int differ = 0;
  for (std::uint64_t s = 0; s < 100; ++s)
    differ += sample_genuine(pop, 60, 2 * s).user_ids() != sample_genuine(pop, 60, 2 * s + 1).user_ids();
  EXPECT_GE(differ, 99);
}

TEST(Labels, RoundTrip) {
  UserLabelSet l;
  l.genuine = {"a", "c"};
  l.attackers = {"attacker#000000", "b"};
  std::stringstream buf;
  write_labels_csv(l, buf);
  const auto back = load_labels(buf);
  EXPECT_EQ(back.genuine, l.genuine);
  EXPECT_EQ(back.attackers, l.attackers);
}
