#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "greyshill/error.hpp"
#include "greyshill/random.hpp"
#include "greyshill/rating_matrix.hpp"

namespace greyshill {

// Uniform sample of n users without replacement. The item universe of the
// result is the set of items rated by at least one sampled user.
inline RatingMatrix sample_genuine(const RatingMatrix& m, std::size_t n, std::uint64_t seed) {
  if (n > m.num_users())
    throw DataError("cannot sample " + std::to_string(n) + " users from " +
                    std::to_string(m.num_users()));
  std::vector<Index> users(m.num_users());
  std::iota(users.begin(), users.end(), Index{0});
  Rng rng(derive_seed(seed, "sample_genuine"));
  std::shuffle(users.begin(), users.end(), rng);
  users.resize(n);
  std::sort(users.begin(), users.end());

  RatingMatrix::Builder b(m.scale());
  for (Index u : users) {
    const Index slot = b.add_user(m.user_id(u));
    for (const auto& e : m.profile(u)) b.add_rating(slot, b.add_item(m.item_id(e.item)), e.rating);
  }
  return b.build();
}

// Parameters of a synthetic population used when no public dump is at hand.
// Item popularity is Zipfian, user activity log-normal, and ratings follow a
// biased low-rank model rounded onto the integer scale.
struct SyntheticConfig {
  std::size_t users = 2000;
  std::size_t items = 4000;
  double mean_activity = 30.0;
  double activity_sigma = 0.6;
  double zipf_exponent = 1.0;
  std::size_t latent_factors = 3;
  double factor_sd = 0.6;
  double global_mean = 6.5;
  double user_bias_sd = 1.0;
  double item_bias_sd = 1.0;
  double noise_sd = 1.0;
  Scale scale{1, 10};
  std::uint64_t seed = 1;
};

inline std::string synthetic_id(char prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%06zu", prefix, k);
  return buf;
}

inline RatingMatrix generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.users == 0 || cfg.items == 0) throw DataError("synthetic population must be non-empty");
  Rng rng(derive_seed(cfg.seed, "synthetic"));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // Popularity rank is shuffled over ids so that id order carries no signal.
  std::vector<std::size_t> rank(cfg.items);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::shuffle(rank.begin(), rank.end(), rng);
  std::vector<double> log_weight(cfg.items);
  for (std::size_t i = 0; i < cfg.items; ++i)
    log_weight[i] = -cfg.zipf_exponent * std::log(static_cast<double>(rank[i] + 1));

  const std::size_t f = cfg.latent_factors;
  std::vector<double> item_bias(cfg.items), item_factor(cfg.items * f);
  for (std::size_t i = 0; i < cfg.items; ++i) {
    item_bias[i] = cfg.item_bias_sd * unit(rng);
    for (std::size_t k = 0; k < f; ++k) item_factor[i * f + k] = cfg.factor_sd * unit(rng);
  }

  const double mu = std::log(cfg.mean_activity) - 0.5 * cfg.activity_sigma * cfg.activity_sigma;
  std::lognormal_distribution<double> activity(mu, cfg.activity_sigma);
  const auto max_activity = std::max<std::size_t>(1, cfg.items / 4);

  RatingMatrix::Builder b(cfg.scale);
  std::vector<std::pair<double, std::size_t>> keys(cfg.items);
  std::vector<double> user_factor(f);
  for (std::size_t u = 0; u < cfg.users; ++u) {
    const Index slot = b.add_user(synthetic_id('u', u));
    const double user_bias = cfg.user_bias_sd * unit(rng);
    for (auto& x : user_factor) x = cfg.factor_sd * unit(rng);
    const auto n = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(activity(rng))), 1, max_activity);

    // Weighted sampling without replacement (exponential keys).
    for (std::size_t i = 0; i < cfg.items; ++i) {
      const double e = -std::log(1.0 - uniform(rng));
      keys[i] = {std::log(e) - log_weight[i], i};
    }
    std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n), keys.end());
    std::sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = keys[k].second;
      double r = cfg.global_mean + user_bias + item_bias[i] + cfg.noise_sd * unit(rng);
      for (std::size_t d = 0; d < f; ++d) r += user_factor[d] * item_factor[i * f + d];
      const int rating = std::clamp(static_cast<int>(std::lround(r)), cfg.scale.min, cfg.scale.max);
      b.add_rating(slot, b.add_item(synthetic_id('i', i)), rating);
    }
  }
  return b.build();
}

}  // namespace greyshill
