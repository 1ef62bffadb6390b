#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "greyshill/error.hpp"
#include "greyshill/random.hpp"
#include "greyshill/rating_matrix.hpp"

namespace greyshill {

enum class AttackModel {
  AOP,
  Random,
  Average,
  BandwagonAverage,
  BandwagonRandom,
  Segment,
  ReverseBandwagon,
  LoveHate,
};

inline constexpr std::array<AttackModel, 8> kAllAttackModels = {
    AttackModel::AOP,     AttackModel::Random,          AttackModel::Average,
    AttackModel::BandwagonAverage, AttackModel::BandwagonRandom, AttackModel::Segment,
    AttackModel::ReverseBandwagon, AttackModel::LoveHate,
};

enum class Intent { Push, Nuke, Grey };

inline std::string to_string(AttackModel m) {
  switch (m) {
    case AttackModel::AOP: return "aop";
    case AttackModel::Random: return "random";
    case AttackModel::Average: return "average";
    case AttackModel::BandwagonAverage: return "bandwagon-average";
    case AttackModel::BandwagonRandom: return "bandwagon-random";
    case AttackModel::Segment: return "segment";
    case AttackModel::ReverseBandwagon: return "reverse-bandwagon";
    case AttackModel::LoveHate: return "love-hate";
  }
  return "?";
}

inline std::string to_string(Intent i) {
  switch (i) {
    case Intent::Push: return "push";
    case Intent::Nuke: return "nuke";
    case Intent::Grey: return "grey";
  }
  return "?";
}

namespace detail {
inline std::string squash(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}
}  // namespace detail

// Accepts "bandwagon-average", "BandwagonAverage", "bandwagon_average", ...
inline AttackModel parse_attack_model(std::string_view s) {
  const auto key = detail::squash(s);
  for (auto m : kAllAttackModels)
    if (detail::squash(to_string(m)) == key) return m;
  throw std::invalid_argument("unknown attack model: " + std::string(s));
}

inline Intent parse_intent(std::string_view s) {
  const auto key = detail::squash(s);
  if (key == "push") return Intent::Push;
  if (key == "nuke") return Intent::Nuke;
  if (key == "grey" || key == "gray") return Intent::Grey;
  throw std::invalid_argument("unknown intent: " + std::string(s));
}

struct AttackSpec {
  AttackModel model = AttackModel::Average;
  Intent intent = Intent::Nuke;
  std::optional<int> grey_rating;
  double attack_size = 0.1;
  double filler_size = 0.05;
  std::optional<double> aop_top_fraction;  // AOP only
  std::uint64_t seed = 0;

  std::size_t popular_threshold = 200;  // "popular" means strictly more raters
  std::size_t bandwagon_items = 10;
  std::size_t segment_items = 5;
  std::size_t reverse_bandwagon_items = 10;

  void validate(Scale scale) const {
    if (!(attack_size > 0)) throw DataError("attack size must be positive");
    if (!(filler_size > 0 && filler_size <= 1)) throw DataError("filler size must be in (0, 1]");
    if (intent == Intent::Grey) {
      if (!grey_rating) throw DataError("grey intent requires a grey rating");
      if (!scale.contains(*grey_rating)) throw DataError("grey rating outside the rating scale");
    }
    if (model == AttackModel::AOP) {
      if (!aop_top_fraction) throw DataError("AOP attack requires aop_top_fraction");
      if (!(*aop_top_fraction > 0 && *aop_top_fraction <= 1))
        throw DataError("aop_top_fraction must be in (0, 1]");
    } else if (aop_top_fraction) {
      throw DataError("aop_top_fraction is only valid for the AOP model");
    }
  }
};

// Item indices are relative to the matrix the profile was built against.
struct AttackProfile {
  Index target = 0;
  int target_rating = 0;
  std::vector<std::pair<Index, int>> selected;
  std::vector<std::pair<Index, int>> filler;
};

enum class SpecialItems { Popular, Segment, Unpopular };

// Items ordered by rater count descending, ties by id ascending.
inline std::vector<Index> items_by_popularity(const ItemStats& stats) {
  std::vector<Index> order(stats.count.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return stats.count[a] > stats.count[b]; });
  return order;
}

inline std::vector<Index> select_special_items(const ItemStats& stats, SpecialItems kind,
                                               std::size_t count, Rng& rng,
                                               std::size_t popular_threshold = 200,
                                               std::span<const Index> exclude = {}) {
  auto excluded = [&](Index i) { return std::find(exclude.begin(), exclude.end(), i) != exclude.end(); };
  std::vector<Index> pool;
  if (kind == SpecialItems::Segment) {
    for (Index i : items_by_popularity(stats))
      if (!excluded(i)) pool.push_back(i);
    if (pool.size() < count)
      throw DataError("segment pool has " + std::to_string(pool.size()) + " items, need " +
                      std::to_string(count));
    pool.resize(count);
    return pool;
  }
  for (Index i = 0; i < stats.count.size(); ++i) {
    if (excluded(i)) continue;
    const bool ok = kind == SpecialItems::Popular ? stats.count[i] > popular_threshold
                                                  : stats.count[i] == 1;
    if (ok) pool.push_back(i);
  }
  if (pool.size() < count)
    throw DataError(std::string(kind == SpecialItems::Popular ? "popular" : "unpopular") +
                    " item pool has " + std::to_string(pool.size()) + " items, need " +
                    std::to_string(count));
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline std::vector<Index> select_special_items(const ItemStats& stats, SpecialItems kind,
                                               std::size_t count, std::uint64_t seed,
                                               std::size_t popular_threshold = 200) {
  Rng rng(seed);
  return select_special_items(stats, kind, count, rng, popular_threshold);
}

namespace detail {

inline int gaussian_rating(Rng& rng, double mean, double sd, Scale scale) {
  double x = mean;
  if (sd > 0) x = std::normal_distribution<double>(mean, sd)(rng);
  return std::clamp(static_cast<int>(std::lround(x)), scale.min, scale.max);
}

}  // namespace detail

inline std::size_t filler_count(const AttackSpec& spec, std::size_t n_items) {
  return static_cast<std::size_t>(std::lround(spec.filler_size * static_cast<double>(n_items)));
}

// Builds one profile following the row of the attack-scheme table for
// spec.model. Grey attacks reuse the nuke pattern for selected and filler
// items; only the target rating differs.
inline AttackProfile build_attack_profile(const AttackSpec& spec, const RatingMatrix& m,
                                          const ItemStats& stats, Index target, Rng& rng) {
  const Scale scale = m.scale();
  if (target >= m.num_items()) throw DataError("target item not in the item universe");

  AttackProfile p;
  p.target = target;
  p.target_rating = spec.intent == Intent::Push   ? scale.max
                    : spec.intent == Intent::Nuke ? scale.min
                                                  : spec.grey_rating.value();
  const bool push = spec.intent == Intent::Push;
  const int direction = push ? scale.max : scale.min;
  const int opposite = push ? scale.min : scale.max;

  const std::array<Index, 1> target_only{target};
  std::vector<Index> selected;
  int selected_rating = direction;
  switch (spec.model) {
    case AttackModel::BandwagonAverage:
    case AttackModel::BandwagonRandom:
      selected = select_special_items(stats, SpecialItems::Popular, spec.bandwagon_items, rng,
                                      spec.popular_threshold, target_only);
      break;
    case AttackModel::Segment:
      selected = select_special_items(stats, SpecialItems::Segment, spec.segment_items, rng,
                                      spec.popular_threshold, target_only);
      break;
    case AttackModel::ReverseBandwagon:
      // Unpopular items take the rating opposite to the attack direction.
      selected = select_special_items(stats, SpecialItems::Unpopular, spec.reverse_bandwagon_items,
                                      rng, spec.popular_threshold, target_only);
      selected_rating = opposite;
      break;
    default:
      break;
  }
  for (Index i : selected) p.selected.emplace_back(i, selected_rating);

  std::vector<char> taken(m.num_items(), 0);
  taken[target] = 1;
  for (Index i : selected) taken[i] = 1;

  std::vector<Index> pool;
  if (spec.model == AttackModel::AOP) {
    const auto top = static_cast<std::size_t>(
        std::ceil(spec.aop_top_fraction.value() * static_cast<double>(m.num_items())));
    for (Index i : items_by_popularity(stats)) {
      if (pool.size() == top) break;
      if (!taken[i]) pool.push_back(i);
    }
  } else {
    for (Index i = 0; i < m.num_items(); ++i)
      if (!taken[i]) pool.push_back(i);
  }
  const std::size_t n_filler = filler_count(spec, m.num_items());
  if (pool.size() < n_filler)
    throw DataError("filler pool exhausted: need " + std::to_string(n_filler) + " items, have " +
                    std::to_string(pool.size()));
  // Partial Fisher-Yates: first n_filler entries become a uniform draw.
  for (std::size_t k = 0; k < n_filler; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
    std::swap(pool[k], pool[pick(rng)]);
  }
  pool.resize(n_filler);
  std::sort(pool.begin(), pool.end());

  for (Index i : pool) {
    int r = 0;
    switch (spec.model) {
      case AttackModel::AOP:
      case AttackModel::Average:
      case AttackModel::BandwagonAverage:
        r = detail::gaussian_rating(rng, stats.mean[i], stats.stddev[i], scale);
        break;
      case AttackModel::Random:
      case AttackModel::BandwagonRandom:
      case AttackModel::ReverseBandwagon:
        r = detail::gaussian_rating(rng, stats.system_mean, stats.system_std, scale);
        break;
      case AttackModel::Segment:
      case AttackModel::LoveHate:
        r = opposite;
        break;
    }
    p.filler.emplace_back(i, r);
  }
  return p;
}

inline constexpr std::string_view kAttackerPrefix = "attacker#";

inline std::string attacker_id(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", k);
  return std::string(kAttackerPrefix) + buf;
}

inline std::size_t attacker_count(const AttackSpec& spec, std::size_t genuine_users) {
  return static_cast<std::size_t>(
      std::lround(spec.attack_size * static_cast<double>(genuine_users)));
}

struct InjectionResult {
  RatingMatrix matrix;
  UserLabelSet labels;
  std::string target;
  std::vector<AttackProfile> profiles;  // indices relative to the genuine matrix
};

// Adds round(attack_size * |users|) profiles that share one uniformly drawn
// target. Each profile draws from its own substream derived from
// (seed, attacker index).
inline InjectionResult inject_attacks(const RatingMatrix& genuine, const AttackSpec& spec) {
  if (genuine.num_users() == 0 || genuine.num_items() == 0)
    throw DataError("genuine matrix is empty");
  spec.validate(genuine.scale());
  const std::size_t n_attackers = attacker_count(spec, genuine.num_users());
  if (n_attackers == 0) throw DataError("attack size yields zero attackers");
  for (const auto& id : genuine.user_ids())
    if (id.starts_with(kAttackerPrefix))
      throw DataError("genuine user id uses the reserved attacker prefix: " + id);

  const ItemStats stats = compute_item_stats(genuine);
  Rng target_rng(derive_seed(spec.seed, "target"));
  const Index target =
      std::uniform_int_distribution<Index>(0, genuine.num_items() - 1)(target_rng);

  InjectionResult out;
  out.target = genuine.item_id(target);
  out.profiles.reserve(n_attackers);
  for (std::size_t a = 0; a < n_attackers; ++a) {
    Rng rng(derive_seed(spec.seed, "profile", a));
    out.profiles.push_back(build_attack_profile(spec, genuine, stats, target, rng));
  }

  auto b = RatingMatrix::Builder::from(genuine);
  for (std::size_t a = 0; a < n_attackers; ++a) {
    const auto& p = out.profiles[a];
    const auto id = attacker_id(a);
    const Index slot = b.add_user(id);
    b.add_rating(slot, b.add_item(genuine.item_id(p.target)), p.target_rating);
    for (const auto& [i, r] : p.selected) b.add_rating(slot, b.add_item(genuine.item_id(i)), r);
    for (const auto& [i, r] : p.filler) b.add_rating(slot, b.add_item(genuine.item_id(i)), r);
    out.labels.attackers.insert(id);
  }
  out.labels.genuine.insert(genuine.user_ids().begin(), genuine.user_ids().end());
  out.matrix = b.build();
  return out;
}

}  // namespace greyshill
