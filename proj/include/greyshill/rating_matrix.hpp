#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "greyshill/error.hpp"

namespace greyshill {

using Index = std::size_t;

struct Scale {
  int min = 1;
  int max = 10;

  bool contains(int r) const { return r >= min && r <= max; }
  friend bool operator==(const Scale&, const Scale&) = default;
};

// Sparse user x item store. Users and items are kept sorted by id, so an
// index comparison is an id comparison. A missing (user, item) pair means
// "unrated"; there is no rating 0 unless the scale includes it.
class RatingMatrix {
 public:
  struct Entry {
    Index item;
    int rating;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  class Builder;

  RatingMatrix() = default;

  std::size_t num_users() const { return user_ids_.size(); }
  std::size_t num_items() const { return item_ids_.size(); }
  std::size_t num_ratings() const { return num_ratings_; }
  bool empty() const { return num_ratings_ == 0; }
  Scale scale() const { return scale_; }

  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  const std::string& user_id(Index u) const { return user_ids_.at(u); }
  const std::string& item_id(Index i) const { return item_ids_.at(i); }

  std::optional<Index> find_user(std::string_view id) const { return find(user_ids_, id); }
  std::optional<Index> find_item(std::string_view id) const { return find(item_ids_, id); }

  // Ratings of user u, sorted by item index.
  std::span<const Entry> profile(Index u) const { return profiles_.at(u); }
  // Users who rated item i, sorted by user index.
  std::span<const Index> raters(Index i) const { return raters_.at(i); }

  std::optional<int> rating(Index u, Index i) const {
    const auto& p = profiles_.at(u);
    auto it = std::lower_bound(p.begin(), p.end(), i,
                               [](const Entry& e, Index item) { return e.item < item; });
    if (it == p.end() || it->item != i) return std::nullopt;
    return it->rating;
  }

  friend bool operator==(const RatingMatrix& a, const RatingMatrix& b) {
    return a.scale_ == b.scale_ && a.user_ids_ == b.user_ids_ && a.item_ids_ == b.item_ids_ &&
           a.profiles_ == b.profiles_;
  }

 private:
  static std::optional<Index> find(const std::vector<std::string>& ids, std::string_view id) {
    auto it = std::lower_bound(ids.begin(), ids.end(), id,
                               [](const std::string& a, std::string_view b) { return a < b; });
    if (it == ids.end() || *it != id) return std::nullopt;
    return static_cast<Index>(it - ids.begin());
  }

  Scale scale_{};
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::vector<std::vector<Entry>> profiles_;
  std::vector<std::vector<Index>> raters_;
  std::size_t num_ratings_ = 0;
};

// Accumulates ratings in any order. A repeated (user, item) pair keeps the
// last value added.
class RatingMatrix::Builder {
 public:
  explicit Builder(Scale scale = {}) : scale_(scale) {}

  static Builder from(const RatingMatrix& m) {
    Builder b(m.scale());
    for (const auto& id : m.user_ids()) b.add_user(id);
    for (const auto& id : m.item_ids()) b.add_item(id);
    for (Index u = 0; u < m.num_users(); ++u)
      for (const auto& e : m.profile(u)) b.add_rating(u, e.item, e.rating);
    return b;
  }

  Index add_user(const std::string& id) { return slot(users_, user_ids_, id); }
  Index add_item(const std::string& id) { return slot(items_, item_ids_, id); }

  void add_rating(const std::string& user, const std::string& item, int rating) {
    add_rating(add_user(user), add_item(item), rating);
  }

  // Slots are the values returned by add_user / add_item.
  void add_rating(Index user_slot, Index item_slot, int rating) {
    if (!scale_.contains(rating))
      throw DataError("rating out of scale: " + std::to_string(rating) + " not in [" +
                      std::to_string(scale_.min) + ", " + std::to_string(scale_.max) + "]");
    triples_.push_back({user_slot, item_slot, rating});
  }

  RatingMatrix build() const {
    RatingMatrix m;
    m.scale_ = scale_;
    const auto user_map = sorted_ids(user_ids_, m.user_ids_);
    const auto item_map = sorted_ids(item_ids_, m.item_ids_);
    m.profiles_.assign(m.user_ids_.size(), {});
    m.raters_.assign(m.item_ids_.size(), {});

    // (user, item, sequence) so that the last occurrence of a pair wins.
    std::vector<std::tuple<Index, Index, std::size_t>> keyed;
    keyed.reserve(triples_.size());
    for (std::size_t s = 0; s < triples_.size(); ++s)
      keyed.emplace_back(user_map[triples_[s].user], item_map[triples_[s].item], s);
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t k = 0; k < keyed.size(); ++k) {
      const auto [u, i, s] = keyed[k];
      if (k + 1 < keyed.size() && std::get<0>(keyed[k + 1]) == u && std::get<1>(keyed[k + 1]) == i)
        continue;
      m.profiles_[u].push_back({i, triples_[s].rating});
      m.raters_[i].push_back(u);
      ++m.num_ratings_;
    }
    return m;
  }

 private:
  struct Triple {
    Index user;
    Index item;
    int rating;
  };

  static Index slot(std::unordered_map<std::string, Index>& map, std::vector<std::string>& ids,
                    const std::string& id) {
    auto [it, inserted] = map.try_emplace(id, ids.size());
    if (inserted) ids.push_back(id);
    return it->second;
  }

  // Sorts ids into `out` and returns slot -> sorted index.
  static std::vector<Index> sorted_ids(const std::vector<std::string>& ids,
                                       std::vector<std::string>& out) {
    std::vector<Index> perm(ids.size());
    for (Index k = 0; k < perm.size(); ++k) perm[k] = k;
    std::sort(perm.begin(), perm.end(), [&](Index a, Index b) { return ids[a] < ids[b]; });
    std::vector<Index> map(ids.size());
    out.clear();
    out.reserve(ids.size());
    for (Index k = 0; k < perm.size(); ++k) {
      map[perm[k]] = k;
      out.push_back(ids[perm[k]]);
    }
    return map;
  }

  Scale scale_;
  std::unordered_map<std::string, Index> users_;
  std::unordered_map<std::string, Index> items_;
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::vector<Triple> triples_;
};

struct ItemStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population
  std::vector<std::size_t> count;
  double system_mean = 0;
  double system_std = 0;
};

// Items without raters fall back to the system mean and std so that attack
// generators can draw for any item.
inline ItemStats compute_item_stats(const RatingMatrix& m) {
  ItemStats s;
  const std::size_t n_items = m.num_items();
  s.mean.assign(n_items, 0.0);
  s.stddev.assign(n_items, 0.0);
  s.count.assign(n_items, 0);

  std::vector<double> sum(n_items, 0.0);
  double total = 0;
  for (Index u = 0; u < m.num_users(); ++u) {
    for (const auto& e : m.profile(u)) {
      sum[e.item] += e.rating;
      ++s.count[e.item];
      total += e.rating;
    }
  }
  const auto n = static_cast<double>(m.num_ratings());
  s.system_mean = n > 0 ? total / n : 0.0;

  std::vector<double> sq(n_items, 0.0);
  double total_sq = 0;
  for (Index i = 0; i < n_items; ++i)
    if (s.count[i] > 0) s.mean[i] = sum[i] / static_cast<double>(s.count[i]);
  for (Index u = 0; u < m.num_users(); ++u) {
    for (const auto& e : m.profile(u)) {
      const double d = e.rating - s.mean[e.item];
      sq[e.item] += d * d;
      const double g = e.rating - s.system_mean;
      total_sq += g * g;
    }
  }
  s.system_std = n > 0 ? std::sqrt(total_sq / n) : 0.0;
  for (Index i = 0; i < n_items; ++i) {
    if (s.count[i] > 0) {
      s.stddev[i] = std::sqrt(sq[i] / static_cast<double>(s.count[i]));
    } else {
      s.mean[i] = s.system_mean;
      s.stddev[i] = s.system_std;
    }
  }
  return s;
}

struct UserLabelSet {
  std::set<std::string> genuine;
  std::set<std::string> attackers;

  bool is_attacker(const std::string& id) const { return attackers.contains(id); }
};

}  // namespace greyshill
