#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "greyshill/error.hpp"
#include "greyshill/rating_matrix.hpp"

namespace greyshill {

enum class SeriesKind { RatingDeviation, Novelty, Popularity };

inline std::string to_string(SeriesKind k) {
  switch (k) {
    case SeriesKind::RatingDeviation: return "rd";
    case SeriesKind::Novelty: return "n";
    case SeriesKind::Popularity: return "p";
  }
  return "?";
}

// Items sorted by descending score; ties by id ascending (= index ascending).
struct ItemOrdering {
  SeriesKind kind{};
  std::vector<double> score;  // per item index
  std::vector<Index> order;   // position -> item
  std::vector<Index> rank;    // item -> position
};

inline ItemOrdering make_ordering(SeriesKind kind, std::vector<double> score) {
  ItemOrdering o;
  o.kind = kind;
  o.order.resize(score.size());
  std::iota(o.order.begin(), o.order.end(), Index{0});
  std::stable_sort(o.order.begin(), o.order.end(),
                   [&](Index a, Index b) { return score[a] > score[b]; });
  o.rank.resize(score.size());
  for (Index pos = 0; pos < o.order.size(); ++pos) o.rank[o.order[pos]] = pos;
  o.score = std::move(score);
  return o;
}

// Mean absolute deviation of an item's ratings from the item mean.
inline ItemOrdering compute_rdoi(const RatingMatrix& m, const ItemStats& stats) {
  std::vector<double> score(m.num_items(), 0.0);
  for (Index u = 0; u < m.num_users(); ++u)
    for (const auto& e : m.profile(u)) score[e.item] += std::abs(e.rating - stats.mean[e.item]);
  for (Index i = 0; i < m.num_items(); ++i) {
    const auto n = m.raters(i).size();
    if (n > 0) score[i] /= static_cast<double>(n);
  }
  return make_ordering(SeriesKind::RatingDeviation, std::move(score));
}

// Jaccard coefficient of the two items' rater sets; 0 when both are empty.
inline double jaccard_similarity(const RatingMatrix& m, Index i, Index j) {
  const auto a = m.raters(i);
  const auto b = m.raters(j);
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  auto x = a.begin();
  auto y = b.begin();
  while (x != a.end() && y != b.end()) {
    if (*x < *y) {
      ++x;
    } else if (*y < *x) {
      ++y;
    } else {
      ++common;
      ++x;
      ++y;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

// NoI_{u,i} is the mean dissimilarity (1 - Jaccard) between i and the other
// items of u's profile, 0 for single-item profiles. NoI_i averages it over
// the raters of i. Cost is sum over users of |profile|^2.
inline ItemOrdering compute_noi(const RatingMatrix& m) {
  const std::size_t n_items = m.num_items();
  std::vector<double> score(n_items, 0.0);
  std::vector<std::uint32_t> cooc(n_items, 0);
  for (Index i = 0; i < n_items; ++i) {
    const auto raters = m.raters(i);
    if (raters.empty()) continue;
    for (Index u : raters)
      for (const auto& e : m.profile(u)) ++cooc[e.item];
    const double n_i = static_cast<double>(raters.size());
    double total = 0;
    for (Index u : raters) {
      const auto prof = m.profile(u);
      if (prof.size() < 2) continue;
      double sim = 0;
      for (const auto& e : prof) {
        if (e.item == i) continue;
        const double c = cooc[e.item];
        sim += c / (n_i + static_cast<double>(m.raters(e.item).size()) - c);
      }
      total += 1.0 - sim / static_cast<double>(prof.size() - 1);
    }
    score[i] = total / n_i;
    for (Index u : raters)
      for (const auto& e : m.profile(u)) cooc[e.item] = 0;
  }
  return make_ordering(SeriesKind::Novelty, std::move(score));
}

inline ItemOrdering compute_poi(const ItemStats& stats) {
  std::vector<double> score(stats.count.begin(), stats.count.end());
  return make_ordering(SeriesKind::Popularity, std::move(score));
}

struct SeriesOrderings {
  ItemOrdering rating_deviation;
  ItemOrdering novelty;
  ItemOrdering popularity;
};

inline SeriesOrderings compute_orderings(const RatingMatrix& m) {
  const auto stats = compute_item_stats(m);
  return {compute_rdoi(m, stats), compute_noi(m), compute_poi(stats)};
}

struct RatingSeries {
  std::string user;
  SeriesKind kind{};
  std::vector<std::int8_t> values;
};

// Walks the ordering: +1 for a rated item unless the previous value was +1,
// -1 for an unrated item unless the previous value was -1, otherwise 0.
inline std::vector<std::int8_t> series_values(const RatingMatrix& m, Index u,
                                              const ItemOrdering& ord) {
  std::vector<char> rated(ord.order.size(), 0);
  for (const auto& e : m.profile(u)) rated[ord.rank[e.item]] = 1;
  std::vector<std::int8_t> v(rated.size());
  std::int8_t prev = 0;
  for (std::size_t t = 0; t < rated.size(); ++t) {
    const std::int8_t want = rated[t] ? 1 : -1;
    v[t] = (t == 0 || prev != want) ? want : 0;
    prev = v[t];
  }
  return v;
}

inline RatingSeries build_series(const RatingMatrix& m, const std::string& user,
                                 const ItemOrdering& ord) {
  const auto u = m.find_user(user);
  if (!u) throw DataError("unknown user: " + user);
  return {user, ord.kind, series_values(m, *u, ord)};
}

}  // namespace greyshill
