#pragma once

#include <cmath>
#include <set>
#include <span>
#include <string>
#include <utility>

#include "greyshill/error.hpp"

namespace greyshill {

using UserSet = std::set<std::string>;

inline std::size_t intersection_size(const UserSet& a, const UserSet& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  std::size_t n = 0;
  for (const auto& x : small) n += large.contains(x);
  return n;
}

// |D ∩ A| / |A|
inline double detection_rate(const UserSet& detected, const UserSet& attackers) {
  if (attackers.empty()) throw DataError("detection rate needs a non-empty attacker set");
  return static_cast<double>(intersection_size(detected, attackers)) /
         static_cast<double>(attackers.size());
}

// |D ∩ G| / |G|
inline double false_alarm_rate(const UserSet& detected, const UserSet& genuine) {
  if (genuine.empty()) throw DataError("false alarm rate needs a non-empty genuine set");
  return static_cast<double>(intersection_size(detected, genuine)) /
         static_cast<double>(genuine.size());
}

struct RatingPair {
  double actual = 0;
  double predicted = 0;
};

inline double mae(std::span<const RatingPair> pairs) {
  if (pairs.empty()) throw DataError("MAE of an empty set");
  double s = 0;
  for (const auto& p : pairs) s += std::abs(p.actual - p.predicted);
  return s / static_cast<double>(pairs.size());
}

inline double rmse(std::span<const RatingPair> pairs) {
  if (pairs.empty()) throw DataError("RMSE of an empty set");
  double s = 0;
  for (const auto& p : pairs) s += (p.actual - p.predicted) * (p.actual - p.predicted);
  return std::sqrt(s / static_cast<double>(pairs.size()));
}

}  // namespace greyshill
