#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "greyshill/error.hpp"
#include "greyshill/rating_matrix.hpp"

namespace greyshill {

struct KnnConfig {
  std::size_t k = 20;
  std::size_t min_overlap = 2;  // co-rated items needed for a correlation
};

// User-based kNN with Pearson correlation over co-rated items:
//   r(u,i) = mean(u) + sum_v w(u,v) (r(v,i) - mean(v)) / sum_v w(u,v)
// over the k most positively correlated users who rated i. Falls back to the
// item mean, then the user mean, then the system mean. Results are clamped to
// the rating scale.
class KnnPredictor {
 public:
  explicit KnnPredictor(const RatingMatrix& m, KnnConfig cfg = {})
      : m_(m), cfg_(cfg), user_mean_(m.num_users(), 0.0), dense_(m.num_items(), kUnrated) {
    double total = 0;
    for (Index u = 0; u < m.num_users(); ++u) {
      double s = 0;
      for (const auto& e : m.profile(u)) s += e.rating;
      total += s;
      if (!m.profile(u).empty()) user_mean_[u] = s / static_cast<double>(m.profile(u).size());
    }
    system_mean_ = m.num_ratings() ? total / static_cast<double>(m.num_ratings()) : 0.0;
  }

  // item may be absent from the matrix (e.g. every rating of it held out).
  double predict(Index u, std::optional<Index> item) {
    if (u >= m_.num_users()) throw DataError("unknown user index");
    if (u != cached_user_) load_user(u);
    return clamp(raw_prediction(u, item));
  }

  double predict(const std::string& user, const std::string& item) {
    const auto u = m_.find_user(user);
    if (!u) throw DataError("unknown user: " + user);
    return predict(*u, m_.find_item(item));
  }

  // Pearson correlation over co-rated items, nullopt when fewer than
  // min_overlap co-ratings or either side has zero variance on them.
  std::optional<double> correlation(Index u, Index v) {
    if (u != cached_user_) load_user(u);
    return pearson(v);
  }

 private:
  static constexpr Index kNone = static_cast<Index>(-1);
  static constexpr int kUnrated = std::numeric_limits<int>::min();

  void load_user(Index u) {
    if (cached_user_ != kNone)
      for (const auto& e : m_.profile(cached_user_)) dense_[e.item] = kUnrated;
    for (const auto& e : m_.profile(u)) dense_[e.item] = e.rating;
    cached_user_ = u;
    weights_.clear();
  }

  std::optional<double> pearson(Index v) {
    if (auto it = weights_.find(v); it != weights_.end()) return it->second;
    double su = 0, sv = 0;
    std::size_t n = 0;
    for (const auto& e : m_.profile(v))
      if (dense_[e.item] != kUnrated) {
        su += dense_[e.item];
        sv += e.rating;
        ++n;
      }
    std::optional<double> w;
    if (n >= cfg_.min_overlap) {
      const double mu = su / static_cast<double>(n), mv = sv / static_cast<double>(n);
      double num = 0, du = 0, dv = 0;
      for (const auto& e : m_.profile(v))
        if (dense_[e.item] != kUnrated) {
          const double a = dense_[e.item] - mu, b = e.rating - mv;
          num += a * b;
          du += a * a;
          dv += b * b;
        }
      if (du > 0 && dv > 0) w = num / std::sqrt(du * dv);
    }
    weights_.emplace(v, w);
    return w;
  }

  double raw_prediction(Index u, std::optional<Index> item) {
    if (item) {
      const Index i = *item;
      neighbours_.clear();
      double other_sum = 0;
      std::size_t others = 0;
      for (Index v : m_.raters(i)) {
        if (v == u) continue;
        const int r = *m_.rating(v, i);
        other_sum += r;
        ++others;
        const auto w = pearson(v);
        if (w && *w > 0) neighbours_.push_back({*w, v, r});
      }
      if (!neighbours_.empty()) {
        const auto top = std::min(cfg_.k, neighbours_.size());
        std::partial_sort(neighbours_.begin(), neighbours_.begin() + static_cast<std::ptrdiff_t>(top),
                          neighbours_.end(), [](const Neighbour& a, const Neighbour& b) {
                            return a.weight != b.weight ? a.weight > b.weight : a.user < b.user;
                          });
        double num = 0, den = 0;
        for (std::size_t k = 0; k < top; ++k) {
          const auto& nb = neighbours_[k];
          num += nb.weight * (nb.rating - user_mean_[nb.user]);
          den += nb.weight;
        }
        return user_mean_[u] + num / den;
      }
      if (others > 0) return other_sum / static_cast<double>(others);
    }
    if (!m_.profile(u).empty()) return user_mean_[u];
    return system_mean_;
  }

  double clamp(double x) const {
    return std::clamp(x, static_cast<double>(m_.scale().min), static_cast<double>(m_.scale().max));
  }

  struct Neighbour {
    double weight;
    Index user;
    int rating;
  };

  const RatingMatrix& m_;
  KnnConfig cfg_;
  std::vector<double> user_mean_;
  double system_mean_ = 0;
  std::vector<int> dense_;
  Index cached_user_ = kNone;
  std::unordered_map<Index, std::optional<double>> weights_;
  std::vector<Neighbour> neighbours_;
};

inline double predict_knn(const RatingMatrix& m, const std::string& user, const std::string& item,
                          std::size_t k = 20) {
  KnnPredictor p(m, KnnConfig{k, 2});
  return p.predict(user, item);
}

}  // namespace greyshill
