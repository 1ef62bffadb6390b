#pragma once

#include <algorithm>
#include <array>
#include <iterator>
#include <string>
#include <vector>

#include "greyshill/em.hpp"
#include "greyshill/features.hpp"
#include "greyshill/random.hpp"
#include "greyshill/series.hpp"

namespace greyshill {

struct SpaceReport {
  SeriesKind kind{};
  std::vector<std::string> suspects;  // the smaller cluster, sorted
  std::array<std::size_t, 2> cluster_sizes{};
  int chosen_cluster = 0;
  bool size_tie = false;  // resolved by mean distance from the centroid
  std::size_t iterations = 0;
  double log_likelihood = 0;
  std::size_t kept_dimensions = 0;
};

struct DetectionReport {
  std::vector<std::string> flagged;  // sorted
  std::array<SpaceReport, 3> spaces;
  EmConfig config;
  bool standardized = true;

  const SpaceReport& space(SeriesKind k) const {
    for (const auto& s : spaces)
      if (s.kind == k) return s;
    return spaces[0];
  }
};

// The smaller cluster is taken as the attacker group; on an exact size tie
// the cluster lying further from the global centroid wins.
inline int smaller_cluster(const std::array<std::size_t, 2>& sizes,
                           const std::array<double, 2>& mean_distance, bool* tie = nullptr) {
  if (tie) *tie = sizes[0] == sizes[1];
  if (sizes[0] != sizes[1]) return sizes[0] < sizes[1] ? 0 : 1;
  return mean_distance[1] > mean_distance[0] ? 1 : 0;
}

inline constexpr std::array<SeriesKind, 3> kDetectionSpaces = {
    SeriesKind::RatingDeviation, SeriesKind::Popularity, SeriesKind::Novelty};

inline std::vector<std::string> intersect_sorted(const std::vector<std::string>& a,
                                                 const std::vector<std::string>& b) {
  std::vector<std::string> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Clusters each feature space independently and flags the users found in
// the smaller cluster of all three.
inline DetectionReport detect(const std::vector<UserFeatureSet>& features, const EmConfig& cfg) {
  if (features.size() < 2) throw DataError("detection needs at least 2 users");
  DetectionReport report;
  report.config = cfg;
  std::vector<std::string> ids;
  ids.reserve(features.size());
  for (const auto& f : features) ids.push_back(f.user);

  for (std::size_t s = 0; s < kDetectionSpaces.size(); ++s) {
    const SeriesKind kind = kDetectionSpaces[s];
    std::vector<std::vector<double>> points;
    points.reserve(features.size());
    for (const auto& f : features) {
      const auto a = f.get(kind).as_array();
      points.emplace_back(a.begin(), a.end());
    }
    EmConfig space_cfg = cfg;
    space_cfg.seed = derive_seed(cfg.seed, "space", s);
    const auto em = em_fit(points, space_cfg, ids);

    SpaceReport& sr = report.spaces[s];
    sr.kind = kind;
    sr.cluster_sizes = em.sizes;
    sr.chosen_cluster = smaller_cluster(em.sizes, em.mean_distance, &sr.size_tie);
    sr.iterations = em.iterations;
    sr.log_likelihood = em.log_likelihood;
    sr.kept_dimensions = em.kept_dimensions.size();
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (em.assignment[i] == sr.chosen_cluster) sr.suspects.push_back(ids[i]);
    std::sort(sr.suspects.begin(), sr.suspects.end());
  }

  report.flagged = intersect_sorted(intersect_sorted(report.spaces[0].suspects, report.spaces[1].suspects),
                                    report.spaces[2].suspects);
  return report;
}

inline DetectionReport detect(const RatingMatrix& m, const FeatureConfig& fcfg, const EmConfig& cfg) {
  return detect(extract_all_features(m, fcfg), cfg);
}

}  // namespace greyshill
