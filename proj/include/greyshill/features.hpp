#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "greyshill/error.hpp"
#include "greyshill/rating_matrix.hpp"
#include "greyshill/series.hpp"
#include "greyshill/wavelet.hpp"

namespace greyshill {

inline constexpr std::size_t kFeatureCount = 15;

// Amplitude-domain statistics of one signal. Skewness and kurtosis are the
// raw third and fourth moments, not the standardised ones.
struct FeatureVector {
  double min = 0;
  double max = 0;
  double mean = 0;
  double peak = 0;
  double rms = 0;
  double rms_amplitude = 0;  // ((1/N) sum sqrt|x|)^2
  double abs_mean = 0;
  double variance = 0;  // rms^2 - mean^2
  double skewness = 0;
  double kurtosis = 0;
  double shape_factor = 0;
  double crest_factor = 0;
  double impulse_factor = 0;
  double clearance_factor = 0;
  double kurtosis_value = 0;

  std::array<double, kFeatureCount> as_array() const {
    return {min,      max,          mean,         peak,           rms,
            rms_amplitude, abs_mean, variance,     skewness,       kurtosis,
            shape_factor,  crest_factor, impulse_factor, clearance_factor, kurtosis_value};
  }

  static FeatureVector from_array(const std::array<double, kFeatureCount>& a) {
    return {a[0], a[1], a[2],  a[3],  a[4],  a[5],  a[6], a[7],
            a[8], a[9], a[10], a[11], a[12], a[13], a[14]};
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "min",      "max",          "mean",         "peak",           "rms",
    "rms_amplitude", "abs_mean", "variance",   "skewness",       "kurtosis",
    "shape_factor",  "crest_factor", "impulse_factor", "clearance_factor", "kurtosis_value"};

// Ratio features with a zero denominator are reported as 0.
inline FeatureVector amplitude_features(std::span<const double> x) {
  if (x.empty()) throw DataError("cannot extract features from an empty signal");
  const double n = static_cast<double>(x.size());
  FeatureVector f;
  f.min = *std::min_element(x.begin(), x.end());
  f.max = *std::max_element(x.begin(), x.end());
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0, sabs = 0, sroot = 0;
  for (double v : x) {
    const double v2 = v * v;
    s1 += v;
    s2 += v2;
    s3 += v2 * v;
    s4 += v2 * v2;
    sabs += std::abs(v);
    sroot += std::sqrt(std::abs(v));
  }
  f.mean = s1 / n;
  f.peak = std::max(std::abs(f.min), std::abs(f.max));
  f.rms = std::sqrt(s2 / n);
  f.rms_amplitude = (sroot / n) * (sroot / n);
  f.abs_mean = sabs / n;
  f.variance = s2 / n - f.mean * f.mean;
  f.skewness = s3 / n;
  f.kurtosis = s4 / n;
  auto ratio = [](double a, double b) { return b != 0 ? a / b : 0.0; };
  f.shape_factor = ratio(f.rms, f.abs_mean);
  f.crest_factor = ratio(f.peak, f.rms);
  f.impulse_factor = ratio(f.peak, f.abs_mean);
  f.clearance_factor = ratio(f.peak, f.rms_amplitude);
  f.kurtosis_value = ratio(f.kurtosis, f.rms * f.rms * f.rms * f.rms);
  return f;
}

struct UserFeatureSet {
  std::string user;
  FeatureVector rating_deviation;
  FeatureVector popularity;
  FeatureVector novelty;

  const FeatureVector& get(SeriesKind k) const {
    switch (k) {
      case SeriesKind::RatingDeviation: return rating_deviation;
      case SeriesKind::Popularity: return popularity;
      case SeriesKind::Novelty: return novelty;
    }
    return rating_deviation;
  }

  friend bool operator==(const UserFeatureSet&, const UserFeatureSet&) = default;
};

struct FeatureConfig {
  WaveletName wavelet = WaveletName::Haar;
  std::size_t levels = 1;
};

inline FeatureVector series_features(const RatingMatrix& m, Index u, const ItemOrdering& ord,
                                     const WaveletSpec& w, std::size_t levels) {
  const auto s = series_values(m, u, ord);
  const std::vector<double> x(s.begin(), s.end());
  const auto dwt = dwt_multilevel(x, w, levels);
  return amplitude_features(dwt.final_approx());
}

inline UserFeatureSet extract_user_features(const RatingMatrix& m, Index u,
                                            const SeriesOrderings& ord, const WaveletSpec& w,
                                            std::size_t levels) {
  return {m.user_id(u), series_features(m, u, ord.rating_deviation, w, levels),
          series_features(m, u, ord.popularity, w, levels),
          series_features(m, u, ord.novelty, w, levels)};
}

inline UserFeatureSet extract_user_features(const RatingMatrix& m, const std::string& user,
                                            const SeriesOrderings& ord, const WaveletSpec& w,
                                            std::size_t levels) {
  const auto u = m.find_user(user);
  if (!u) throw DataError("unknown user: " + user);
  return extract_user_features(m, *u, ord, w, levels);
}

// Feature sets for every user, in user-id order. Orderings are computed from
// the matrix as observed (genuine and injected profiles alike).
inline std::vector<UserFeatureSet> extract_all_features(const RatingMatrix& m,
                                                        const FeatureConfig& cfg = {}) {
  const auto ord = compute_orderings(m);
  const auto w = WaveletSpec::by_name(cfg.wavelet);
  std::vector<UserFeatureSet> out;
  out.reserve(m.num_users());
  for (Index u = 0; u < m.num_users(); ++u)
    out.push_back(extract_user_features(m, u, ord, w, cfg.levels));
  return out;
}

inline void write_features_csv(const std::vector<UserFeatureSet>& features, std::ostream& out) {
  out << "user_id,kind";
  for (std::size_t k = 1; k <= kFeatureCount; ++k) out << ",f" << k;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& fs : features) {
    for (auto kind : {SeriesKind::RatingDeviation, SeriesKind::Popularity, SeriesKind::Novelty}) {
      out << fs.user << ',' << to_string(kind);
      for (double v : fs.get(kind).as_array()) out << ',' << v;
      out << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace greyshill
