#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "greyshill/attack.hpp"
#include "greyshill/dataset.hpp"
#include "greyshill/detector.hpp"
#include "greyshill/features.hpp"
#include "greyshill/io.hpp"
#include "greyshill/knn.hpp"
#include "greyshill/metrics.hpp"
#include "greyshill/random.hpp"

namespace greyshill {

struct ShiftResult {
  double mae = 0;
  double rmse = 0;
  double baseline_mae = 0;
  double baseline_rmse = 0;
  std::size_t test_pairs = 0;
};

struct Holdout {
  RatingMatrix train;
  std::vector<std::pair<std::string, std::string>> pairs;  // (user, item)
  std::vector<int> actual;
};

// Holds out round(fraction * |ratings|) ratings, never a user's last one.
inline Holdout split_holdout(const RatingMatrix& m, double fraction, std::uint64_t seed) {
  const auto quota = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(m.num_ratings())));
  if (quota == 0) throw DataError("holdout is empty");
  std::vector<std::pair<Index, RatingMatrix::Entry>> all;
  all.reserve(m.num_ratings());
  for (Index u = 0; u < m.num_users(); ++u)
    for (const auto& e : m.profile(u)) all.emplace_back(u, e);
  Rng rng(derive_seed(seed, "holdout"));
  std::shuffle(all.begin(), all.end(), rng);

  std::vector<std::size_t> remaining(m.num_users());
  for (Index u = 0; u < m.num_users(); ++u) remaining[u] = m.profile(u).size();
  std::vector<char> held(all.size(), 0);
  std::size_t taken = 0;
  for (std::size_t k = 0; k < all.size() && taken < quota; ++k) {
    const Index u = all[k].first;
    if (remaining[u] <= 1) continue;
    --remaining[u];
    held[k] = 1;
    ++taken;
  }
  if (taken == 0) throw DataError("holdout is empty");

  Holdout h;
  RatingMatrix::Builder b(m.scale());
  for (const auto& id : m.user_ids()) b.add_user(id);
  for (std::size_t k = 0; k < all.size(); ++k) {
    const auto& [u, e] = all[k];
    if (held[k]) {
      h.pairs.emplace_back(m.user_id(u), m.item_id(e.item));
      h.actual.push_back(e.rating);
    } else {
      b.add_rating(m.user_id(u), m.item_id(e.item), e.rating);
    }
  }
  h.train = b.build();
  return h;
}

inline std::pair<double, double> evaluate_predictions(const RatingMatrix& train, const Holdout& h,
                                                      const KnnConfig& knn) {
  // Group queries by user so each user's correlations are computed once.
  std::vector<std::size_t> order(h.pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return h.pairs[a].first < h.pairs[b].first; });
  KnnPredictor predictor(train, knn);
  std::vector<RatingPair> pairs(h.pairs.size());
  for (std::size_t k : order)
    pairs[k] = {static_cast<double>(h.actual[k]), predictor.predict(h.pairs[k].first, h.pairs[k].second)};
  return {mae(pairs), rmse(pairs)};
}

// MAE/RMSE of the kNN predictor on held-out genuine ratings, once with the
// training matrix as is and once with attack profiles injected into it.
inline ShiftResult prediction_shift_experiment(const RatingMatrix& genuine, const AttackSpec& spec,
                                               double holdout_fraction, std::size_t k,
                                               std::uint64_t seed) {
  const auto h = split_holdout(genuine, holdout_fraction, seed);
  const KnnConfig knn{k, 2};
  ShiftResult r;
  r.test_pairs = h.pairs.size();
  std::tie(r.baseline_mae, r.baseline_rmse) = evaluate_predictions(h.train, h, knn);
  if (spec.attack_size == 0) {
    r.mae = r.baseline_mae;
    r.rmse = r.baseline_rmse;
    return r;
  }
  const auto attacked = inject_attacks(h.train, spec);
  std::tie(r.mae, r.rmse) = evaluate_predictions(attacked.matrix, h, knn);
  return r;
}

// ---------------------------------------------------------------------------
// Sweep

struct IntentSetting {
  Intent intent = Intent::Nuke;
  std::optional<int> grey_rating;
};

struct DatasetRef {
  std::string path;
  RatingFormat format = RatingFormat::GenericCsv;
  std::optional<SyntheticConfig> synthetic;  // used when path is empty
};

struct SweepConfig {
  DatasetRef dataset;
  std::size_t sample_users = 800;  // 0 keeps every user
  std::vector<AttackModel> models;
  std::vector<IntentSetting> intents;
  std::vector<double> attack_sizes;
  std::vector<double> filler_sizes;
  std::size_t repetitions = 10;
  std::uint64_t base_seed = 1;
  double aop_top_fraction = 0.1;
  std::size_t popular_threshold = 200;
  FeatureConfig features;
  EmConfig detector;
  bool prediction_shift = true;
  double holdout_fraction = 0.1;
  std::size_t knn_k = 20;
  std::size_t parallelism = 1;

  void validate() const {
    if (repetitions < 1) throw DataError("repetitions must be at least 1");
    if (models.empty() || intents.empty() || attack_sizes.empty() || filler_sizes.empty())
      throw DataError("sweep grid lists must be non-empty");
  }
};

struct CellKey {
  AttackModel model{};
  IntentSetting intent;
  double attack_size = 0;
  double filler_size = 0;
};

struct MetricRow {
  CellKey key;
  double detection_rate = std::numeric_limits<double>::quiet_NaN();
  double false_alarm_rate = std::numeric_limits<double>::quiet_NaN();
  double mae = std::numeric_limits<double>::quiet_NaN();
  double rmse = std::numeric_limits<double>::quiet_NaN();
  std::size_t reps = 0;
  std::string error;  // empty on success
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string cell_label(const CellKey& k) {
  return to_string(k.model) + ',' + to_string(k.intent.intent) + ',' +
         (k.intent.grey_rating ? std::to_string(*k.intent.grey_rating) : std::string()) + ',' +
         format_number(k.attack_size) + ',' + format_number(k.filler_size);
}

inline std::vector<CellKey> sweep_cells(const SweepConfig& cfg) {
  std::vector<CellKey> cells;
  for (auto m : cfg.models)
    for (const auto& in : cfg.intents)
      for (double a : cfg.attack_sizes)
        for (double f : cfg.filler_sizes) cells.push_back({m, in, a, f});
  return cells;
}

inline std::uint64_t cell_seed(std::uint64_t base, const CellKey& k, std::size_t rep) {
  return derive_seed(base, to_string(k.model), to_string(k.intent.intent),
                     k.intent.grey_rating.value_or(-1), k.attack_size, k.filler_size, rep);
}

inline AttackSpec cell_attack_spec(const SweepConfig& cfg, const CellKey& k, std::uint64_t seed) {
  AttackSpec s;
  s.model = k.model;
  s.intent = k.intent.intent;
  s.grey_rating = k.intent.grey_rating;
  s.attack_size = k.attack_size;
  s.filler_size = k.filler_size;
  if (k.model == AttackModel::AOP) s.aop_top_fraction = cfg.aop_top_fraction;
  s.popular_threshold = cfg.popular_threshold;
  s.seed = seed;
  return s;
}

// Every cell of a repetition shares the genuine sample and the holdout split,
// so prediction shifts are paired comparisons against one baseline.
inline std::uint64_t holdout_seed(const SweepConfig& cfg, std::size_t rep) {
  return derive_seed(cfg.base_seed, "holdout", rep);
}

struct CellOutcome {
  double detection_rate = 0;
  double false_alarm_rate = 0;
  std::optional<ShiftResult> shift;
};

// One repetition of one cell: inject, detect, score.
inline CellOutcome run_cell(const SweepConfig& cfg, const RatingMatrix& genuine, const CellKey& key,
                            std::size_t rep) {
  const auto seed = cell_seed(cfg.base_seed, key, rep);
  const auto spec = cell_attack_spec(cfg, key, seed);
  const auto injected = inject_attacks(genuine, spec);
  EmConfig em = cfg.detector;
  em.seed = derive_seed(seed, "detect");
  const auto report = detect(injected.matrix, cfg.features, em);
  const UserSet flagged(report.flagged.begin(), report.flagged.end());
  CellOutcome out;
  out.detection_rate = detection_rate(flagged, injected.labels.attackers);
  out.false_alarm_rate = false_alarm_rate(flagged, injected.labels.genuine);
  if (cfg.prediction_shift)
    out.shift = prediction_shift_experiment(genuine, spec, cfg.holdout_fraction, cfg.knn_k,
                                            holdout_seed(cfg, rep));
  return out;
}

inline RatingMatrix load_population(const DatasetRef& ref) {
  if (!ref.path.empty()) return load_ratings(ref.path, ref.format);
  if (ref.synthetic) return generate_synthetic(*ref.synthetic);
  throw DataError("sweep dataset needs a path or a synthetic configuration");
}

// One genuine sample per repetition, shared by every cell of that repetition.
inline std::vector<RatingMatrix> sweep_samples(const SweepConfig& cfg, const RatingMatrix& population) {
  std::vector<RatingMatrix> samples;
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    if (cfg.sample_users == 0 || cfg.sample_users >= population.num_users())
      samples.push_back(population);
    else
      samples.push_back(
          sample_genuine(population, cfg.sample_users, derive_seed(cfg.base_seed, "sample", rep)));
  }
  return samples;
}

struct SweepHooks {
  // Called once per finished cell, serialised; used for partial flushes.
  std::function<void(const MetricRow&)> on_row;
  // Cells whose labels appear here are reused instead of recomputed.
  std::vector<MetricRow> completed;
  // Optional execution order over cell indices (results do not depend on it).
  std::vector<std::size_t> execution_order;
};

inline MetricRow compute_row(const SweepConfig& cfg, const std::vector<RatingMatrix>& samples,
                             const CellKey& key) {
  MetricRow row;
  row.key = key;
  double dr = 0, far = 0, e1 = 0, e2 = 0;
  try {
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      const auto o = run_cell(cfg, samples[rep], key, rep);
      dr += o.detection_rate;
      far += o.false_alarm_rate;
      if (o.shift) {
        e1 += o.shift->mae;
        e2 += o.shift->rmse;
      }
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    return row;
  }
  const auto n = static_cast<double>(cfg.repetitions);
  row.reps = cfg.repetitions;
  row.detection_rate = dr / n;
  row.false_alarm_rate = far / n;
  if (cfg.prediction_shift) {
    row.mae = e1 / n;
    row.rmse = e2 / n;
  }
  return row;
}

// Rows come back in grid order regardless of parallelism or execution order.
inline std::vector<MetricRow> run_sweep(const SweepConfig& cfg, const RatingMatrix& population,
                                        SweepHooks hooks = {}) {
  cfg.validate();
  const auto cells = sweep_cells(cfg);
  const auto samples = sweep_samples(cfg, population);

  std::vector<std::optional<MetricRow>> rows(cells.size());
  for (const auto& done : hooks.completed) {
    const auto label = cell_label(done.key);
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (!rows[c] && cell_label(cells[c]) == label) rows[c] = done;
  }

  std::vector<std::size_t> order = hooks.execution_order;
  if (order.empty()) {
    order.resize(cells.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  std::vector<std::size_t> pending;
  for (std::size_t c : order)
    if (!rows.at(c)) pending.push_back(c);

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < pending.size();) {
      const std::size_t c = pending[k];
      auto row = compute_row(cfg, samples, cells[c]);
      std::lock_guard lock(mu);
      if (hooks.on_row) hooks.on_row(row);
      rows[c] = std::move(row);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(cfg.parallelism, 1, std::max<std::size_t>(1, pending.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<MetricRow> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.push_back(std::move(*r));
  return out;
}

inline constexpr std::string_view kMetricCsvHeader =
    "model,intent,grey_rating,attack_size,filler_size,detection_rate,false_alarm_rate,mae,rmse,reps,error";

inline void write_metric_row(const MetricRow& r, std::ostream& out) {
  out << cell_label(r.key) << ',' << format_number(r.detection_rate) << ','
      << format_number(r.false_alarm_rate) << ',' << format_number(r.mae) << ','
      << format_number(r.rmse) << ',' << r.reps << ',' << detail::csv_field(r.error) << '\n';
}

inline void write_metric_csv(const std::vector<MetricRow>& rows, std::ostream& out) {
  out << kMetricCsvHeader << '\n';
  for (const auto& r : rows) write_metric_row(r, out);
}

inline std::vector<MetricRow> read_metric_csv(std::istream& in) {
  std::vector<MetricRow> rows;
  std::string line;
  std::size_t line_no = 0;
  auto num = [](const std::string& s) {
    double v = std::numeric_limits<double>::quiet_NaN();
    if (!s.empty()) detail::parse_double(s, v);
    return v;
  };
  while (std::getline(in, line)) {
    if (++line_no == 1 || detail::trim(line).empty()) continue;
    const auto f = detail::split_fields(line, ',');
    if (f.size() < 10) detail::fail_line(line_no, "short metric row");
    MetricRow r;
    r.key.model = parse_attack_model(f[0]);
    r.key.intent.intent = parse_intent(f[1]);
    if (!f[2].empty()) {
      int g = 0;
      if (!detail::parse_int(f[2], g)) detail::fail_line(line_no, "bad grey rating");
      r.key.intent.grey_rating = g;
    }
    r.key.attack_size = num(f[3]);
    r.key.filler_size = num(f[4]);
    r.detection_rate = num(f[5]);
    r.false_alarm_rate = num(f[6]);
    r.mae = num(f[7]);
    r.rmse = num(f[8]);
    r.reps = static_cast<std::size_t>(num(f[9]));
    if (f.size() > 10) r.error = f[10];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace greyshill
