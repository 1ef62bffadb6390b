#pragma once

// JSON mapping for configuration documents and reports (nlohmann/json).

#include <json.hpp>

#include "greyshill/attack.hpp"
#include "greyshill/detector.hpp"
#include "greyshill/experiment.hpp"

namespace greyshill {

using Json = nlohmann::ordered_json;

inline Json to_json(const EmConfig& c) {
  return Json{{"components", c.components},         {"max_iterations", c.max_iterations},
              {"tolerance", c.tolerance},           {"covariance", "diagonal"},
              {"variance_floor", c.variance_floor}, {"restarts", c.restarts},
              {"seed", c.seed}};
}

inline EmConfig em_config_from_json(const Json& j, EmConfig c = {}) {
  c.components = j.value("components", c.components);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.variance_floor = j.value("variance_floor", c.variance_floor);
  c.restarts = j.value("restarts", c.restarts);
  c.seed = j.value("seed", c.seed);
  if (j.contains("covariance") && j["covariance"] != "diagonal")
    throw DataError("only diagonal covariance is supported");
  return c;
}

inline Json to_json(const DetectionReport& r) {
  Json spaces = Json::array();
  for (const auto& s : r.spaces) {
    spaces.push_back(Json{{"kind", to_string(s.kind)},
                          {"cluster_sizes", s.cluster_sizes},
                          {"chosen_cluster", s.chosen_cluster},
                          {"size_tie", s.size_tie},
                          {"iterations", s.iterations},
                          {"log_likelihood", s.log_likelihood},
                          {"kept_dimensions", s.kept_dimensions},
                          {"suspects", s.suspects}});
  }
  return Json{{"flagged", r.flagged},
              {"flagged_count", r.flagged.size()},
              {"standardized", r.standardized},
              {"em", to_json(r.config)},
              {"spaces", spaces}};
}

inline Json to_json(const AttackSpec& s) {
  Json j{{"model", to_string(s.model)},
         {"intent", to_string(s.intent)},
         {"attack_size", s.attack_size},
         {"filler_size", s.filler_size},
         {"seed", s.seed},
         {"popular_threshold", s.popular_threshold},
         {"bandwagon_items", s.bandwagon_items},
         {"segment_items", s.segment_items},
         {"reverse_bandwagon_items", s.reverse_bandwagon_items}};
  if (s.grey_rating) j["grey_rating"] = *s.grey_rating;
  if (s.aop_top_fraction) j["aop_top_fraction"] = *s.aop_top_fraction;
  return j;
}

// Missing keys keep the values already in `s`.
inline AttackSpec attack_spec_from_json(const Json& j, AttackSpec s = {}) {
  if (j.contains("model")) s.model = parse_attack_model(j["model"].get<std::string>());
  if (j.contains("intent")) s.intent = parse_intent(j["intent"].get<std::string>());
  if (j.contains("grey_rating")) s.grey_rating = j["grey_rating"].get<int>();
  s.attack_size = j.value("attack_size", s.attack_size);
  s.filler_size = j.value("filler_size", s.filler_size);
  if (j.contains("aop_top_fraction")) s.aop_top_fraction = j["aop_top_fraction"].get<double>();
  s.seed = j.value("seed", s.seed);
  s.popular_threshold = j.value("popular_threshold", s.popular_threshold);
  s.bandwagon_items = j.value("bandwagon_items", s.bandwagon_items);
  s.segment_items = j.value("segment_items", s.segment_items);
  s.reverse_bandwagon_items = j.value("reverse_bandwagon_items", s.reverse_bandwagon_items);
  return s;
}

inline Json to_json(const SyntheticConfig& c) {
  return Json{{"users", c.users},
              {"items", c.items},
              {"mean_activity", c.mean_activity},
              {"activity_sigma", c.activity_sigma},
              {"zipf_exponent", c.zipf_exponent},
              {"latent_factors", c.latent_factors},
              {"factor_sd", c.factor_sd},
              {"global_mean", c.global_mean},
              {"user_bias_sd", c.user_bias_sd},
              {"item_bias_sd", c.item_bias_sd},
              {"noise_sd", c.noise_sd},
              {"seed", c.seed}};
}

inline SyntheticConfig synthetic_config_from_json(const Json& j, SyntheticConfig c = {}) {
  c.users = j.value("users", c.users);
  c.items = j.value("items", c.items);
  c.mean_activity = j.value("mean_activity", c.mean_activity);
  c.activity_sigma = j.value("activity_sigma", c.activity_sigma);
  c.zipf_exponent = j.value("zipf_exponent", c.zipf_exponent);
  c.latent_factors = j.value("latent_factors", c.latent_factors);
  c.factor_sd = j.value("factor_sd", c.factor_sd);
  c.global_mean = j.value("global_mean", c.global_mean);
  c.user_bias_sd = j.value("user_bias_sd", c.user_bias_sd);
  c.item_bias_sd = j.value("item_bias_sd", c.item_bias_sd);
  c.noise_sd = j.value("noise_sd", c.noise_sd);
  c.seed = j.value("seed", c.seed);
  return c;
}

inline std::string to_string(RatingFormat f) {
  switch (f) {
    case RatingFormat::BookCrossing: return "bookcrossing";
    case RatingFormat::HetRec: return "hetrec";
    case RatingFormat::GenericCsv: return "generic";
  }
  return "?";
}

inline Json to_json(const SweepConfig& c) {
  Json dataset;
  if (!c.dataset.path.empty()) {
    dataset = Json{{"path", c.dataset.path}, {"format", to_string(c.dataset.format)}};
  } else if (c.dataset.synthetic) {
    dataset = Json{{"synthetic", to_json(*c.dataset.synthetic)}};
  }
  Json models = Json::array();
  for (auto m : c.models) models.push_back(to_string(m));
  Json intents = Json::array();
  for (const auto& i : c.intents) {
    Json e{{"intent", to_string(i.intent)}};
    if (i.grey_rating) e["grey_rating"] = *i.grey_rating;
    intents.push_back(e);
  }
  return Json{{"dataset", dataset},
              {"sample_users", c.sample_users},
              {"models", models},
              {"intents", intents},
              {"attack_sizes", c.attack_sizes},
              {"filler_sizes", c.filler_sizes},
              {"repetitions", c.repetitions},
              {"base_seed", c.base_seed},
              {"aop_top_fraction", c.aop_top_fraction},
              {"popular_threshold", c.popular_threshold},
              {"wavelet", to_string(c.features.wavelet)},
              {"levels", c.features.levels},
              {"detector", to_json(c.detector)},
              {"prediction_shift", c.prediction_shift},
              {"holdout_fraction", c.holdout_fraction},
              {"knn_k", c.knn_k},
              {"parallelism", c.parallelism}};
}

inline SweepConfig sweep_config_from_json(const Json& j) {
  SweepConfig c;
  const auto& ds = j.at("dataset");
  if (ds.contains("path")) {
    c.dataset.path = ds["path"].get<std::string>();
    c.dataset.format = parse_rating_format(ds.value("format", std::string("generic")));
  } else if (ds.contains("synthetic")) {
    c.dataset.synthetic = synthetic_config_from_json(ds["synthetic"]);
  } else {
    throw DataError("dataset needs \"path\" or \"synthetic\"");
  }
  c.sample_users = j.value("sample_users", c.sample_users);
  if (j.contains("models")) {
    const auto& ms = j["models"];
    if (ms.is_string() && ms.get<std::string>() == "all") {
      c.models.assign(kAllAttackModels.begin(), kAllAttackModels.end());
    } else {
      for (const auto& m : ms) c.models.push_back(parse_attack_model(m.get<std::string>()));
    }
  }
  for (const auto& i : j.value("intents", Json::array())) {
    IntentSetting s;
    s.intent = parse_intent(i.at("intent").get<std::string>());
    if (i.contains("grey_rating")) s.grey_rating = i["grey_rating"].get<int>();
    if (s.intent == Intent::Grey && !s.grey_rating) throw DataError("grey intent needs grey_rating");
    c.intents.push_back(s);
  }
  c.attack_sizes = j.value("attack_sizes", c.attack_sizes);
  c.filler_sizes = j.value("filler_sizes", c.filler_sizes);
  c.repetitions = j.value("repetitions", c.repetitions);
  c.base_seed = j.value("base_seed", c.base_seed);
  c.aop_top_fraction = j.value("aop_top_fraction", c.aop_top_fraction);
  c.popular_threshold = j.value("popular_threshold", c.popular_threshold);
  if (j.contains("wavelet")) c.features.wavelet = parse_wavelet(j["wavelet"].get<std::string>());
  c.features.levels = j.value("levels", c.features.levels);
  if (j.contains("detector")) c.detector = em_config_from_json(j["detector"]);
  c.prediction_shift = j.value("prediction_shift", c.prediction_shift);
  c.holdout_fraction = j.value("holdout_fraction", c.holdout_fraction);
  c.knn_k = j.value("knn_k", c.knn_k);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.validate();
  return c;
}

}  // namespace greyshill
