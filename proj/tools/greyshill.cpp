// greyshill: command-line driver for the attack simulation and detection
// pipeline. Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "greyshill/greyshill.hpp"
#include "greyshill/serialization.hpp"

namespace fs = std::filesystem;
using namespace greyshill;

namespace {

constexpr const char* kVersion = GREYSHILL_VERSION;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags whose values are file paths; recorded as absolute paths so a
// manifest replays from any working directory.
const std::set<std::string> kPathFlags = {"--in", "--out", "--labels", "--report", "--genuine", "--flagged"};

std::string env_name(const std::string& long_name) {
  std::string s = "GREYSHILL_";
  for (char c : long_name) s.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return s;
}

std::vector<std::string> model_names() {
  std::vector<std::string> v;
  for (auto m : kAllAttackModels) v.push_back(to_string(m));
  return v;
}

// Inline JSON (starting with '{') or a path to a JSON file.
Json read_json_arg(const std::string& arg) {
  std::string text = arg;
  if (fs::path(arg).extension() == ".json" || (!arg.empty() && arg.front() != '{')) {
    std::ifstream in(arg);
    if (!in) throw DataError("cannot open " + arg);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
}

std::uint64_t file_fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = detail::kFnvOffset;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) h = detail::fnv1a(h, buf, static_cast<std::size_t>(in.gcount()));
  return h;
}

fs::path output_dir(const std::string& out) {
  const auto parent = fs::absolute(out).parent_path();
  fs::create_directories(parent);
  return parent;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

// Collects the resolved invocation of one subcommand and writes it next to
// the outputs. `argv` alone is enough to replay the run.
class Manifest {
 public:
  Manifest(std::string subcommand, const CLI::App& app) : subcommand_(std::move(subcommand)) {
    for (const CLI::Option* opt : app.get_options()) {
      const std::string name = opt->get_name(false, true);
      if (name.rfind("--", 0) != 0 || name == "--help") continue;
      if (opt->get_type_size() == 0) {
        if (opt->count() > 0) flags_[name] = std::nullopt;
        continue;
      }
      std::string value = opt->count() > 0 ? opt->results().front() : opt->get_default_str();
      if (value.empty()) continue;
      if (kPathFlags.contains(name)) value = fs::absolute(value).string();
      flags_[name] = value;
    }
  }

  void set(const std::string& flag, const std::string& value) { flags_[flag] = value; }
  void erase(const std::string& flag) { flags_.erase(flag); }
  void seed(const std::string& name, std::uint64_t v) { seeds_[name] = v; }
  void input(const std::string& path) { inputs_.push_back(fs::absolute(path).string()); }
  void output(const std::string& path) { outputs_.push_back(fs::absolute(path).string()); }
  void extra(const std::string& key, Json value) { extra_[key] = std::move(value); }

  std::vector<std::string> argv() const {
    std::vector<std::string> v{subcommand_};
    for (const auto& [flag, value] : flags_) {
      v.push_back(flag);
      if (value) v.push_back(*value);
    }
    return v;
  }

  void write(const fs::path& dir, double seconds) const {
    Json inputs = Json::array();
    for (const auto& p : inputs_)
      inputs.push_back(Json{{"path", p}, {"bytes", fs::exists(p) ? fs::file_size(p) : 0},
                            {"fnv1a64", fs::exists(p) ? file_fingerprint(p) : 0}});
    Json j{{"tool", "greyshill"},
           {"version", kVersion},
           {"subcommand", subcommand_},
           {"argv", argv()},
           {"seeds", seeds_},
           {"inputs", inputs},
           {"outputs", outputs_},
           {"duration_seconds", seconds}};
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    write_text(dir / "manifest.json", j.dump(2) + "\n");
  }

 private:
  std::string subcommand_;
  std::map<std::string, std::optional<std::string>> flags_;
  std::map<std::string, std::uint64_t> seeds_;
  std::vector<std::string> inputs_, outputs_;
  Json extra_ = Json::object();
};

bool given(const CLI::Option* o) { return o && o->count() > 0; }

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string in, format = "generic", out;
  bool synthetic = false;
  SyntheticConfig syn;
  std::size_t sample = 0;
  std::uint64_t seed = 1;
};

struct AttackArgs {
  std::string in, format = "generic", config, out, labels;
  std::string model = "average", intent = "nuke";
  int grey_rating = 0;
  double attack_size = 0.1, filler_size = 0.05, aop = 0.1;
  std::size_t popular_threshold = 200, bandwagon_items = 10, segment_items = 5, reverse_items = 10;
  std::uint64_t seed = 0;
  CLI::Option *grey_opt = nullptr, *aop_opt = nullptr, *config_opt = nullptr;
  std::vector<CLI::Option*> spec_opts;
};

struct FeatureArgs {
  std::string in, format = "generic", out, wavelet = "haar";
  std::size_t levels = 1;
};

struct DetectArgs {
  std::string in, format = "generic", out, flagged, wavelet = "haar";
  std::size_t levels = 1;
  EmConfig em;
};

struct EvalArgs {
  std::string report, labels, genuine, format = "generic", attack_config, out;
  double holdout = 0.1;
  std::size_t k = 20;
  std::uint64_t seed = 0;
};

struct SweepArgs {
  std::string config, out;
  std::size_t parallelism = 0;
  bool fresh = false;
  CLI::Option* parallelism_opt = nullptr;
};

void add_format(CLI::App* sub, std::string& format) {
  sub->add_option("--format", format, "Ratings file format")
      ->check(CLI::IsMember({"generic", "bookcrossing", "hetrec"}));
}

void add_attack_flags(CLI::App* sub, AttackArgs& a) {
  auto track = [&](CLI::Option* o) {
    a.spec_opts.push_back(o);
    return o;
  };
  track(sub->add_option("--model", a.model, "Attack model")->check(CLI::IsMember(model_names())));
  track(sub->add_option("--intent", a.intent, "Attack intent")->check(CLI::IsMember({"push", "nuke", "grey"})));
  a.grey_opt = track(sub->add_option("--grey-rating", a.grey_rating, "Target rating for grey attacks"));
  track(sub->add_option("--attack-size", a.attack_size, "Attackers as a fraction of genuine users"));
  track(sub->add_option("--filler-size", a.filler_size, "Filler items as a fraction of all items"));
  a.aop_opt = track(sub->add_option("--aop-top-fraction", a.aop, "AOP filler pool: top fraction of items by popularity"));
  track(sub->add_option("--popular-threshold", a.popular_threshold, "Popular items have strictly more raters than this"));
  track(sub->add_option("--bandwagon-items", a.bandwagon_items, "Selected items for bandwagon models"));
  track(sub->add_option("--segment-items", a.segment_items, "Selected items for the segment model"));
  track(sub->add_option("--reverse-bandwagon-items", a.reverse_items, "Selected items for reverse bandwagon"));
  track(sub->add_option("--seed", a.seed, "Attack seed"));
}

// Config JSON first, then any flag given explicitly on the command line or
// through the environment.
AttackSpec resolve_attack(const AttackArgs& a, const Json* config) {
  AttackSpec from_flags;
  from_flags.model = parse_attack_model(a.model);
  from_flags.intent = parse_intent(a.intent);
  if (given(a.grey_opt)) from_flags.grey_rating = a.grey_rating;
  from_flags.attack_size = a.attack_size;
  from_flags.filler_size = a.filler_size;
  from_flags.popular_threshold = a.popular_threshold;
  from_flags.bandwagon_items = a.bandwagon_items;
  from_flags.segment_items = a.segment_items;
  from_flags.reverse_bandwagon_items = a.reverse_items;
  from_flags.seed = a.seed;
  if (from_flags.model == AttackModel::AOP) from_flags.aop_top_fraction = a.aop;
  if (!config) return from_flags;

  AttackSpec s = attack_spec_from_json(*config, from_flags);
  auto over = [&](const char* flag, auto apply) {
    for (auto* o : a.spec_opts)
      if (o->get_name(false, true) == flag && given(o)) apply();
  };
  over("--model", [&] { s.model = from_flags.model; });
  over("--intent", [&] { s.intent = from_flags.intent; });
  over("--grey-rating", [&] { s.grey_rating = from_flags.grey_rating; });
  over("--attack-size", [&] { s.attack_size = a.attack_size; });
  over("--filler-size", [&] { s.filler_size = a.filler_size; });
  over("--aop-top-fraction", [&] { s.aop_top_fraction = a.aop; });
  over("--popular-threshold", [&] { s.popular_threshold = a.popular_threshold; });
  over("--bandwagon-items", [&] { s.bandwagon_items = a.bandwagon_items; });
  over("--segment-items", [&] { s.segment_items = a.segment_items; });
  over("--reverse-bandwagon-items", [&] { s.reverse_bandwagon_items = a.reverse_items; });
  over("--seed", [&] { s.seed = a.seed; });
  if (s.model == AttackModel::AOP && !s.aop_top_fraction) s.aop_top_fraction = a.aop;
  if (s.model != AttackModel::AOP) s.aop_top_fraction.reset();
  return s;
}

// Rewrites the attack flags of a manifest to the resolved spec.
void record_attack(Manifest& man, const AttackSpec& s) {
  man.erase("--config");
  man.set("--model", to_string(s.model));
  man.set("--intent", to_string(s.intent));
  if (s.grey_rating)
    man.set("--grey-rating", std::to_string(*s.grey_rating));
  else
    man.erase("--grey-rating");
  man.set("--attack-size", format_number(s.attack_size));
  man.set("--filler-size", format_number(s.filler_size));
  if (s.aop_top_fraction) man.set("--aop-top-fraction", format_number(*s.aop_top_fraction));
  man.set("--popular-threshold", std::to_string(s.popular_threshold));
  man.set("--bandwagon-items", std::to_string(s.bandwagon_items));
  man.set("--segment-items", std::to_string(s.segment_items));
  man.set("--reverse-bandwagon-items", std::to_string(s.reverse_bandwagon_items));
  man.set("--seed", std::to_string(s.seed));
  man.seed("attack", s.seed);
}

RatingMatrix load(const std::string& path, const std::string& format) {
  return load_ratings(path, parse_rating_format(format));
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

void run_ingest(const IngestArgs& a, CLI::App& sub) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.synthetic == !a.in.empty()) throw UsageError("ingest needs exactly one of --in and --synthetic");
  Manifest man("ingest", sub);
  RatingMatrix m;
  if (a.synthetic) {
    auto cfg = a.syn;
    cfg.seed = a.seed;
    m = generate_synthetic(cfg);
    man.extra("synthetic", to_json(cfg));
  } else {
    m = load(a.in, a.format);
    man.input(a.in);
  }
  if (a.sample > 0) m = sample_genuine(m, a.sample, a.seed);
  man.seed("seed", a.seed);
  const auto dir = output_dir(a.out);
  write_ratings_csv(m, a.out);
  man.output(a.out);
  std::cerr << "ingest: " << m.num_users() << " users, " << m.num_items() << " items, " << m.num_ratings()
            << " ratings\n";
  man.write(dir, elapsed(t0));
}

void run_attack(const AttackArgs& a, CLI::App& sub) {
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<Json> config;
  if (!a.config.empty()) config = read_json_arg(a.config);
  const auto spec = resolve_attack(a, config ? &*config : nullptr);
  const auto genuine = load(a.in, a.format);
  const auto result = inject_attacks(genuine, spec);

  const auto dir = output_dir(a.out);
  const std::string labels = a.labels.empty() ? (dir / "labels.csv").string() : a.labels;
  write_ratings_csv(result.matrix, a.out);
  write_labels_csv(result.labels, labels);

  Manifest man("attack", sub);
  record_attack(man, spec);
  man.set("--labels", fs::absolute(labels).string());
  man.input(a.in);
  man.output(a.out);
  man.output(labels);
  man.extra("attack", to_json(spec));
  man.extra("target_item", result.target);
  std::cerr << "attack: " << result.labels.attackers.size() << " attackers on item " << result.target << "\n";
  man.write(dir, elapsed(t0));
}

void run_features(const FeatureArgs& a, CLI::App& sub) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = load(a.in, a.format);
  const FeatureConfig cfg{parse_wavelet(a.wavelet), a.levels};
  const auto f = extract_all_features(m, cfg);
  const auto dir = output_dir(a.out);
  std::ofstream out(a.out);
  if (!out) throw DataError("cannot write " + a.out);
  write_features_csv(f, out);
  out.close();
  Manifest man("features", sub);
  man.input(a.in);
  man.output(a.out);
  man.write(dir, elapsed(t0));
}

void run_detect(const DetectArgs& a, CLI::App& sub) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = load(a.in, a.format);
  const FeatureConfig fcfg{parse_wavelet(a.wavelet), a.levels};
  const auto report = detect(m, fcfg, a.em);
  Json j = to_json(report);
  j["wavelet"] = a.wavelet;
  j["levels"] = a.levels;
  j["users"] = m.num_users();

  const auto dir = output_dir(a.out);
  const std::string flagged = a.flagged.empty() ? (dir / "flagged.csv").string() : a.flagged;
  write_text(a.out, j.dump(2) + "\n");
  std::ostringstream csv;
  csv << "user_id\n";
  for (const auto& u : report.flagged) csv << detail::csv_field(u) << '\n';
  write_text(flagged, csv.str());

  Manifest man("detect", sub);
  man.set("--flagged", fs::absolute(flagged).string());
  man.seed("em", a.em.seed);
  man.input(a.in);
  man.output(a.out);
  man.output(flagged);
  std::cerr << "detect: flagged " << report.flagged.size() << " of " << m.num_users() << " users\n";
  man.write(dir, elapsed(t0));
}

void run_eval(const EvalArgs& a, CLI::App& sub) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.report.empty() && a.genuine.empty())
    throw UsageError("eval needs --report/--labels, --genuine/--attack-config, or both");
  Manifest man("eval", sub);
  Json out = Json::object();
  if (!a.report.empty()) {
    if (a.labels.empty()) throw UsageError("--report needs --labels");
    const auto report = read_json_arg(a.report);
    if (!report.contains("flagged")) throw DataError("report has no \"flagged\" list");
    UserSet flagged;
    for (const auto& u : report["flagged"]) flagged.insert(u.get<std::string>());
    const auto labels = load_labels(a.labels);
    out["detection_rate"] = detection_rate(flagged, labels.attackers);
    out["false_alarm_rate"] = false_alarm_rate(flagged, labels.genuine);
    out["flagged"] = flagged.size();
    out["attackers"] = labels.attackers.size();
    out["genuine"] = labels.genuine.size();
    man.input(a.report);
    man.input(a.labels);
  }
  if (!a.genuine.empty()) {
    if (a.attack_config.empty()) throw UsageError("--genuine needs --attack-config");
    const auto cfg = read_json_arg(a.attack_config);
    const auto spec = attack_spec_from_json(cfg);
    const auto g = load(a.genuine, a.format);
    const auto r = prediction_shift_experiment(g, spec, a.holdout, a.k, a.seed);
    out["prediction_shift"] = Json{{"mae", r.mae},
                                   {"rmse", r.rmse},
                                   {"baseline_mae", r.baseline_mae},
                                   {"baseline_rmse", r.baseline_rmse},
                                   {"test_pairs", r.test_pairs},
                                   {"attack", to_json(spec)}};
    man.set("--attack-config", to_json(spec).dump());
    man.seed("holdout", a.seed);
    man.seed("attack", spec.seed);
    man.input(a.genuine);
  }
  const auto dir = output_dir(a.out);
  write_text(a.out, out.dump(2) + "\n");
  man.output(a.out);
  std::cout << out.dump(2) << "\n";
  man.write(dir, elapsed(t0));
}

void run_sweep_cmd(const SweepArgs& a, CLI::App& sub) {
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = sweep_config_from_json(read_json_arg(a.config));
  if (given(a.parallelism_opt)) cfg.parallelism = a.parallelism;
  if (cfg.parallelism == 0) cfg.parallelism = 1;

  const auto population = load_population(cfg.dataset);
  const auto dir = output_dir(a.out);
  const fs::path partial = a.out + ".partial";

  SweepHooks hooks;
  if (!a.fresh && fs::exists(partial)) {
    std::ifstream in(partial);
    hooks.completed = read_metric_csv(in);
    std::cerr << "sweep: resuming with " << hooks.completed.size() << " finished cells\n";
  }
  std::ofstream part(partial, hooks.completed.empty() ? std::ios::trunc : std::ios::app);
  if (!part) throw DataError("cannot write " + partial.string());
  if (hooks.completed.empty()) part << kMetricCsvHeader << '\n' << std::flush;
  const std::size_t total = sweep_cells(cfg).size();
  std::size_t done = hooks.completed.size();
  hooks.on_row = [&](const MetricRow& r) {
    write_metric_row(r, part);
    part.flush();
    ++done;
    std::cerr << "[" << done << "/" << total << "] " << cell_label(r.key)
              << (r.error.empty() ? "" : "  error: " + r.error) << "\n";
  };
  const auto rows = run_sweep(cfg, population, hooks);
  part.close();

  std::ostringstream csv;
  write_metric_csv(rows, csv);
  write_text(a.out, csv.str());
  fs::remove(partial);

  Manifest man("sweep", sub);
  man.set("--config", to_json(cfg).dump());
  man.set("--parallelism", std::to_string(cfg.parallelism));
  man.erase("--fresh");
  man.seed("base_seed", cfg.base_seed);
  if (!cfg.dataset.path.empty()) man.input(cfg.dataset.path);
  man.output(a.out);
  std::size_t errors = 0;
  for (const auto& r : rows) errors += !r.error.empty();
  man.extra("rows", rows.size());
  man.extra("error_rows", errors);
  std::cerr << "sweep: wrote " << rows.size() << " rows (" << errors << " with errors)\n";
  man.write(dir, elapsed(t0));
}

int dispatch(std::vector<std::string> args, int depth);

void run_replay(const std::string& manifest_path, int depth) {
  if (depth > 0) throw UsageError("a manifest cannot replay another replay");
  const auto j = read_json_arg(manifest_path);
  if (!j.contains("argv")) throw DataError("manifest has no argv");
  const auto argv = j["argv"].get<std::vector<std::string>>();
  if (const int rc = dispatch(argv, depth + 1); rc != 0) throw std::runtime_error("replayed run failed");
}

int dispatch(std::vector<std::string> args, int depth) {
  CLI::App app{"Grey shilling attack simulation and wavelet/EM detection"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Load a ratings dump or generate a synthetic population");
  s_ingest->option_defaults()->always_capture_default();
  s_ingest->add_option("--in", ingest.in, "Input ratings file");
  add_format(s_ingest, ingest.format);
  s_ingest->add_flag("--synthetic", ingest.synthetic, "Generate a synthetic population instead of reading --in");
  s_ingest->add_option("--users", ingest.syn.users, "Synthetic users");
  s_ingest->add_option("--items", ingest.syn.items, "Synthetic items");
  s_ingest->add_option("--mean-activity", ingest.syn.mean_activity, "Synthetic mean ratings per user");
  s_ingest->add_option("--activity-sigma", ingest.syn.activity_sigma, "Log-normal sigma of user activity");
  s_ingest->add_option("--zipf-exponent", ingest.syn.zipf_exponent, "Item popularity exponent");
  s_ingest->add_option("--sample", ingest.sample, "Keep this many random users (0 keeps all)");
  s_ingest->add_option("--seed", ingest.seed, "Seed for sampling and generation");
  s_ingest->add_option("--out", ingest.out, "Output ratings CSV")->required();

  AttackArgs attack;
  auto* s_attack = app.add_subcommand("attack", "Inject attack profiles into a genuine ratings file");
  s_attack->option_defaults()->always_capture_default();
  s_attack->add_option("--in", attack.in, "Genuine ratings file")->required();
  add_format(s_attack, attack.format);
  attack.config_opt = s_attack->add_option("--config", attack.config, "Attack spec JSON (file or inline); flags override it");
  add_attack_flags(s_attack, attack);
  s_attack->add_option("--out", attack.out, "Attacked ratings CSV")->required();
  s_attack->add_option("--labels", attack.labels, "Label CSV (default: labels.csv next to --out)");

  FeatureArgs feat;
  auto* s_feat = app.add_subcommand("features", "Write the 3 x 15 amplitude features of every user");
  s_feat->option_defaults()->always_capture_default();
  s_feat->add_option("--in", feat.in, "Ratings file")->required();
  add_format(s_feat, feat.format);
  s_feat->add_option("--wavelet", feat.wavelet, "Wavelet")->check(CLI::IsMember({"haar", "db2", "db4"}));
  s_feat->add_option("--levels", feat.levels, "Decomposition levels")->check(CLI::PositiveNumber);
  s_feat->add_option("--out", feat.out, "Features CSV")->required();

  DetectArgs det;
  auto* s_det = app.add_subcommand("detect", "Cluster users in the three feature spaces and flag suspects");
  s_det->option_defaults()->always_capture_default();
  s_det->add_option("--in", det.in, "Ratings file")->required();
  add_format(s_det, det.format);
  s_det->add_option("--wavelet", det.wavelet, "Wavelet")->check(CLI::IsMember({"haar", "db2", "db4"}));
  s_det->add_option("--levels", det.levels, "Decomposition levels")->check(CLI::PositiveNumber);
  s_det->add_option("--seed", det.em.seed, "EM seed");
  s_det->add_option("--restarts", det.em.restarts, "EM restarts")->check(CLI::PositiveNumber);
  s_det->add_option("--max-iterations", det.em.max_iterations, "EM iteration cap")->check(CLI::PositiveNumber);
  s_det->add_option("--tolerance", det.em.tolerance, "EM log-likelihood tolerance");
  s_det->add_option("--variance-floor", det.em.variance_floor, "Variance floor on standardised features");
  s_det->add_option("--out", det.out, "Report JSON")->required();
  s_det->add_option("--flagged", det.flagged, "Flagged users CSV (default: flagged.csv next to --out)");

  EvalArgs ev;
  auto* s_eval = app.add_subcommand("eval", "Detection rate / false alarm rate and prediction shift");
  s_eval->option_defaults()->always_capture_default();
  s_eval->add_option("--report", ev.report, "Detection report JSON");
  s_eval->add_option("--labels", ev.labels, "Label CSV from the attack step");
  s_eval->add_option("--genuine", ev.genuine, "Genuine ratings for the prediction-shift experiment");
  add_format(s_eval, ev.format);
  s_eval->add_option("--attack-config", ev.attack_config, "Attack spec JSON (file or inline)");
  s_eval->add_option("--holdout", ev.holdout, "Fraction of genuine ratings held out");
  s_eval->add_option("--k", ev.k, "kNN neighbourhood size")->check(CLI::PositiveNumber);
  s_eval->add_option("--seed", ev.seed, "Holdout seed");
  s_eval->add_option("--out", ev.out, "Metrics JSON")->required();

  SweepArgs sw;
  auto* s_sweep = app.add_subcommand("sweep", "Run the model x size grid; resumable");
  s_sweep->option_defaults()->always_capture_default();
  s_sweep->add_option("--config", sw.config, "Sweep config JSON (file or inline)")->required();
  s_sweep->add_option("--out", sw.out, "Metrics CSV")->required();
  sw.parallelism_opt = s_sweep->add_option("--parallelism", sw.parallelism, "Worker threads (0 uses the config value)");
  s_sweep->add_flag("--fresh", sw.fresh, "Ignore an existing partial file");

  std::string manifest;
  auto* s_replay = app.add_subcommand("replay", "Re-run a command from its manifest.json");
  s_replay->add_option("--manifest", manifest, "Manifest to replay")->required();

  for (CLI::App* sub : app.get_subcommands({}))
    for (CLI::Option* opt : sub->get_options()) {
      const auto name = opt->get_name(false, true);
      if (name.rfind("--", 0) == 0 && name != "--help") opt->envname(env_name(name.substr(2)));
    }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (s_ingest->parsed()) run_ingest(ingest, *s_ingest);
  if (s_attack->parsed()) run_attack(attack, *s_attack);
  if (s_feat->parsed()) run_features(feat, *s_feat);
  if (s_det->parsed()) run_detect(det, *s_det);
  if (s_eval->parsed()) run_eval(ev, *s_eval);
  if (s_sweep->parsed()) run_sweep_cmd(sw, *s_sweep);
  if (s_replay->parsed()) run_replay(manifest, depth);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(std::move(args), 0);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
