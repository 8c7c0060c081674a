#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "shillsim/attack.hpp"
#include "shillsim/config.hpp"
#include "shillsim/dataset.hpp"
#include "shillsim/detect.hpp"
#include "shillsim/errors.hpp"
#include "shillsim/format.hpp"
#include "shillsim/gan.hpp"
#include "shillsim/harness.hpp"
#include "shillsim/itemgraph.hpp"
#include "shillsim/metrics.hpp"
#include "shillsim/recommender.hpp"
#include "shillsim/rng.hpp"

namespace {

using namespace shillsim;
using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "attack.kind", "attack.fraction", "attack.target_rating",
      "attack.targets", "attack.target_count", "attack.generator",
      "attack.min_ratings", "attack.max_ratings", "attack.popularity_floor",
      "attack.selected_fraction",
      "gan.epochs", "gan.critic_steps", "gan.learning_rate",
      "gan.gradient_penalty_weight", "gan.rating_penalty_weight",
      "gan.conditional",
      "rec.kind", "rec.d", "rec.learning_rate", "rec.epochs",
      "rec.negatives_per_positive", "rec.l2", "rec.perturb_magnitude",
      "rec.adv_weight",
      "detect.method", "detect.m", "detect.folds",
      "experiment.attacks", "experiment.fractions", "experiment.target_mode",
      "experiment.recommenders", "experiment.runs",
      "experiment.train_fraction", "experiment.with_detection",
      "experiment.detection_folds", "experiment.seed",
      "bench.kinds", "bench.profiles",
  };
  return keys;
}

struct CommonArgs {
  std::string config_path;
  std::string data_path;
  std::string format = "tsv";
  std::string out_dir;
  std::uint64_t seed = 0;
};

Config load_config(const std::string& path) {
  Config config;
  if (!path.empty()) config = Config::parse_file(path);
  config.require_known(known_keys());
  return config;
}

RatingsFormat parse_format(const std::string& name) {
  if (name == "tsv") return RatingsFormat::kTsv;
  if (name == "csv") return RatingsFormat::kCsv;
  throw UsageError("unknown ratings format: " + name + " (want tsv or csv)");
}

RatingsDataset load_data(const CommonArgs& args) {
  return load_ratings(args.data_path, parse_format(args.format));
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec || !std::filesystem::is_directory(path)) {
    throw DataError("cannot create output directory: " + path);
  }
}

AttackThresholds thresholds_from(const Config& config,
                                 const RatingsDataset& data) {
  AttackThresholds t;
  t.min_ratings = static_cast<int>(config.get_int("attack.min_ratings", 6));
  t.max_ratings = static_cast<int>(config.get_int("attack.max_ratings", 0));
  t.popularity_floor =
      static_cast<int>(config.get_int("attack.popularity_floor", 8));
  t.selected_fraction = config.get_double("attack.selected_fraction", 0.3);
  if (t.max_ratings == 0) t.max_ratings = derive_max_ratings(data);
  return t;
}

GanTrainConfig gan_from(const Config& config) {
  GanTrainConfig gan;
  gan.epochs = static_cast<int>(config.get_int("gan.epochs", gan.epochs));
  gan.critic_steps =
      static_cast<int>(config.get_int("gan.critic_steps", gan.critic_steps));
  gan.learning_rate =
      config.get_double("gan.learning_rate", gan.learning_rate);
  gan.loss.gradient_penalty_weight = config.get_double(
      "gan.gradient_penalty_weight", gan.loss.gradient_penalty_weight);
  gan.loss.rating_penalty_weight = config.get_double(
      "gan.rating_penalty_weight", gan.loss.rating_penalty_weight);
  gan.conditional = config.get_bool("gan.conditional", gan.conditional);
  return gan;
}

RecTrainConfig rec_from(const Config& config, bool adversarial) {
  RecTrainConfig rec;
  rec.d = static_cast<int>(config.get_int("rec.d", rec.d));
  rec.learning_rate =
      config.get_double("rec.learning_rate", rec.learning_rate);
  rec.epochs = static_cast<int>(config.get_int("rec.epochs", rec.epochs));
  rec.negatives_per_positive = static_cast<int>(config.get_int(
      "rec.negatives_per_positive", rec.negatives_per_positive));
  rec.l2 = config.get_double("rec.l2", rec.l2);
  if (adversarial) {
    AdversarialConfig adv;
    adv.perturb_magnitude =
        config.get_double("rec.perturb_magnitude", adv.perturb_magnitude);
    adv.adv_weight = config.get_double("rec.adv_weight", adv.adv_weight);
    rec.adversarial = adv;
  }
  return rec;
}

void write_histogram_csv(const std::string& path, const char* kind,
                         const std::map<int, std::int64_t>& hist) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "rating_count," << kind << "\n";
  for (const auto& [count, n] : hist) out << count << "," << n << "\n";
}

void write_histograms(const RatingsDataset& data, const std::string& dir) {
  RatingHistograms hist = rating_histograms(data);
  write_histogram_csv(dir + "/per_user_hist.csv", "users", hist.per_user);
  write_histogram_csv(dir + "/per_item_hist.csv", "items", hist.per_item);
}

std::vector<int> resolve_targets(const Config& config,
                                 const RatingsDataset& data,
                                 std::uint64_t seed) {
  if (config.has("attack.targets")) {
    std::vector<int> targets;
    for (const auto& id : config.get_string_list("attack.targets", {})) {
      int index = data.item_index(id);
      if (index < 0) throw DataError("unknown target item id: " + id);
      targets.push_back(index);
    }
    if (targets.empty()) throw UsageError("attack.targets is empty");
    return targets;
  }
  int count = static_cast<int>(config.get_int("attack.target_count", 1));
  Rng rng(derive_seed(seed, "cli.targets"));
  return select_targets(data, count, rng);
}

GeneratorCheckpoint load_generator_checkpoint(const Config& config) {
  std::string path = config.get_string("attack.generator", "");
  if (path.empty()) {
    throw UsageError(
        "GOAT needs a trained generator; set attack.generator to a "
        "checkpoint written by train-gan");
  }
  return load_generator(path);
}

std::vector<int> read_truth(const std::string& path,
                            const RatingsDataset& data) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open truth file: " + path);
  std::vector<int> truth;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int user = data.user_index(line);
    if (user < 0) throw DataError("unknown user id in truth file: " + line);
    truth.push_back(user);
  }
  return truth;
}

// ---------------------------------------------------------------- commands

void cmd_ingest(const CommonArgs& args) {
  RatingsDataset data = load_data(args);
  std::cout << "users: " << data.user_count() << "\n"
            << "items: " << data.item_count() << "\n"
            << "ratings: " << data.rating_count() << "\n"
            << "global mean: " << format_double(data.global_mean()) << "\n"
            << "global variance: " << format_double(data.global_variance())
            << "\n"
            << "derived profile cap: " << derive_max_ratings(data) << "\n";
  if (args.out_dir.empty()) return;
  ensure_dir(args.out_dir);
  json stats;
  stats["users"] = data.user_count();
  stats["items"] = data.item_count();
  stats["ratings"] = data.rating_count();
  stats["global_mean"] = data.global_mean();
  stats["global_variance"] = data.global_variance();
  stats["derived_max_ratings"] = derive_max_ratings(data);
  std::ofstream out(args.out_dir + "/stats.json", std::ios::binary);
  if (!out) throw DataError("cannot write " + args.out_dir + "/stats.json");
  out << stats.dump(1) << "\n";
  write_histograms(data, args.out_dir);
}

void cmd_thresholds(const CommonArgs& args) {
  Config config = load_config(args.config_path);
  RatingsDataset data = load_data(args);
  AttackThresholds t = thresholds_from(config, data);
  bool derived = config.get_int("attack.max_ratings", 0) == 0;
  std::cout << "min_ratings: " << t.min_ratings << "\n"
            << "max_ratings: " << t.max_ratings
            << (derived ? " (derived)\n" : "\n")
            << "popularity_floor: " << t.popularity_floor << "\n"
            << "selected_fraction: " << format_double(t.selected_fraction)
            << "\n";
  if (args.out_dir.empty()) return;
  ensure_dir(args.out_dir);
  json doc;
  doc["min_ratings"] = t.min_ratings;
  doc["max_ratings"] = t.max_ratings;
  doc["max_ratings_derived"] = derived;
  doc["popularity_floor"] = t.popularity_floor;
  doc["selected_fraction"] = t.selected_fraction;
  std::ofstream out(args.out_dir + "/thresholds.json", std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + args.out_dir + "/thresholds.json");
  }
  out << doc.dump(1) << "\n";
  write_histograms(data, args.out_dir);
}

void cmd_train_gan(const CommonArgs& args) {
  Config config = load_config(args.config_path);
  RatingsDataset data = load_data(args);
  ensure_dir(args.out_dir);

  GanTrainConfig gan = gan_from(config);
  gan.thresholds = thresholds_from(config, data);
  gan.seed = args.seed;
  ItemItemGraph graph = build_graph(data);
  GanTrainResult trained = train_gan(data, graph, gan);

  std::map<std::string, std::string> echo{
      {"epochs", std::to_string(gan.epochs)},
      {"critic_steps", std::to_string(gan.critic_steps)},
      {"learning_rate", format_double(gan.learning_rate)},
      {"gradient_penalty_weight",
       format_double(gan.loss.gradient_penalty_weight)},
      {"rating_penalty_weight",
       format_double(gan.loss.rating_penalty_weight)},
      {"conditional", gan.conditional ? "true" : "false"},
      {"max_ratings", std::to_string(gan.thresholds.max_ratings)},
  };
  save_generator(args.out_dir + "/generator.json", trained.generator, echo,
                 args.seed);
  write_history_csv(args.out_dir + "/gan_history.csv", trained.history);
  const GanEpochStats& last = trained.history.back();
  std::cout << "trained " << gan.epochs << " epochs, final loss_D "
            << format_double(last.loss_d) << ", loss_G "
            << format_double(last.loss_g) << "\n"
            << "generator: " << args.out_dir << "/generator.json\n";
}

void cmd_attack(const CommonArgs& args) {
  Config config = load_config(args.config_path);
  RatingsDataset data = load_data(args);
  ensure_dir(args.out_dir);

  AttackConfig attack;
  attack.kind =
      attack_kind_from_name(config.get_string("attack.kind", "GOAT"));
  attack.injection_fraction = config.get_double("attack.fraction", 0.05);
  attack.target_rating =
      static_cast<int>(config.get_int("attack.target_rating", 4));
  attack.thresholds = thresholds_from(config, data);
  attack.seed = args.seed;
  attack.targets = resolve_targets(config, data, args.seed);

  ItemItemGraph graph = build_graph(data);
  GeneratorCheckpoint checkpoint;
  const GeneratorParams* generator = nullptr;
  if (attack.kind == AttackKind::kGoat) {
    checkpoint = load_generator_checkpoint(config);
    generator = &checkpoint.params;
  }
  auto profiles = build_profiles(data, graph, attack, generator);
  save_profiles(args.out_dir + "/profiles.tsv",
                args.out_dir + "/profile_parts.tsv", profiles, data);
  {
    std::ofstream out(args.out_dir + "/targets.txt", std::ios::binary);
    if (!out) throw DataError("cannot write " + args.out_dir + "/targets.txt");
    for (int t : attack.targets) out << data.item_id(t) << "\n";
  }
  std::cout << "built " << profiles.size() << " "
            << attack_kind_name(attack.kind) << " profiles against "
            << attack.targets.size() << " target(s)\n"
            << "profiles: " << args.out_dir << "/profiles.tsv\n";
}

void cmd_inject(const CommonArgs& args, const std::string& profiles_path,
                const std::string& parts_path) {
  RatingsDataset data = load_data(args);
  ensure_dir(args.out_dir);
  auto profiles = load_profiles(profiles_path, parts_path, data);
  InjectionResult injected = inject(data, profiles);
  save_ratings(injected.poisoned, args.out_dir + "/poisoned.tsv",
               RatingsFormat::kTsv);
  {
    std::ofstream out(args.out_dir + "/fake_users.txt", std::ios::binary);
    if (!out) {
      throw DataError("cannot write " + args.out_dir + "/fake_users.txt");
    }
    for (const auto& id : injected.fake_user_ids) out << id << "\n";
  }
  std::cout << "injected " << profiles.size() << " profiles into "
            << data.user_count() << " users\n"
            << "poisoned: " << args.out_dir << "/poisoned.tsv\n";
}

void cmd_recommend(const CommonArgs& args) {
  Config config = load_config(args.config_path);
  RatingsDataset data = load_data(args);
  ensure_dir(args.out_dir);

  RecommenderKind kind =
      recommender_kind_from_name(config.get_string("rec.kind", "BPR"));
  RecTrainConfig rec = rec_from(config, kind == RecommenderKind::kApr);
  rec.seed = args.seed;
  MFModel model = kind == RecommenderKind::kBpr ? train_bpr(data, rec)
                                                : train_apr(data, rec);

  std::map<std::string, std::string> echo{
      {"kind", recommender_kind_name(kind)},
      {"d", std::to_string(rec.d)},
      {"learning_rate", format_double(rec.learning_rate)},
      {"epochs", std::to_string(rec.epochs)},
      {"negatives_per_positive",
       std::to_string(rec.negatives_per_positive)},
      {"l2", format_double(rec.l2)},
  };
  if (rec.adversarial) {
    echo["perturb_magnitude"] =
        format_double(rec.adversarial->perturb_magnitude);
    echo["adv_weight"] = format_double(rec.adversarial->adv_weight);
  }
  save_recommender(args.out_dir + "/recommender.json", model, echo,
                   args.seed);

  std::ofstream out(args.out_dir + "/recommendations.csv", std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + args.out_dir + "/recommendations.csv");
  }
  out << "user_id,rank,item_id,score\n";
  for (int u = 0; u < data.user_count(); ++u) {
    std::vector<int> rated;
    for (const auto& r : data.user_ratings(u)) rated.push_back(r.item);
    std::vector<int> top = recommend_top_n(model, u, 10, rated);
    for (std::size_t rank = 0; rank < top.size(); ++rank) {
      out << data.user_id(u) << "," << rank + 1 << ","
          << data.item_id(top[rank]) << ","
          << format_double(model.score(u, top[rank])) << "\n";
    }
  }
  std::cout << "trained " << recommender_kind_name(kind) << " (d=" << rec.d
            << ", epochs=" << rec.epochs << ") over " << data.user_count()
            << " users\n"
            << "recommendations: " << args.out_dir
            << "/recommendations.csv\n";
}

void cmd_evaluate(const CommonArgs& args, bool seed_given) {
  Config config = load_config(args.config_path);
  RatingsDataset data = load_data(args);

  ExperimentSpec spec;
  spec.dataset_path = args.data_path;
  spec.attacks.clear();
  for (const auto& name :
       config.get_string_list("experiment.attacks", {"GOAT"})) {
    spec.attacks.push_back(attack_kind_from_name(name));
  }
  spec.fractions = config.get_double_list("experiment.fractions",
                                          {0.01, 0.02, 0.03, 0.04, 0.05});
  spec.target_mode = target_mode_from_name(
      config.get_string("experiment.target_mode", "single"));
  spec.target_rating =
      static_cast<int>(config.get_int("attack.target_rating", 4));
  spec.recommenders.clear();
  for (const auto& name :
       config.get_string_list("experiment.recommenders", {"BPR"})) {
    spec.recommenders.push_back(recommender_kind_from_name(name));
  }
  spec.runs = static_cast<int>(config.get_int("experiment.runs", 10));
  spec.train_fraction =
      config.get_double("experiment.train_fraction", 0.7);
  spec.thresholds.min_ratings =
      static_cast<int>(config.get_int("attack.min_ratings", 6));
  spec.thresholds.max_ratings =
      static_cast<int>(config.get_int("attack.max_ratings", 0));
  spec.thresholds.popularity_floor =
      static_cast<int>(config.get_int("attack.popularity_floor", 8));
  spec.thresholds.selected_fraction =
      config.get_double("attack.selected_fraction", 0.3);
  spec.gan = gan_from(config);
  bool wants_apr =
      std::count(spec.recommenders.begin(), spec.recommenders.end(),
                 RecommenderKind::kApr) > 0;
  spec.rec = rec_from(config, wants_apr ||
                                  config.has("rec.perturb_magnitude") ||
                                  config.has("rec.adv_weight"));
  spec.with_detection =
      config.get_bool("experiment.with_detection", false);
  spec.detection_folds =
      static_cast<int>(config.get_int("experiment.detection_folds", 5));
  spec.seed = seed_given
                  ? args.seed
                  : static_cast<std::uint64_t>(
                        config.get_int("experiment.seed", 0));

  ExperimentResult result = run_experiment(data, spec);
  emit_outputs(result, args.out_dir);

  int failed = 0;
  for (const auto& cell : result.cells) {
    if (!cell.error.empty()) ++failed;
  }
  std::cout << "evaluated " << result.cells.size() << " cells ("
            << result.spec.runs << " runs each)";
  if (failed > 0) std::cout << ", " << failed << " failed";
  std::cout << "\nresults: " << args.out_dir << "/result.json\n";
}

json report_json(const DetectionReport& report, const RatingsDataset& data) {
  json j;
  j["config"] = report.config;
  json flagged = json::array();
  for (int user : report.flagged) flagged.push_back(data.user_id(user));
  j["flagged"] = flagged;
  j["scores"] = report.scores;
  if (report.precision) j["precision"] = *report.precision;
  if (report.recall) j["recall"] = *report.recall;
  return j;
}

void cmd_detect(const CommonArgs& args, const std::string& truth_path) {
  Config config = load_config(args.config_path);
  RatingsDataset data = load_data(args);
  ensure_dir(args.out_dir);

  std::string method = config.get_string("detect.method", "both");
  if (method != "pca" && method != "degree_sad" && method != "both") {
    throw UsageError("detect.method must be pca, degree_sad or both");
  }
  std::vector<int> truth;
  bool have_truth = !truth_path.empty();
  if (have_truth) truth = read_truth(truth_path, data);

  json doc;
  if (method == "pca" || method == "both") {
    int m = static_cast<int>(config.get_int(
        "detect.m", have_truth ? static_cast<long long>(truth.size()) : -1));
    if (m < 0) {
      throw UsageError("pca needs detect.m or a --truth file to size m");
    }
    DetectionReport report = detect_pca(data, m);
    if (have_truth) {
      auto [precision, recall] = score_detection(report.flagged, truth);
      report.precision = precision;
      report.recall = recall;
    }
    doc["pca"] = report_json(report, data);
    std::cout << "pca: flagged " << report.flagged.size();
    if (report.precision) {
      std::cout << ", precision " << format_double(*report.precision)
                << ", recall " << format_double(*report.recall);
    }
    std::cout << "\n";
  }
  if (method == "degree_sad" || method == "both") {
    if (!have_truth) {
      throw UsageError("degree_sad is supervised and needs --truth");
    }
    int folds = static_cast<int>(config.get_int("detect.folds", 5));
    DetectionReport report = detect_degreesad(data, truth, folds);
    doc["degree_sad"] = report_json(report, data);
    std::cout << "degree_sad: flagged " << report.flagged.size()
              << ", precision " << format_double(*report.precision)
              << ", recall " << format_double(*report.recall) << "\n";
  }
  std::ofstream out(args.out_dir + "/detection.json", std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + args.out_dir + "/detection.json");
  }
  out << doc.dump(1) << "\n";
  std::cout << "report: " << args.out_dir << "/detection.json\n";
}

void cmd_bench(const CommonArgs& args) {
  Config config = load_config(args.config_path);
  RatingsDataset data = load_data(args);
  ensure_dir(args.out_dir);

  int profiles = static_cast<int>(config.get_int("bench.profiles", 100));
  std::vector<AttackKind> kinds;
  for (const auto& name : config.get_string_list(
           "bench.kinds", {"GOAT", "Ave", "Ran", "Band", "UM"})) {
    kinds.push_back(attack_kind_from_name(name));
  }

  AttackThresholds thresholds = thresholds_from(config, data);
  ItemItemGraph graph = build_graph(data);
  GeneratorCheckpoint checkpoint;
  const GeneratorParams* generator = nullptr;
  if (std::count(kinds.begin(), kinds.end(), AttackKind::kGoat) > 0) {
    checkpoint = load_generator_checkpoint(config);
    generator = &checkpoint.params;
  }

  std::ofstream out(args.out_dir + "/bench.csv", std::ios::binary);
  if (!out) throw DataError("cannot write " + args.out_dir + "/bench.csv");
  out << "attack,profiles,nonzero_ratings\n";
  for (AttackKind kind : kinds) {
    BenchResult bench = bench_cost(
        data, graph, kind, profiles, thresholds,
        kind == AttackKind::kGoat ? generator : nullptr, args.seed);
    // Wall-clock time goes to stdout only; the document stays reproducible.
    char seconds[32];
    std::snprintf(seconds, sizeof(seconds), "%.4f", bench.seconds);
    std::cout << attack_kind_name(kind) << ": " << seconds << " s, "
              << bench.nonzero_ratings << " nonzero ratings ("
              << bench.profiles << " profiles)\n";
    out << attack_kind_name(kind) << "," << bench.profiles << ","
        << bench.nonzero_ratings << "\n";
  }
  std::cout << "table: " << args.out_dir << "/bench.csv\n";
}

void cmd_plot(const std::string& result_path, const std::string& out_dir) {
  ExperimentResult result = load_result(result_path);
  emit_plots(result, out_dir);
  std::cout << "plots: " << out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shilling-attack simulation pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string profiles_path, parts_path, truth_path, result_path;

  auto add_common = [&](CLI::App* sub, bool needs_data, bool needs_out) {
    sub->add_option("--config", args.config_path,
                    "key=value configuration file");
    auto* seed =
        sub->add_option("--seed", args.seed, "master random seed (default 0)");
    if (needs_data) {
      sub->add_option("--data", args.data_path, "ratings file")->required();
      sub->add_option("--format", args.format, "tsv or csv (default tsv)");
    }
    auto* out = sub->add_option("--out", args.out_dir, "output directory");
    if (needs_out) out->required();
    return seed;
  };

  auto* ingest = app.add_subcommand(
      "ingest", "validate a ratings file and report its statistics");
  add_common(ingest, true, false);
  ingest->callback([&] { cmd_ingest(args); });

  auto* thresholds = app.add_subcommand(
      "thresholds", "derive the profile-size cap and report histograms");
  add_common(thresholds, true, false);
  thresholds->callback([&] { cmd_thresholds(args); });

  auto* train_gan = app.add_subcommand(
      "train-gan", "train the rating generator and save a checkpoint");
  add_common(train_gan, true, true);
  train_gan->callback([&] { cmd_train_gan(args); });

  auto* attack = app.add_subcommand(
      "attack", "build fake profiles and write them as TSV");
  add_common(attack, true, true);
  attack->callback([&] { cmd_attack(args); });

  auto* inject = app.add_subcommand(
      "inject", "merge fake profiles into a dataset");
  add_common(inject, true, true);
  inject->add_option("--profiles", profiles_path, "profiles TSV from attack")
      ->required();
  inject->add_option("--parts", parts_path, "profile-part sidecar TSV")
      ->required();
  inject->callback([&] { cmd_inject(args, profiles_path, parts_path); });

  auto* recommend = app.add_subcommand(
      "recommend", "train a recommender and emit top-10 lists");
  add_common(recommend, true, true);
  recommend->callback([&] { cmd_recommend(args); });

  auto* evaluate = app.add_subcommand(
      "evaluate", "run the full attack x recommender x fraction grid");
  auto* eval_seed = add_common(evaluate, true, true);
  evaluate->callback(
      [&, eval_seed] { cmd_evaluate(args, eval_seed->count() > 0); });

  auto* detect = app.add_subcommand(
      "detect", "run shilling detectors over a poisoned dataset");
  add_common(detect, true, true);
  detect->add_option("--truth", truth_path,
                     "file of fake user ids, one per line");
  detect->callback([&] { cmd_detect(args, truth_path); });

  auto* bench = app.add_subcommand(
      "bench", "measure profile-generation cost per attack kind");
  add_common(bench, true, true);
  bench->callback([&] { cmd_bench(args); });

  auto* plot = app.add_subcommand(
      "plot", "regenerate SVG charts from a result document");
  plot->add_option("--result", result_path, "result.json from evaluate")
      ->required();
  plot->add_option("--out", args.out_dir, "output directory")->required();
  plot->callback([&] { cmd_plot(result_path, args.out_dir); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
