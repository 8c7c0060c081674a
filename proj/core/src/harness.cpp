#include "shillsim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>

#include "shillsim/detect.hpp"
#include "shillsim/errors.hpp"
#include "shillsim/format.hpp"
#include "shillsim/itemgraph.hpp"
#include "shillsim/metrics.hpp"
#include "shillsim/plot.hpp"
#include "shillsim/rng.hpp"

namespace shillsim {

using nlohmann::json;

std::string target_mode_name(TargetMode mode) {
  switch (mode) {
    case TargetMode::kSingle:
      return "single";
    case TargetMode::kMultiple:
      return "multiple";
  }
  throw UsageError("unknown target mode");
}

TargetMode target_mode_from_name(const std::string& name) {
  if (name == "single") return TargetMode::kSingle;
  if (name == "multiple") return TargetMode::kMultiple;
  throw UsageError("unknown target mode: " + name);
}

int target_mode_count(TargetMode mode) {
  return mode == TargetMode::kSingle ? 1 : 10;
}

std::int64_t RatingPattern::total() const {
  std::int64_t sum = 0;
  for (auto c : stars) sum += c;
  return sum;
}

RatingPattern rating_pattern(const RatingsDataset& data) {
  RatingPattern pattern;
  for (int u = 0; u < data.user_count(); ++u) {
    for (const auto& r : data.user_ratings(u)) ++pattern.stars[r.rating - 1];
  }
  return pattern;
}

RatingPattern profiles_pattern(const std::vector<FakeProfile>& profiles) {
  RatingPattern pattern;
  for (const auto& profile : profiles) {
    for (const auto& [item, rating] : profile.entries) {
      ++pattern.stars[rating - 1];
    }
  }
  return pattern;
}

namespace {

void validate_spec(const ExperimentSpec& spec) {
  if (spec.attacks.empty()) throw UsageError("experiment needs attack kinds");
  if (spec.fractions.empty()) {
    throw UsageError("experiment needs injection fractions");
  }
  for (double f : spec.fractions) {
    if (!(f > 0.0) || f > 0.2) {
      throw UsageError("injection fractions must lie in (0, 0.2]");
    }
  }
  if (spec.recommenders.empty()) {
    throw UsageError("experiment needs recommender kinds");
  }
  if (spec.runs < 1) throw UsageError("runs per cell must be positive");
  if (!(spec.train_fraction > 0.0) || !(spec.train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0, 1)");
  }
  if (spec.target_rating < 1 || spec.target_rating > 5) {
    throw UsageError("target rating must be a star value");
  }
  if (spec.with_detection && spec.detection_folds < 2) {
    throw UsageError("detection needs at least two folds");
  }
  bool wants_apr =
      std::count(spec.recommenders.begin(), spec.recommenders.end(),
                 RecommenderKind::kApr) > 0;
  if (wants_apr && !spec.rec.adversarial.has_value()) {
    throw UsageError("APR cells need rec.adversarial configured");
  }
}

// Cell coordinates, not list positions, feed the seed derivation; the
// fraction enters in micro-units so 0.01-style grids stay exact.
std::uint64_t fraction_key(double fraction) {
  return static_cast<std::uint64_t>(std::llround(fraction * 1e6));
}

std::uint64_t attack_cell_tag(AttackKind kind, double fraction) {
  return (static_cast<std::uint64_t>(kind) << 32) | fraction_key(fraction);
}

// Held-out items per real user, best-rated first; users absent from the test
// split keep an empty list.
TopLists relevant_lists(const RatingsDataset& test) {
  TopLists lists(test.user_count());
  for (int u = 0; u < test.user_count(); ++u) {
    auto ratings = test.user_ratings(u);
    std::sort(ratings.begin(), ratings.end(),
              [](const ItemRating& a, const ItemRating& b) {
                if (a.rating != b.rating) return a.rating > b.rating;
                return a.item < b.item;
              });
    for (const auto& r : ratings) lists[u].push_back(r.item);
  }
  return lists;
}

std::vector<std::vector<int>> train_exclusions(const RatingsDataset& train) {
  std::vector<std::vector<int>> exclude(train.user_count());
  for (int u = 0; u < train.user_count(); ++u) {
    for (const auto& r : train.user_ratings(u)) exclude[u].push_back(r.item);
  }
  return exclude;
}

TopLists top_lists(const MFModel& model, int real_users,
                   const std::vector<std::vector<int>>& exclude) {
  TopLists lists(real_users);
  for (int u = 0; u < real_users; ++u) {
    lists[u] = recommend_top_n(model, u, 10, exclude[u]);
  }
  return lists;
}

MFModel train_model(RecommenderKind kind, const RatingsDataset& train,
                    const RecTrainConfig& base, std::uint64_t seed) {
  RecTrainConfig config = base;
  config.seed = seed;
  if (kind == RecommenderKind::kBpr) {
    config.adversarial.reset();
    return train_bpr(train, config);
  }
  return train_apr(train, config);
}

MetricSet score_lists(const TopLists& lists, const std::vector<int>& targets,
                      const TopLists& relevant,
                      const std::vector<FakeProfile>* profiles) {
  MetricSet metrics;
  metrics.hit_ratio = hit_ratio_at_10(lists, targets);
  metrics.precision = precision_at_10(lists, relevant);
  metrics.ndcg = ndcg_at_10(lists, relevant);
  if (profiles != nullptr) {
    metrics.hr_prime = hr_prime_at_10(lists, *profiles);
  }
  return metrics;
}

MetricSet median_metrics(const std::vector<RunMetrics>& runs, bool attacked) {
  auto pick = [&](const RunMetrics& r) -> const MetricSet& {
    return attacked ? r.attacked : r.baseline;
  };
  std::vector<double> hr, prec, ndcg, prime;
  for (const auto& r : runs) {
    hr.push_back(pick(r).hit_ratio);
    prec.push_back(pick(r).precision);
    ndcg.push_back(pick(r).ndcg);
    if (pick(r).hr_prime) prime.push_back(*pick(r).hr_prime);
  }
  MetricSet med;
  med.hit_ratio = median(hr);
  med.precision = median(prec);
  med.ndcg = median(ndcg);
  if (prime.size() == runs.size()) med.hr_prime = median(prime);
  return med;
}

DetectionScores median_detection(const std::vector<DetectionRun>& runs) {
  std::vector<double> pp, pr, dp, dr;
  for (const auto& r : runs) {
    pp.push_back(r.scores.pca_precision);
    pr.push_back(r.scores.pca_recall);
    dp.push_back(r.scores.degree_precision);
    dr.push_back(r.scores.degree_recall);
  }
  return {median(pp), median(pr), median(dp), median(dr)};
}

}  // namespace

ExperimentResult run_experiment(const RatingsDataset& data,
                                const ExperimentSpec& spec) {
  validate_spec(spec);

  ExperimentResult result;
  result.spec = spec;

  SplitDataset parts =
      split(data, spec.train_fraction, derive_seed(spec.seed, "exp.split"));
  const RatingsDataset& train = parts.train;

  AttackThresholds thresholds = spec.thresholds;
  if (thresholds.max_ratings == 0) {
    thresholds.max_ratings = derive_max_ratings(train);
  }
  result.resolved_max_ratings = thresholds.max_ratings;

  ItemItemGraph graph = build_graph(train);
  {
    Rng target_rng(derive_seed(spec.seed, "exp.targets"));
    result.targets = select_targets(
        train, target_mode_count(spec.target_mode), target_rng);
  }
  for (int t : result.targets) result.target_ids.push_back(data.item_id(t));
  result.real_pattern = rating_pattern(train);

  const TopLists relevant = relevant_lists(parts.test);
  const auto exclude = train_exclusions(train);
  const int real_users = data.user_count();

  bool needs_gan =
      std::count(spec.attacks.begin(), spec.attacks.end(),
                 AttackKind::kGoat) > 0;
  std::vector<std::optional<GeneratorParams>> generators(spec.runs);
  if (needs_gan) result.gan_histories.resize(spec.runs);
  auto generator_for_run = [&](int run) -> const GeneratorParams& {
    if (!generators[run]) {
      GanTrainConfig config = spec.gan;
      config.thresholds = thresholds;
      config.seed = derive_seed(spec.seed, "exp.gan",
                                static_cast<std::uint64_t>(run));
      GanTrainResult trained = train_gan(train, graph, config);
      generators[run] = std::move(trained.generator);
      result.gan_histories[run] = std::move(trained.history);
    }
    return *generators[run];
  };

  // Baselines depend only on the recommender and the run.
  struct Baseline {
    TopLists lists;
    MetricSet metrics;
  };
  std::map<std::pair<int, int>, Baseline> baselines;
  auto baseline_for = [&](RecommenderKind kind, int run,
                          std::uint64_t seed) -> const Baseline& {
    auto key = std::make_pair(static_cast<int>(kind), run);
    auto it = baselines.find(key);
    if (it == baselines.end()) {
      Baseline base;
      MFModel model = train_model(kind, train, spec.rec, seed);
      base.lists = top_lists(model, real_users, exclude);
      base.metrics = score_lists(base.lists, result.targets, relevant, nullptr);
      it = baselines.emplace(key, std::move(base)).first;
    }
    return it->second;
  };

  result.cells.reserve(spec.attacks.size() * spec.fractions.size() *
                       spec.recommenders.size());
  if (spec.with_detection) {
    result.detection.reserve(spec.attacks.size() * spec.fractions.size());
  }

  std::map<AttackKind, RatingPattern> patterns;
  for (AttackKind attack : spec.attacks) {
    for (double fraction : spec.fractions) {
      std::vector<ExperimentCell*> row;
      for (RecommenderKind rec : spec.recommenders) {
        ExperimentCell cell;
        cell.attack = attack;
        cell.fraction = fraction;
        cell.recommender = rec;
        cell.planned_runs = spec.runs;
        result.cells.push_back(cell);
      }
      for (std::size_t k = 0; k < spec.recommenders.size(); ++k) {
        row.push_back(&result.cells[result.cells.size() -
                                    spec.recommenders.size() + k]);
      }
      DetectionCell* det = nullptr;
      if (spec.with_detection) {
        DetectionCell cell;
        cell.attack = attack;
        cell.fraction = fraction;
        cell.planned_runs = spec.runs;
        result.detection.push_back(cell);
        det = &result.detection.back();
      }

      for (int run = 0; run < spec.runs; ++run) {
        AttackConfig attack_config;
        attack_config.kind = attack;
        attack_config.injection_fraction = fraction;
        attack_config.targets = result.targets;
        attack_config.target_rating = spec.target_rating;
        attack_config.thresholds = thresholds;
        attack_config.seed = derive_seed(spec.seed, "exp.attack",
                                         attack_cell_tag(attack, fraction),
                                         static_cast<std::uint64_t>(run));

        std::vector<FakeProfile> profiles;
        InjectionResult injected;
        try {
          const GeneratorParams* generator =
              attack == AttackKind::kGoat ? &generator_for_run(run) : nullptr;
          profiles = build_profiles(train, graph, attack_config, generator);
          injected = inject(train, profiles);
        } catch (const std::exception& e) {
          for (ExperimentCell* cell : row) cell->error = e.what();
          if (det != nullptr) det->error = e.what();
          break;
        }
        {
          RatingPattern batch = profiles_pattern(profiles);
          auto& sink = patterns[attack];
          for (int s = 0; s < 5; ++s) sink.stars[s] += batch.stars[s];
        }

        for (std::size_t k = 0; k < spec.recommenders.size(); ++k) {
          ExperimentCell* cell = row[k];
          if (!cell->error.empty()) continue;
          RecommenderKind rec = spec.recommenders[k];
          std::uint64_t rec_seed =
              derive_seed(spec.seed, "exp.rec",
                          static_cast<std::uint64_t>(rec),
                          static_cast<std::uint64_t>(run));
          try {
            const Baseline& base = baseline_for(rec, run, rec_seed);
            MFModel model =
                train_model(rec, injected.poisoned, spec.rec, rec_seed);
            TopLists lists = top_lists(model, real_users, exclude);
            RunMetrics record;
            record.run = run;
            record.attack_seed = attack_config.seed;
            record.rec_seed = rec_seed;
            record.baseline = base.metrics;
            record.attacked =
                score_lists(lists, result.targets, relevant, &profiles);
            cell->runs.push_back(std::move(record));
          } catch (const std::exception& e) {
            cell->error = e.what();
          }
        }

        if (det != nullptr && det->error.empty()) {
          try {
            std::vector<int> fake_truth;
            for (const auto& id : injected.fake_user_ids) {
              fake_truth.push_back(injected.poisoned.user_index(id));
            }
            DetectionRun record;
            record.run = run;
            DetectionReport pca = detect_pca(
                injected.poisoned, static_cast<int>(profiles.size()));
            auto [pp, pr] = score_detection(pca.flagged, fake_truth);
            record.scores.pca_precision = pp;
            record.scores.pca_recall = pr;
            DetectionReport degree = detect_degreesad(
                injected.poisoned, fake_truth, spec.detection_folds);
            record.scores.degree_precision = degree.precision.value_or(0.0);
            record.scores.degree_recall = degree.recall.value_or(0.0);
            det->runs.push_back(record);
          } catch (const std::exception& e) {
            det->error = e.what();
          }
        }
      }
    }
  }

  for (auto& cell : result.cells) {
    if (cell.error.empty() && !cell.runs.empty()) {
      cell.median_baseline = median_metrics(cell.runs, false);
      cell.median_attacked = median_metrics(cell.runs, true);
    }
  }
  for (auto& cell : result.detection) {
    if (cell.error.empty() && !cell.runs.empty()) {
      cell.median = median_detection(cell.runs);
    }
  }
  for (auto& [kind, pattern] : patterns) {
    result.generated_patterns.emplace_back(kind, pattern);
  }
  return result;
}

BenchResult bench_cost(const RatingsDataset& data, const ItemItemGraph& graph,
                       AttackKind kind, int n_profiles,
                       const AttackThresholds& thresholds,
                       const GeneratorParams* generator, std::uint64_t seed) {
  if (n_profiles < 0) throw UsageError("profile count cannot be negative");
  BenchResult bench;
  if (n_profiles == 0) return bench;

  auto start = std::chrono::steady_clock::now();
  auto profiles = build_profile_batch(data, graph, kind, n_profiles,
                                      thresholds, generator, seed);
  auto stop = std::chrono::steady_clock::now();
  bench.seconds = std::chrono::duration<double>(stop - start).count();
  bench.profiles = n_profiles;
  for (const auto& profile : profiles) {
    for (const auto& [item, rating] : profile.entries) {
      if (rating > 0.5) ++bench.nonzero_ratings;
    }
  }
  return bench;
}

namespace {

json metric_json(const MetricSet& metrics) {
  json j;
  j["hr10"] = metrics.hit_ratio;
  j["precision10"] = metrics.precision;
  j["ndcg10"] = metrics.ndcg;
  if (metrics.hr_prime) j["hr_prime10"] = *metrics.hr_prime;
  return j;
}

json detection_json(const DetectionScores& scores) {
  return json{{"pca_precision", scores.pca_precision},
              {"pca_recall", scores.pca_recall},
              {"degree_precision", scores.degree_precision},
              {"degree_recall", scores.degree_recall}};
}

json pattern_json(const RatingPattern& pattern) {
  return json(pattern.stars);
}

json spec_json(const ExperimentSpec& spec) {
  json j;
  j["dataset_path"] = spec.dataset_path;
  json attacks = json::array();
  for (auto a : spec.attacks) attacks.push_back(attack_kind_name(a));
  j["attacks"] = attacks;
  j["fractions"] = spec.fractions;
  j["target_mode"] = target_mode_name(spec.target_mode);
  j["target_rating"] = spec.target_rating;
  json recs = json::array();
  for (auto r : spec.recommenders) recs.push_back(recommender_kind_name(r));
  j["recommenders"] = recs;
  j["runs"] = spec.runs;
  j["train_fraction"] = spec.train_fraction;
  j["thresholds"] = {{"min_ratings", spec.thresholds.min_ratings},
                     {"max_ratings", spec.thresholds.max_ratings},
                     {"popularity_floor", spec.thresholds.popularity_floor},
                     {"selected_fraction", spec.thresholds.selected_fraction}};
  j["gan"] = {{"epochs", spec.gan.epochs},
              {"critic_steps", spec.gan.critic_steps},
              {"learning_rate", spec.gan.learning_rate},
              {"gradient_penalty_weight",
               spec.gan.loss.gradient_penalty_weight},
              {"rating_penalty_weight", spec.gan.loss.rating_penalty_weight},
              {"conditional", spec.gan.conditional}};
  j["rec"] = {{"d", spec.rec.d},
              {"learning_rate", spec.rec.learning_rate},
              {"epochs", spec.rec.epochs},
              {"negatives_per_positive", spec.rec.negatives_per_positive},
              {"l2", spec.rec.l2}};
  if (spec.rec.adversarial) {
    j["rec"]["adversarial"] = {
        {"perturb_magnitude", spec.rec.adversarial->perturb_magnitude},
        {"adv_weight", spec.rec.adversarial->adv_weight}};
  }
  j["with_detection"] = spec.with_detection;
  j["detection_folds"] = spec.detection_folds;
  j["seed"] = spec.seed;
  return j;
}

json result_json(const ExperimentResult& result) {
  json j;
  j["format"] = "shillsim-experiment";
  j["version"] = 1;
  j["spec"] = spec_json(result.spec);
  j["resolved_max_ratings"] = result.resolved_max_ratings;
  json targets = json::array();
  for (std::size_t i = 0; i < result.targets.size(); ++i) {
    targets.push_back(
        {{"index", result.targets[i]}, {"id", result.target_ids[i]}});
  }
  j["targets"] = targets;

  json cells = json::array();
  for (const auto& cell : result.cells) {
    json c;
    c["attack"] = attack_kind_name(cell.attack);
    c["fraction"] = cell.fraction;
    c["recommender"] = recommender_kind_name(cell.recommender);
    c["planned_runs"] = cell.planned_runs;
    json runs = json::array();
    for (const auto& run : cell.runs) {
      runs.push_back({{"run", run.run},
                      {"attack_seed", run.attack_seed},
                      {"rec_seed", run.rec_seed},
                      {"baseline", metric_json(run.baseline)},
                      {"attacked", metric_json(run.attacked)}});
    }
    c["runs"] = runs;
    if (cell.median_baseline) {
      c["median_baseline"] = metric_json(*cell.median_baseline);
    }
    if (cell.median_attacked) {
      c["median_attacked"] = metric_json(*cell.median_attacked);
    }
    if (!cell.error.empty()) c["error"] = cell.error;
    cells.push_back(c);
  }
  j["cells"] = cells;

  if (!result.detection.empty()) {
    json detection = json::array();
    for (const auto& cell : result.detection) {
      json c;
      c["attack"] = attack_kind_name(cell.attack);
      c["fraction"] = cell.fraction;
      c["planned_runs"] = cell.planned_runs;
      json runs = json::array();
      for (const auto& run : cell.runs) {
        json r = detection_json(run.scores);
        r["run"] = run.run;
        runs.push_back(r);
      }
      c["runs"] = runs;
      if (cell.median) c["median"] = detection_json(*cell.median);
      if (!cell.error.empty()) c["error"] = cell.error;
      detection.push_back(c);
    }
    j["detection"] = detection;
  }

  json patterns;
  patterns["real"] = pattern_json(result.real_pattern);
  for (const auto& [kind, pattern] : result.generated_patterns) {
    patterns[attack_kind_name(kind)] = pattern_json(pattern);
  }
  j["rating_patterns"] = patterns;
  return j;
}

std::string csv_safe(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n') c = ';';
  }
  return text;
}

void write_cells_csv(const ExperimentResult& result,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "attack,fraction,recommender,runs,baseline_hr10,baseline_precision10,"
         "baseline_ndcg10,attacked_hr10,attacked_hr_prime10,"
         "attacked_precision10,attacked_ndcg10,error\n";
  for (const auto& cell : result.cells) {
    out << attack_kind_name(cell.attack) << "," << format_double(cell.fraction)
        << "," << recommender_kind_name(cell.recommender) << ","
        << cell.runs.size() << ",";
    if (cell.median_baseline && cell.median_attacked) {
      const MetricSet& base = *cell.median_baseline;
      const MetricSet& post = *cell.median_attacked;
      out << format_double(base.hit_ratio) << ","
          << format_double(base.precision) << "," << format_double(base.ndcg)
          << "," << format_double(post.hit_ratio) << ","
          << (post.hr_prime ? format_double(*post.hr_prime) : std::string())
          << "," << format_double(post.precision) << ","
          << format_double(post.ndcg);
    } else {
      out << ",,,,,,";
    }
    out << "," << csv_safe(cell.error) << "\n";
  }
}

void write_runs_csv(const ExperimentResult& result,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "attack,fraction,recommender,run,attack_seed,rec_seed,baseline_hr10,"
         "baseline_precision10,baseline_ndcg10,attacked_hr10,"
         "attacked_hr_prime10,attacked_precision10,attacked_ndcg10\n";
  for (const auto& cell : result.cells) {
    for (const auto& run : cell.runs) {
      out << attack_kind_name(cell.attack) << ","
          << format_double(cell.fraction) << ","
          << recommender_kind_name(cell.recommender) << "," << run.run << ","
          << run.attack_seed << "," << run.rec_seed << ","
          << format_double(run.baseline.hit_ratio) << ","
          << format_double(run.baseline.precision) << ","
          << format_double(run.baseline.ndcg) << ","
          << format_double(run.attacked.hit_ratio) << ","
          << (run.attacked.hr_prime ? format_double(*run.attacked.hr_prime)
                                    : std::string())
          << "," << format_double(run.attacked.precision) << ","
          << format_double(run.attacked.ndcg) << "\n";
    }
  }
}

void write_detection_csv(const ExperimentResult& result,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "attack,fraction,run,pca_precision,pca_recall,degree_precision,"
         "degree_recall,error\n";
  for (const auto& cell : result.detection) {
    for (const auto& run : cell.runs) {
      out << attack_kind_name(cell.attack) << ","
          << format_double(cell.fraction) << "," << run.run << ","
          << format_double(run.scores.pca_precision) << ","
          << format_double(run.scores.pca_recall) << ","
          << format_double(run.scores.degree_precision) << ","
          << format_double(run.scores.degree_recall) << ",\n";
    }
    if (cell.median) {
      out << attack_kind_name(cell.attack) << ","
          << format_double(cell.fraction) << ",median,"
          << format_double(cell.median->pca_precision) << ","
          << format_double(cell.median->pca_recall) << ","
          << format_double(cell.median->degree_precision) << ","
          << format_double(cell.median->degree_recall) << ",\n";
    }
    if (!cell.error.empty()) {
      out << attack_kind_name(cell.attack) << ","
          << format_double(cell.fraction) << ",,,,,," << csv_safe(cell.error)
          << "\n";
    }
  }
}

struct MetricColumn {
  const char* slug;
  const char* label;
  std::optional<double> (*value)(const MetricSet&);
};

std::optional<double> col_hr(const MetricSet& m) { return m.hit_ratio; }
std::optional<double> col_prime(const MetricSet& m) { return m.hr_prime; }
std::optional<double> col_precision(const MetricSet& m) {
  return m.precision;
}
std::optional<double> col_ndcg(const MetricSet& m) { return m.ndcg; }

void write_metric_charts(const ExperimentResult& result,
                         const std::filesystem::path& plot_dir) {
  const MetricColumn columns[] = {
      {"hr10", "HR@10", col_hr},
      {"hr_prime10", "HR'@10", col_prime},
      {"precision10", "Precision@10", col_precision},
      {"ndcg10", "NDCG@10", col_ndcg},
  };
  for (RecommenderKind rec : result.spec.recommenders) {
    for (const auto& column : columns) {
      std::vector<PlotSeries> series;
      for (AttackKind attack : result.spec.attacks) {
        PlotSeries line;
        line.label = attack_kind_name(attack);
        for (const auto& cell : result.cells) {
          if (cell.attack != attack || cell.recommender != rec) continue;
          if (!cell.median_attacked) continue;
          auto value = column.value(*cell.median_attacked);
          if (!value) continue;
          line.xs.push_back(cell.fraction);
          line.ys.push_back(*value);
        }
        if (!line.xs.empty()) series.push_back(std::move(line));
      }
      // The clean model as a flat reference line; it has no HR'.  One
      // attack's cells suffice, baselines are shared across attacks.
      PlotSeries clean;
      clean.label = "clean";
      for (const auto& cell : result.cells) {
        if (cell.attack != result.spec.attacks.front()) continue;
        if (cell.recommender != rec || !cell.median_baseline) continue;
        auto value = column.value(*cell.median_baseline);
        if (!value) continue;
        clean.xs.push_back(cell.fraction);
        clean.ys.push_back(*value);
      }
      if (!clean.xs.empty()) series.push_back(std::move(clean));
      if (series.empty()) continue;
      std::string name = std::string(column.slug) + "_" +
                         recommender_kind_name(rec) + ".svg";
      write_line_chart((plot_dir / name).string(),
                       std::string(column.label) + " vs injection size (" +
                           recommender_kind_name(rec) + ")",
                       "injection fraction", column.label, series);
    }
  }
}

void write_pattern_chart(const ExperimentResult& result,
                         const std::filesystem::path& plot_dir) {
  std::vector<std::string> labels{"real"};
  std::vector<const RatingPattern*> sources{&result.real_pattern};
  for (const auto& [kind, pattern] : result.generated_patterns) {
    labels.push_back(attack_kind_name(kind));
    sources.push_back(&pattern);
  }
  if (result.real_pattern.total() == 0) return;

  std::vector<BarGroup> groups;
  for (int star = 1; star <= 5; ++star) {
    BarGroup group;
    group.label = std::to_string(star) + " star";
    for (const RatingPattern* pattern : sources) {
      std::int64_t total = pattern->total();
      group.values.push_back(
          total == 0 ? 0.0
                     : static_cast<double>(pattern->stars[star - 1]) / total);
    }
    groups.push_back(std::move(group));
  }
  write_bar_chart((plot_dir / "rating_pattern.svg").string(),
                  "Rating-value distribution, real vs generated",
                  "fraction of ratings", labels, groups);
}

}  // namespace

void emit_outputs(const ExperimentResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw DataError("cannot create output directory: " + out_dir);
  }

  {
    std::ofstream out(dir / "result.json", std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / "result.json").string());
    out << result_json(result).dump(1) << "\n";
  }
  write_cells_csv(result, dir / "cells.csv");
  write_runs_csv(result, dir / "runs.csv");
  if (!result.detection.empty()) {
    write_detection_csv(result, dir / "detection.csv");
  }
  for (std::size_t run = 0; run < result.gan_histories.size(); ++run) {
    if (result.gan_histories[run].empty()) continue;
    char name[40];
    std::snprintf(name, sizeof(name), "gan_history_run%02zu.csv", run);
    write_history_csv((dir / name).string(), result.gan_histories[run]);
  }

  if (result.cells.empty()) return;
  emit_plots(result, (dir / "plots").string());
}

void emit_plots(const ExperimentResult& result, const std::string& plot_dir) {
  namespace fs = std::filesystem;
  fs::path dir(plot_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw DataError("cannot create plot directory: " + plot_dir);
  }
  write_metric_charts(result, dir);
  write_pattern_chart(result, dir);
}

namespace {

MetricSet metric_from_json(const json& j) {
  MetricSet metrics;
  metrics.hit_ratio = j.at("hr10").get<double>();
  metrics.precision = j.at("precision10").get<double>();
  metrics.ndcg = j.at("ndcg10").get<double>();
  if (j.contains("hr_prime10")) {
    metrics.hr_prime = j.at("hr_prime10").get<double>();
  }
  return metrics;
}

DetectionScores detection_from_json(const json& j) {
  DetectionScores scores;
  scores.pca_precision = j.at("pca_precision").get<double>();
  scores.pca_recall = j.at("pca_recall").get<double>();
  scores.degree_precision = j.at("degree_precision").get<double>();
  scores.degree_recall = j.at("degree_recall").get<double>();
  return scores;
}

RatingPattern pattern_from_json(const json& j) {
  RatingPattern pattern;
  pattern.stars = j.get<std::array<std::int64_t, 5>>();
  return pattern;
}

}  // namespace

ExperimentResult load_result(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open result document: " + path);
  try {
    json j = json::parse(in);
    if (j.value("format", "") != "shillsim-experiment") {
      throw DataError("not a result document: " + path);
    }

    ExperimentResult result;
    const json& s = j.at("spec");
    result.spec.dataset_path = s.at("dataset_path").get<std::string>();
    result.spec.attacks.clear();
    for (const auto& name : s.at("attacks")) {
      result.spec.attacks.push_back(
          attack_kind_from_name(name.get<std::string>()));
    }
    result.spec.fractions = s.at("fractions").get<std::vector<double>>();
    result.spec.target_mode =
        target_mode_from_name(s.at("target_mode").get<std::string>());
    result.spec.target_rating = s.at("target_rating").get<int>();
    result.spec.recommenders.clear();
    for (const auto& name : s.at("recommenders")) {
      result.spec.recommenders.push_back(
          recommender_kind_from_name(name.get<std::string>()));
    }
    result.spec.runs = s.at("runs").get<int>();
    result.spec.train_fraction = s.at("train_fraction").get<double>();
    const json& th = s.at("thresholds");
    result.spec.thresholds.min_ratings = th.at("min_ratings").get<int>();
    result.spec.thresholds.max_ratings = th.at("max_ratings").get<int>();
    result.spec.thresholds.popularity_floor =
        th.at("popularity_floor").get<int>();
    result.spec.thresholds.selected_fraction =
        th.at("selected_fraction").get<double>();
    const json& g = s.at("gan");
    result.spec.gan.epochs = g.at("epochs").get<int>();
    result.spec.gan.critic_steps = g.at("critic_steps").get<int>();
    result.spec.gan.learning_rate = g.at("learning_rate").get<double>();
    result.spec.gan.loss.gradient_penalty_weight =
        g.at("gradient_penalty_weight").get<double>();
    result.spec.gan.loss.rating_penalty_weight =
        g.at("rating_penalty_weight").get<double>();
    result.spec.gan.conditional = g.at("conditional").get<bool>();
    const json& r = s.at("rec");
    result.spec.rec.d = r.at("d").get<int>();
    result.spec.rec.learning_rate = r.at("learning_rate").get<double>();
    result.spec.rec.epochs = r.at("epochs").get<int>();
    result.spec.rec.negatives_per_positive =
        r.at("negatives_per_positive").get<int>();
    result.spec.rec.l2 = r.at("l2").get<double>();
    if (r.contains("adversarial")) {
      AdversarialConfig adv;
      adv.perturb_magnitude =
          r.at("adversarial").at("perturb_magnitude").get<double>();
      adv.adv_weight = r.at("adversarial").at("adv_weight").get<double>();
      result.spec.rec.adversarial = adv;
    }
    result.spec.with_detection = s.at("with_detection").get<bool>();
    result.spec.detection_folds = s.at("detection_folds").get<int>();
    result.spec.seed = s.at("seed").get<std::uint64_t>();

    result.resolved_max_ratings = j.at("resolved_max_ratings").get<int>();
    for (const auto& t : j.at("targets")) {
      result.targets.push_back(t.at("index").get<int>());
      result.target_ids.push_back(t.at("id").get<std::string>());
    }

    for (const auto& c : j.at("cells")) {
      ExperimentCell cell;
      cell.attack = attack_kind_from_name(c.at("attack").get<std::string>());
      cell.fraction = c.at("fraction").get<double>();
      cell.recommender =
          recommender_kind_from_name(c.at("recommender").get<std::string>());
      cell.planned_runs = c.at("planned_runs").get<int>();
      for (const auto& run : c.at("runs")) {
        RunMetrics record;
        record.run = run.at("run").get<int>();
        record.attack_seed = run.at("attack_seed").get<std::uint64_t>();
        record.rec_seed = run.at("rec_seed").get<std::uint64_t>();
        record.baseline = metric_from_json(run.at("baseline"));
        record.attacked = metric_from_json(run.at("attacked"));
        cell.runs.push_back(std::move(record));
      }
      if (c.contains("median_baseline")) {
        cell.median_baseline = metric_from_json(c.at("median_baseline"));
      }
      if (c.contains("median_attacked")) {
        cell.median_attacked = metric_from_json(c.at("median_attacked"));
      }
      cell.error = c.value("error", "");
      result.cells.push_back(std::move(cell));
    }

    if (j.contains("detection")) {
      for (const auto& c : j.at("detection")) {
        DetectionCell cell;
        cell.attack = attack_kind_from_name(c.at("attack").get<std::string>());
        cell.fraction = c.at("fraction").get<double>();
        cell.planned_runs = c.at("planned_runs").get<int>();
        for (const auto& run : c.at("runs")) {
          DetectionRun record;
          record.run = run.at("run").get<int>();
          record.scores = detection_from_json(run);
          cell.runs.push_back(record);
        }
        if (c.contains("median")) {
          cell.median = detection_from_json(c.at("median"));
        }
        cell.error = c.value("error", "");
        result.detection.push_back(std::move(cell));
      }
    }

    const json& patterns = j.at("rating_patterns");
    result.real_pattern = pattern_from_json(patterns.at("real"));
    for (const auto& [key, value] : patterns.items()) {
      if (key == "real") continue;
      result.generated_patterns.emplace_back(attack_kind_from_name(key),
                                             pattern_from_json(value));
    }
    return result;
  } catch (const json::exception& e) {
    throw DataError("malformed result document " + path + ": " + e.what());
  } catch (const UsageError& e) {
    throw DataError("malformed result document " + path + ": " + e.what());
  }
}

}  // namespace shillsim
