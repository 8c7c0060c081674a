#include "shillsim/attack.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

#include "shillsim/errors.hpp"

namespace shillsim {

std::string attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::kGoat:
      return "GOAT";
    case AttackKind::kAve:
      return "Ave";
    case AttackKind::kRan:
      return "Ran";
    case AttackKind::kBand:
      return "Band";
    case AttackKind::kUm:
      return "UM";
  }
  throw UsageError("unknown attack kind");
}

AttackKind attack_kind_from_name(const std::string& name) {
  if (name == "GOAT") return AttackKind::kGoat;
  if (name == "Ave") return AttackKind::kAve;
  if (name == "Ran") return AttackKind::kRan;
  if (name == "Band") return AttackKind::kBand;
  if (name == "UM") return AttackKind::kUm;
  throw UsageError("unknown attack kind: " + name);
}

std::string part_name(ProfilePart part) {
  switch (part) {
    case ProfilePart::kSelected:
      return "selected";
    case ProfilePart::kFiller:
      return "filler";
    case ProfilePart::kTarget:
      return "target";
  }
  throw UsageError("unknown profile part");
}

ProfilePart part_from_name(const std::string& name) {
  if (name == "selected") return ProfilePart::kSelected;
  if (name == "filler") return ProfilePart::kFiller;
  if (name == "target") return ProfilePart::kTarget;
  throw UsageError("unknown profile part: " + name);
}

std::vector<int> select_targets(const RatingsDataset& data, int n, Rng& rng) {
  if (n < 1) throw UsageError("target count must be positive");
  std::vector<int> pool;
  for (int i = 0; i < data.item_count(); ++i) {
    if (data.per_item_count(i) >= 1 && data.per_item_mean(i) < 2.0) {
      pool.push_back(i);
    }
  }
  if (static_cast<int>(pool.size()) < n) {
    throw DataError("only " + std::to_string(pool.size()) +
                    " items have a mean rating below two stars, " +
                    std::to_string(n) + " targets requested");
  }
  auto targets = rng.sample(pool, n);
  std::sort(targets.begin(), targets.end());
  return targets;
}

int clip_round_rating(double value) {
  double clipped = std::min(5.0, std::max(1.0, value));
  return static_cast<int>(std::floor(clipped + 0.5));
}

FakeProfile assemble_profile(const std::string& profile_id,
                             const SampledProfileItems& sampled,
                             const Eigen::VectorXd& ratings,
                             const AttackConfig& config) {
  if (static_cast<int>(ratings.size()) != sampled.size()) {
    throw UsageError("need exactly one rating value per sampled item");
  }
  if (config.target_rating < 1 || config.target_rating > 5) {
    throw UsageError("target rating must be a star in [1, 5]");
  }
  std::set<int> targets(config.targets.begin(), config.targets.end());

  FakeProfile p;
  p.profile_id = profile_id;
  p.scheme = config.kind;
  int slot = 0;
  auto add_part = [&](const std::vector<int>& items, ProfilePart part) {
    for (int item : items) {
      if (targets.count(item)) {
        throw DataError("sampled item " + std::to_string(item) +
                        " is also an attack target");
      }
      if (p.entries.count(item)) {
        throw DataError("item " + std::to_string(item) +
                        " appears twice in the profile skeleton");
      }
      p.entries[item] = clip_round_rating(ratings(slot));
      p.part_of[item] = part;
      ++slot;
    }
  };
  add_part(sampled.selected, ProfilePart::kSelected);
  add_part(sampled.filler, ProfilePart::kFiller);
  for (int t : targets) {
    p.entries[t] = config.target_rating;
    p.part_of[t] = ProfilePart::kTarget;
  }
  return p;
}

Eigen::VectorXd baseline_ratings(AttackKind kind,
                                 const SampledProfileItems& sampled,
                                 const RatingsDataset& data, Rng& rng) {
  int k = sampled.size();
  if (k <= 0) throw UsageError("empty profile skeleton");
  Eigen::VectorXd out(k);
  auto item_draw = [&](int item) {
    return clip_round_rating(rng.normal(
        data.per_item_mean(item), std::sqrt(data.per_item_variance(item))));
  };
  switch (kind) {
    case AttackKind::kAve: {
      int slot = 0;
      for (int item : sampled.selected) out(slot++) = item_draw(item);
      for (int item : sampled.filler) out(slot++) = item_draw(item);
      return out;
    }
    case AttackKind::kRan: {
      double mean = data.global_mean();
      double sd = std::sqrt(data.global_variance());
      for (int slot = 0; slot < k; ++slot) {
        out(slot) = clip_round_rating(rng.normal(mean, sd));
      }
      return out;
    }
    case AttackKind::kBand: {
      int slot = 0;
      for (std::size_t i = 0; i < sampled.selected.size(); ++i) {
        out(slot++) = 5.0;
      }
      for (int item : sampled.filler) out(slot++) = item_draw(item);
      return out;
    }
    case AttackKind::kUm: {
      std::uint64_t pick = rng.below(3);
      AttackKind resolved = pick == 0   ? AttackKind::kAve
                            : pick == 1 ? AttackKind::kRan
                                        : AttackKind::kBand;
      return baseline_ratings(resolved, sampled, data, rng);
    }
    case AttackKind::kGoat:
      break;
  }
  throw UsageError("GOAT ratings come from the trained generator");
}

SampledProfileItems band_selected_replacement(
    const SampledProfileItems& sampled, const ItemItemGraph& graph,
    const AttackThresholds& thresholds, const std::vector<int>& excluded) {
  std::set<int> skip(excluded.begin(), excluded.end());
  skip.insert(sampled.filler.begin(), sampled.filler.end());
  std::vector<int> pool;
  for (int item :
       eligible_candidates(graph, ProfilePart::kSelected, thresholds)) {
    if (!skip.count(item)) pool.push_back(item);
  }
  int need = static_cast<int>(sampled.selected.size());
  if (static_cast<int>(pool.size()) < need) {
    throw DataError("only " + std::to_string(pool.size()) +
                    " popular items available for the bandwagon selected "
                    "part, " +
                    std::to_string(need) + " needed");
  }
  // eligible_candidates is index-ascending, so a stable sort keeps the
  // documented tie break.
  std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
    return graph.popularity(a) > graph.popularity(b);
  });
  SampledProfileItems out = sampled;
  out.selected.assign(pool.begin(), pool.begin() + need);
  return out;
}

namespace {

FakeProfile one_profile(const RatingsDataset& data, const ItemItemGraph& graph,
                        const AttackConfig& config,
                        const std::set<int>& target_set, int p,
                        const GeneratorParams* generator) {
  Rng prof_rng(derive_seed(config.seed, "attack.profile",
                           static_cast<std::uint64_t>(p)));
  SampledProfileItems sampled;
  bool clean = false;
  for (int attempt = 0; attempt < 64 && !clean; ++attempt) {
    sampled = sample_profile_items(graph, data, config.thresholds,
                                   config.thresholds.max_ratings, prof_rng);
    clean = true;
    for (int item : sampled.selected) {
      if (target_set.count(item)) clean = false;
    }
    for (int item : sampled.filler) {
      if (target_set.count(item)) clean = false;
    }
  }
  if (!clean) {
    throw DataError(
        "could not sample a profile skeleton avoiding the target items");
  }

  AttackKind scheme = config.kind;
  if (scheme == AttackKind::kUm) {
    std::uint64_t pick = prof_rng.below(3);
    scheme = pick == 0   ? AttackKind::kAve
             : pick == 1 ? AttackKind::kRan
                         : AttackKind::kBand;
  }
  if (scheme == AttackKind::kBand) {
    sampled = band_selected_replacement(sampled, graph, config.thresholds,
                                        config.targets);
  }

  Eigen::VectorXd values;
  if (scheme == AttackKind::kGoat) {
    values = generate_ratings(*generator, sampled, data,
                              derive_seed(config.seed, "attack.ratings",
                                          static_cast<std::uint64_t>(p)));
  } else {
    values = baseline_ratings(scheme, sampled, data, prof_rng);
  }

  char id[16];
  std::snprintf(id, sizeof(id), "fake_%04d", p);
  auto profile = assemble_profile(id, sampled, values, config);
  profile.scheme = scheme;
  return profile;
}

}  // namespace

std::vector<FakeProfile> build_profiles(const RatingsDataset& data,
                                        const ItemItemGraph& graph,
                                        const AttackConfig& config,
                                        const GeneratorParams* generator) {
  if (!(config.injection_fraction > 0.0) ||
      config.injection_fraction > 0.2) {
    throw UsageError("injection fraction must lie in (0, 0.2]");
  }
  if (config.targets.empty()) {
    throw UsageError("attack needs at least one target item");
  }
  if (config.thresholds.max_ratings <= 0) {
    throw UsageError("profile size cap must be resolved before building");
  }
  if (config.kind == AttackKind::kGoat && generator == nullptr) {
    throw UsageError("GOAT attacks need a trained generator");
  }

  std::set<int> target_set(config.targets.begin(), config.targets.end());
  int n = static_cast<int>(
      std::ceil(config.injection_fraction * data.user_count() - 1e-9));
  std::vector<FakeProfile> out;
  out.reserve(n);
  for (int p = 0; p < n; ++p) {
    out.push_back(one_profile(data, graph, config, target_set, p, generator));
  }
  return out;
}

std::vector<FakeProfile> build_profile_batch(const RatingsDataset& data,
                                             const ItemItemGraph& graph,
                                             AttackKind kind, int count,
                                             const AttackThresholds& thresholds,
                                             const GeneratorParams* generator,
                                             std::uint64_t seed) {
  if (count < 1) throw UsageError("profile count must be positive");
  if (thresholds.max_ratings <= 0) {
    throw UsageError("profile size cap must be resolved before building");
  }
  if (kind == AttackKind::kGoat && generator == nullptr) {
    throw UsageError("GOAT attacks need a trained generator");
  }

  AttackConfig config;
  config.kind = kind;
  config.thresholds = thresholds;
  config.seed = seed;
  std::set<int> no_targets;
  std::vector<FakeProfile> out;
  out.reserve(count);
  for (int p = 0; p < count; ++p) {
    out.push_back(one_profile(data, graph, config, no_targets, p, generator));
  }
  return out;
}

InjectionResult inject(const RatingsDataset& data,
                       const std::vector<FakeProfile>& profiles) {
  InjectionResult result;
  result.poisoned = data;
  for (const auto& p : profiles) {
    if (result.poisoned.user_index(p.profile_id) >= 0) {
      throw DataError("fake user id collides with an existing user: " +
                      p.profile_id);
    }
    int u = result.poisoned.intern_user(p.profile_id);
    for (const auto& [item, rating] : p.entries) {
      if (item < 0 || item >= data.item_count()) {
        throw DataError("profile " + p.profile_id +
                        " rates an item outside the dataset");
      }
      result.poisoned.add_rating(u, item, rating);
    }
    result.fake_user_ids.push_back(p.profile_id);
  }
  return result;
}

void save_profiles(const std::string& ratings_path,
                   const std::string& parts_path,
                   const std::vector<FakeProfile>& profiles,
                   const RatingsDataset& data) {
  std::ofstream ratings(ratings_path, std::ios::binary);
  if (!ratings) throw DataError(ratings_path + ": cannot open for writing");
  std::ofstream parts(parts_path, std::ios::binary);
  if (!parts) throw DataError(parts_path + ": cannot open for writing");
  for (const auto& p : profiles) {
    for (const auto& [item, rating] : p.entries) {
      auto part = p.part_of.find(item);
      if (part == p.part_of.end()) {
        throw UsageError("profile " + p.profile_id +
                         " misses a part label for item " +
                         std::to_string(item));
      }
      ratings << p.profile_id << '\t' << data.item_id(item) << '\t' << rating
              << '\n';
      parts << p.profile_id << '\t' << data.item_id(item) << '\t'
            << part_name(part->second) << '\n';
    }
  }
  if (!ratings || !parts) {
    throw DataError("writing profile files failed");
  }
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

[[noreturn]] void loader_error(const std::string& path, int lineno,
                               const std::string& message) {
  throw DataError(path + ": line " + std::to_string(lineno) + ": " + message);
}

}  // namespace

std::vector<FakeProfile> load_profiles(const std::string& ratings_path,
                                       const std::string& parts_path,
                                       const RatingsDataset& data) {
  std::ifstream ratings(ratings_path);
  if (!ratings) throw DataError(ratings_path + ": cannot open");
  std::vector<FakeProfile> out;
  std::unordered_map<std::string, std::size_t> index;

  std::string line;
  int lineno = 0;
  while (std::getline(ratings, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      loader_error(ratings_path, lineno, "expected 3 tab-separated fields");
    }
    int item = data.item_index(fields[1]);
    if (item < 0) {
      loader_error(ratings_path, lineno, "unknown item id '" + fields[1] +
                                             "'");
    }
    int rating = 0;
    auto [ptr, ec] = std::from_chars(
        fields[2].data(), fields[2].data() + fields[2].size(), rating);
    if (ec != std::errc() || ptr != fields[2].data() + fields[2].size() ||
        rating < 1 || rating > 5) {
      loader_error(ratings_path, lineno, "bad rating '" + fields[2] + "'");
    }
    auto [it, fresh] = index.emplace(fields[0], out.size());
    if (fresh) {
      out.emplace_back();
      out.back().profile_id = fields[0];
    }
    auto& profile = out[it->second];
    if (!profile.entries.emplace(item, rating).second) {
      loader_error(ratings_path, lineno, "duplicate item for profile '" +
                                             fields[0] + "'");
    }
  }

  std::ifstream parts(parts_path);
  if (!parts) throw DataError(parts_path + ": cannot open");
  lineno = 0;
  while (std::getline(parts, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      loader_error(parts_path, lineno, "expected 3 tab-separated fields");
    }
    auto it = index.find(fields[0]);
    if (it == index.end()) {
      loader_error(parts_path, lineno, "unknown profile id '" + fields[0] +
                                           "'");
    }
    auto& profile = out[it->second];
    int item = data.item_index(fields[1]);
    if (item < 0 || !profile.entries.count(item)) {
      loader_error(parts_path, lineno, "part label for an unrated item '" +
                                           fields[1] + "'");
    }
    ProfilePart part;
    try {
      part = part_from_name(fields[2]);
    } catch (const UsageError&) {
      loader_error(parts_path, lineno, "unknown part '" + fields[2] + "'");
    }
    if (!profile.part_of.emplace(item, part).second) {
      loader_error(parts_path, lineno, "duplicate part label");
    }
  }

  for (const auto& profile : out) {
    if (profile.part_of.size() != profile.entries.size()) {
      throw DataError(parts_path + ": profile '" + profile.profile_id +
                      "' misses part labels for some rated items");
    }
  }
  return out;
}

}  // namespace shillsim
