#include "shillsim/itemgraph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <unordered_map>

#include "shillsim/errors.hpp"

namespace shillsim {

int ItemItemGraph::co_count(int a, int b) const {
  if (a == b) return 0;
  const auto& row = adjacency_[a];
  auto pos = std::lower_bound(
      row.begin(), row.end(), b,
      [](const std::pair<int, int>& e, int key) { return e.first < key; });
  return pos != row.end() && pos->first == b ? pos->second : 0;
}

ItemItemGraph build_graph(const RatingsDataset& data) {
  ItemItemGraph g;
  g.adjacency_.resize(data.item_count());
  g.popularity_.resize(data.item_count());
  for (int i = 0; i < data.item_count(); ++i) {
    g.popularity_[i] = data.per_item_count(i);
  }

  std::unordered_map<std::uint64_t, int> counts;
  for (int u = 0; u < data.user_count(); ++u) {
    const auto& row = data.user_ratings(u);
    for (std::size_t x = 0; x < row.size(); ++x) {
      for (std::size_t y = x + 1; y < row.size(); ++y) {
        // Per-user rows are sorted by item, so item pairs arrive ordered.
        std::uint64_t key = (std::uint64_t(row[x].item) << 32) |
                            std::uint64_t(row[y].item);
        counts[key] += 1;
      }
    }
  }
  for (const auto& [key, n] : counts) {
    int a = static_cast<int>(key >> 32);
    int b = static_cast<int>(key & 0xffffffffu);
    g.adjacency_[a].push_back({b, n});
    g.adjacency_[b].push_back({a, n});
  }
  for (auto& row : g.adjacency_) {
    std::sort(row.begin(), row.end());
  }
  g.edge_count_ = counts.size();
  return g;
}

int role_popularity_floor(ProfilePart role, const AttackThresholds& t) {
  switch (role) {
    case ProfilePart::kSelected:
      return t.popularity_floor;
    case ProfilePart::kFiller:
      return (t.popularity_floor + 2) / 3;
    default:
      throw UsageError("target items have no popularity floor");
  }
}

std::vector<int> eligible_candidates(const ItemItemGraph& graph,
                                     ProfilePart role,
                                     const AttackThresholds& t) {
  int floor = role_popularity_floor(role, t);
  std::vector<int> out;
  for (int i = 0; i < graph.item_count(); ++i) {
    if (graph.popularity(i) >= floor) out.push_back(i);
  }
  return out;
}

namespace {

const char* part_name(ProfilePart role) {
  return role == ProfilePart::kSelected ? "selected" : "filler";
}

// One shortfall item: uniform among eligible graph neighbors of the items
// chosen so far, falling back to the whole eligible catalog.
int supplement(const ItemItemGraph& graph, ProfilePart role,
               const AttackThresholds& t, const std::set<int>& chosen,
               Rng& rng) {
  int floor = role_popularity_floor(role, t);
  std::set<int> neighbor_pool;
  for (int c : chosen) {
    for (const auto& [nb, weight] : graph.neighbors(c)) {
      if (graph.popularity(nb) >= floor && !chosen.count(nb)) {
        neighbor_pool.insert(nb);
      }
    }
  }
  if (!neighbor_pool.empty()) {
    std::vector<int> pool(neighbor_pool.begin(), neighbor_pool.end());
    return pool[rng.below(pool.size())];
  }
  std::vector<int> global;
  for (int i = 0; i < graph.item_count(); ++i) {
    if (graph.popularity(i) >= floor && !chosen.count(i)) global.push_back(i);
  }
  if (global.empty()) {
    throw DataError(std::string("candidate pool exhausted for the ") +
                    part_name(role) + " part");
  }
  return global[rng.below(global.size())];
}

}  // namespace

SampledProfileItems sample_profile_items(const ItemItemGraph& graph,
                                         const RatingsDataset& data,
                                         const AttackThresholds& t,
                                         int max_ratings_effective, Rng& rng) {
  if (t.min_ratings < 1 || t.popularity_floor < 1) {
    throw UsageError("sampling thresholds must be positive");
  }
  if (!(t.selected_fraction > 0.0) || t.selected_fraction > 1.0) {
    throw UsageError("selected fraction must lie in (0, 1]");
  }
  if (max_ratings_effective < t.min_ratings) {
    throw UsageError("rating cap below the minimum profile size");
  }

  std::vector<int> templates;
  for (int u = 0; u < data.user_count(); ++u) {
    if (data.per_user_count(u) >= t.min_ratings) templates.push_back(u);
  }
  if (templates.empty()) {
    throw DataError("no template user with at least " +
                    std::to_string(t.min_ratings) + " ratings");
  }

  SampledProfileItems out;
  out.template_user = templates[rng.below(templates.size())];
  int k = std::min(data.per_user_count(out.template_user),
                   max_ratings_effective);
  int n_selected = std::max(
      1, static_cast<int>(std::floor(k * t.selected_fraction + 0.5)));
  n_selected = std::min(n_selected, k);
  int n_filler = k - n_selected;

  int sel_floor = role_popularity_floor(ProfilePart::kSelected, t);
  int fil_floor = role_popularity_floor(ProfilePart::kFiller, t);
  std::vector<int> profile_selected, profile_filler;
  for (const auto& ir : data.user_ratings(out.template_user)) {
    if (graph.popularity(ir.item) >= sel_floor) {
      profile_selected.push_back(ir.item);
    }
    if (graph.popularity(ir.item) >= fil_floor) {
      profile_filler.push_back(ir.item);
    }
  }

  std::set<int> chosen;
  out.selected = rng.sample(
      profile_selected,
      std::min<std::size_t>(profile_selected.size(), n_selected));
  chosen.insert(out.selected.begin(), out.selected.end());
  while (static_cast<int>(out.selected.size()) < n_selected) {
    int item = supplement(graph, ProfilePart::kSelected, t, chosen, rng);
    out.selected.push_back(item);
    chosen.insert(item);
  }

  std::vector<int> filler_pool;
  for (int i : profile_filler) {
    if (!chosen.count(i)) filler_pool.push_back(i);
  }
  out.filler = rng.sample(
      filler_pool, std::min<std::size_t>(filler_pool.size(), n_filler));
  chosen.insert(out.filler.begin(), out.filler.end());
  while (static_cast<int>(out.filler.size()) < n_filler) {
    int item = supplement(graph, ProfilePart::kFiller, t, chosen, rng);
    out.filler.push_back(item);
    chosen.insert(item);
  }
  return out;
}

void export_graph(const ItemItemGraph& graph, const RatingsDataset& data,
                  std::ostream& out) {
  for (int a = 0; a < graph.item_count(); ++a) {
    for (const auto& [b, n] : graph.neighbors(a)) {
      if (b <= a) continue;
      out << data.item_id(a) << '\t' << data.item_id(b) << '\t' << n << '\n';
    }
  }
}

}  // namespace shillsim
