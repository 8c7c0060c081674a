#ifndef SHILLSIM_ITEMGRAPH_HPP
#define SHILLSIM_ITEMGRAPH_HPP

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "shillsim/dataset.hpp"
#include "shillsim/rng.hpp"

namespace shillsim {

// Undirected item-item co-rating graph.  Two items are linked when at least
// one user rated both; the edge weight is the number of such users.
class ItemItemGraph {
 public:
  int item_count() const { return static_cast<int>(adjacency_.size()); }
  std::size_t edge_count() const { return edge_count_; }
  int popularity(int item) const { return popularity_[item]; }
  // Neighbors sorted by item index, each with its co-rating count.
  const std::vector<std::pair<int, int>>& neighbors(int item) const {
    return adjacency_[item];
  }
  int co_count(int a, int b) const;
  bool adjacent(int a, int b) const { return co_count(a, b) > 0; }

 private:
  friend ItemItemGraph build_graph(const RatingsDataset& data);
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
  std::vector<int> popularity_;
  std::size_t edge_count_ = 0;
};

ItemItemGraph build_graph(const RatingsDataset& data);

// Role a rated item plays inside a fake profile.
enum class ProfilePart { kSelected, kFiller, kTarget };

// Popularity floor for a role: selected items use the configured floor,
// filler items a third of it rounded up.
int role_popularity_floor(ProfilePart role, const AttackThresholds& t);

// All items meeting the role's popularity floor, ascending by index.
std::vector<int> eligible_candidates(const ItemItemGraph& graph,
                                     ProfilePart role,
                                     const AttackThresholds& t);

struct SampledProfileItems {
  int template_user = -1;
  std::vector<int> selected;
  std::vector<int> filler;
  int size() const {
    return static_cast<int>(selected.size() + filler.size());
  }
};

// Draws the item skeleton of one fake profile: a template user with at least
// min_ratings ratings fixes the profile size k = min(|template|, cap); the
// selected part gets max(1, round(k * selected_fraction)) items, the filler
// part the rest.  Candidates come from the template's own profile first;
// shortfall is covered by graph neighbors of the items chosen so far, then by
// the global pool.  Throws DataError when no template exists or a pool runs
// dry, naming the deficient part.
SampledProfileItems sample_profile_items(const ItemItemGraph& graph,
                                         const RatingsDataset& data,
                                         const AttackThresholds& t,
                                         int max_ratings_effective, Rng& rng);

// One `item_a<TAB>item_b<TAB>co_count` line per edge, ordered by index pair.
void export_graph(const ItemItemGraph& graph, const RatingsDataset& data,
                  std::ostream& out);

}  // namespace shillsim

#endif
