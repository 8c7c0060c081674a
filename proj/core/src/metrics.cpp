#include "shillsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "shillsim/errors.hpp"

namespace shillsim {

namespace {

void check_lists(const TopLists& lists, const char* what) {
  if (lists.empty()) {
    throw UsageError(std::string("no users to evaluate in ") + what);
  }
  for (const auto& list : lists) {
    if (list.size() > 10) {
      throw UsageError(std::string(what) +
                       " got a recommendation list longer than ten");
    }
  }
}

double hit_ratio_over(const TopLists& recommendations,
                      const std::set<int>& items) {
  double total = 0.0;
  for (int item : items) {
    double hits = 0.0;
    for (const auto& list : recommendations) {
      if (std::find(list.begin(), list.end(), item) != list.end()) {
        hits += 1.0;
      }
    }
    total += hits / static_cast<double>(recommendations.size());
  }
  return total / static_cast<double>(items.size());
}

}  // namespace

double hit_ratio_at_10(const TopLists& recommendations,
                       const std::vector<int>& targets) {
  check_lists(recommendations, "hit_ratio_at_10");
  std::set<int> uniq(targets.begin(), targets.end());
  if (uniq.empty()) throw UsageError("hit ratio needs target items");
  return hit_ratio_over(recommendations, uniq);
}

double hr_prime_at_10(const TopLists& recommendations,
                      const std::vector<FakeProfile>& profiles) {
  check_lists(recommendations, "hr_prime_at_10");
  std::set<int> camouflage;
  for (const auto& p : profiles) {
    for (const auto& [item, part] : p.part_of) {
      if (part != ProfilePart::kTarget) camouflage.insert(item);
    }
  }
  if (camouflage.empty()) {
    throw DataError("profiles carry no selected or filler items");
  }
  return hit_ratio_over(recommendations, camouflage);
}

double precision_at_10(const TopLists& predicted, const TopLists& relevant) {
  check_lists(predicted, "precision_at_10");
  if (predicted.size() != relevant.size()) {
    throw UsageError("precision needs one relevant list per predicted list");
  }
  double total = 0.0;
  for (std::size_t u = 0; u < predicted.size(); ++u) {
    if (predicted[u].empty()) continue;
    std::set<int> t(relevant[u].begin(), relevant[u].end());
    double overlap = 0.0;
    for (int item : predicted[u]) {
      if (t.count(item)) overlap += 1.0;
    }
    double denom = predicted[u].size() < 10
                       ? static_cast<double>(predicted[u].size())
                       : 10.0;
    total += overlap / denom;
  }
  return total / static_cast<double>(predicted.size());
}

double ndcg_at_10(const TopLists& predicted, const TopLists& relevant,
                  NdcgGain gain) {
  check_lists(predicted, "ndcg_at_10");
  if (predicted.size() != relevant.size()) {
    throw UsageError("ndcg needs one relevant list per predicted list");
  }
  double total = 0.0;
  for (std::size_t u = 0; u < predicted.size(); ++u) {
    std::set<int> t(relevant[u].begin(), relevant[u].end());
    if (t.empty()) continue;
    double dcg = 0.0;
    for (std::size_t j = 0; j < predicted[u].size(); ++j) {
      bool hit = t.count(predicted[u][j]) > 0;
      double discount = std::log2(static_cast<double>(j) + 2.0);
      if (gain == NdcgGain::kLiteral) {
        dcg += (hit ? 1.0 : 0.5) / discount;
      } else if (hit) {
        dcg += 1.0 / discount;
      }
    }
    if (gain == NdcgGain::kLiteral) {
      total += dcg;
      continue;
    }
    double idcg = 0.0;
    std::size_t ideal = std::min<std::size_t>(10, t.size());
    for (std::size_t j = 0; j < ideal; ++j) {
      idcg += 1.0 / std::log2(static_cast<double>(j) + 2.0);
    }
    total += dcg / idcg;
  }
  return total / static_cast<double>(predicted.size());
}

double median(std::vector<double> values) {
  if (values.empty()) throw UsageError("median of an empty sample");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace shillsim
