#ifndef SHILLSIM_METRICS_HPP
#define SHILLSIM_METRICS_HPP

#include <vector>

#include "shillsim/attack.hpp"

namespace shillsim {

// Ranked top-10 lists, one per evaluated user.  All metrics treat the outer
// index as the user and list entries as item indices.
using TopLists = std::vector<std::vector<int>>;

// Mean, over target items, of the fraction of users whose list contains the
// item.
double hit_ratio_at_10(const TopLists& recommendations,
                       const std::vector<int>& targets);

// Same hit ratio over the union of selected and filler items carried by the
// injected profiles.
double hr_prime_at_10(const TopLists& recommendations,
                      const std::vector<FakeProfile>& profiles);

// Mean over users of |predicted ∩ relevant| / 10.  A predicted list shorter
// than ten divides by its own length (an exhausted catalog is the only way
// this pipeline produces one).
double precision_at_10(const TopLists& predicted, const TopLists& relevant);

enum class NdcgGain {
  kStandard,  // gain 2^rel - 1, normalized by the ideal DCG
  kLiteral,   // gain 2^(rel-1), unnormalized; kept for auditability
};

double ndcg_at_10(const TopLists& predicted, const TopLists& relevant,
                  NdcgGain gain = NdcgGain::kStandard);

// Middle element for odd counts, mean of the middle pair for even ones.
double median(std::vector<double> values);

}  // namespace shillsim

#endif
