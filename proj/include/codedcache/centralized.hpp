#pragma once

#include <cstdint>
#include <vector>

#include "codedcache/popularity.hpp"
#include "codedcache/request.hpp"

namespace codedcache {

// Centralized (coordinated-placement) schemes: per-file cache copies are
// integers r_n in [0:L] and each file is split into C(L, r_n) subfiles, one
// per size-r_n subset of users.

// Integer cache allocation in the sorted-popularity file order.
struct IntegerAllocation {
  std::vector<int> r;
  int users = 0;

  int n_files() const { return static_cast<int>(r.size()); }
  long long total_units() const;
  // Normalized cache size R_c = (sum_n r_n) / L.
  double cache() const;
  // Throws std::invalid_argument unless every r_n is in [0, users].
  void validate() const;
};

// Expected multicast cost of one step serving a file cached at r of the L
// users when the remaining demand is Binomial(L - r, p):
//   kappa(r, p) = E[Z / (Z + r)], Z ~ Binom(L - r, p).
// kappa(L, p) = 0, and r = L + 1 is accepted as 0 by convention (one past
// full replication). Throws std::invalid_argument for r outside [0, L+1],
// p outside [0, 1], or users < 1.
double kappa(int r, double p, int users);

// Ergodic update rate of the allocation: sum_n kappa(r_n, p_n).
double ergodic_rate(const PopularityProfile& profile, const IntegerAllocation& alloc);

struct GreedyResult {
  IntegerAllocation allocation;
  double rate = 0.0;
};

// Exact minimizer of the ergodic rate over integer allocations with
// sum_n r_n = L * cache. The marginal gains kappa(r) - kappa(r+1) are
// non-increasing in r, so assigning one unit at a time to the currently
// largest gain is optimal; ties go to the smallest sorted index. Requires
// L * cache to be integral within 1e-9 (memory-share between adjacent grid
// points otherwise) and in [0, N*L].
GreedyResult greedy_optimize(const PopularityProfile& profile, int users, double cache);

// One pass of the same greedy over the whole grid: entry s is the optimal
// rate with s placement units, s = 0 .. N*L. The sequence is convex, so
// linear interpolation between adjacent entries is the memory-sharing rate
// at fractional cache sizes.
std::vector<double> greedy_sweep(const PopularityProfile& profile, int users);

// Static (single-demand) rate of the subset-type scheme for one request
// vector, normalized to file size: a multicast of length 1 / C(L, |S|-1)
// is sent for every non-empty user subset S containing at least one user
// whose file is replicated exactly |S| - 1 times. Evaluated in grouped form
// over the request counts per cache level, O(L^2).
double static_rate_for_request(const IntegerAllocation& alloc, const RequestVector& request);

// Expectation of static_rate_for_request under i.i.d. demands from the
// profile, in closed form.
double static_average_rate(const PopularityProfile& profile, const IntegerAllocation& alloc);

struct WorstCaseRate {
  double rate = 0.0;
  // True when every request vector was enumerated; false when the reported
  // maximum came from the structured search over request-count vectors.
  bool exact = false;
  RequestVector argmax;
};

// Maximum of static_rate_for_request over all N^L request vectors. Vectors
// are enumerated outright while N^L <= enumeration_budget; beyond that the
// search runs over per-level request counts (the rate depends on the demand
// only through them), which still covers the whole demand space but is
// reported as not exhaustively enumerated.
WorstCaseRate static_worst_case_rate(const PopularityProfile& profile, const IntegerAllocation& alloc,
                                     std::uint64_t enumeration_budget = 1'000'000);

}  // namespace codedcache
