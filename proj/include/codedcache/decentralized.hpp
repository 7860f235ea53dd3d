#pragma once

#include <vector>

#include "codedcache/popularity.hpp"
#include "codedcache/request.hpp"

namespace codedcache {

// Decentralized schemes: each user independently caches every bit of file n
// with probability r_n in [0, 1], so placement needs no coordination.

// Fractional cache allocation in the sorted-popularity file order.
struct FractionalAllocation {
  std::vector<double> r;

  int n_files() const { return static_cast<int>(r.size()); }
  double cache() const;
  // Throws std::invalid_argument unless every r_n is in [0, 1].
  void validate() const;
};

// Ergodic update rate of the random-placement scheme:
//   sum_n p_n (1 - r_n) (1 - a_n^L) / (1 - a_n),  a_n = (1 - p_n)(1 - r_n),
// with the continuity limit p_n (1 - r_n) L when 1 - a_n underflows.
double ergodic_rate(const PopularityProfile& profile, const FractionalAllocation& alloc, int users);

struct KktSolution {
  FractionalAllocation allocation;
  double rate = 0.0;
  // Water level: multiplier of the cache constraint at the optimum.
  double lambda = 0.0;
  // max over interior coordinates of |g_n(r_n) - lambda|.
  double stationarity_residual = 0.0;
  // |sum_n r_n - R_c|.
  double budget_residual = 0.0;
};

// Exact minimizer of the ergodic rate over fractional allocations with
// sum_n r_n = R_c, 0 <= r_n <= 1. The objective is convex and separable, so
// the optimum is a water-filling in the marginal-value functions
//   g_n(r) = p_n sum_{l=0}^{L-1} (l+1) (1-p_n)^l (1-r)^l:
// r_n = 1 where p_n >= lambda, r_n = 0 where g_n(0) <= lambda, and
// g_n(r_n) = lambda in between. lambda is found by bisection on the cache
// budget; each interior coordinate by bisection on g_n. Residuals of both
// conditions are reported in the solution.
KktSolution kkt_optimize(const PopularityProfile& profile, int users, double cache);

// Static (single-demand) rate of the random-placement scheme for one
// request vector, normalized to file size:
//   sum_{j=1}^{L} sum_{|S|=j} max_{u in S} f_j(r_{d_u}),
//   f_j(r) = r^(j-1) (1-r)^(L-j+1).
// Grouped by sorted leader values, O(L^2 log L) per request.
double static_rate_for_request(const FractionalAllocation& alloc, const RequestVector& request, int users);

struct MnRate {
  double value = 0.0;
  // Set when the cache size is 0 and the value is the continuity limit L of
  // the formula rather than a scheme rate.
  bool continuity_limit = false;
};

// Worst-case static rate of uniform random placement (r_n = R_c / N for
// every file):
//   ((N - R_c) / R_c) * (1 - (1 - R_c/N)^L),
// the classical decentralized baseline that the static gap certificate is
// anchored to.
MnRate mn_worst_case(int n_files, int users, double cache);

}  // namespace codedcache
