#pragma once

#include <vector>

#include "codedcache/popularity.hpp"

namespace codedcache {

// Converse (lower) bounds on the update rate and the cut-set corner points
// used by the multiplicative-gap certificates.

// Information-theoretic lower bound on the ergodic update rate:
//   R >= max_{ell in [1:L]} sum_n (s_n(ell) - s_{n+1}(ell)) * (n - ell*R_c)^+
// where s_n(ell) is the coverage probability of the n-th most popular file
// by ell requests and s_{N+1} = 0. Valid for cache sizes 0 <= R_c <= N.
double fsn_lower_bound(const PopularityProfile& profile, int users, double cache);

// Same cut-set maximization restricted to ell <= min(L, ceil(N/4)), for the
// uniform profile. This relaxed form is the denominator of the static-demand
// gap certificate.
double relaxed_lower_bound(int n_files, int users, double cache);

// Exact optimal rate p_N * (N - R_c) in the large-cache regime. Throws
// std::domain_error (message includes the threshold) when the cache is below
// the regime boundary: N - N/L for uniform profiles, N - 1/L otherwise.
double high_cache_optimal(const PopularityProfile& profile, int users, double cache);

enum class GapMode { Ergodic, Static };

struct CornerPointSet {
  // (ell, omega_ell) pairs: omega_0 = N down to omega_{l_max} = 0, strictly
  // decreasing in cache size.
  std::vector<std::pair<int, double>> points;
  int l_max = 0;
};

// Cache sizes at which consecutive ell-cuts of the uniform lower bound
// intersect; these split [0, N] into the segments examined by the gap
// certificates. l_max = min(L, N) for Ergodic mode and min(L, ceil(N/4))
// for Static mode.
CornerPointSet corner_points(int n_files, int users, GapMode mode);

}  // namespace codedcache
