#include "codedcache/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "codedcache/numeric.hpp"

namespace codedcache {

namespace {

void check_cache_range(double cache, int n_files) {
  if (!std::isfinite(cache) || cache < 0.0 || cache > static_cast<double>(n_files))
    throw std::invalid_argument("cache size must lie in [0, " + std::to_string(n_files) + "], got " +
                                std::to_string(cache));
}

void check_users(int users) {
  if (users < 1) throw std::invalid_argument("need at least one user");
}

// Shared cut maximization: max over ell in [1:ell_max] of
// sum_n (s_n(ell) - s_{n+1}(ell)) (n - ell*cache)^+, with s_{N+1} = 0.
// Written as sum_n (q_{n+1}^ell - q_n^ell)(n - ell*cache)^+ for q_n = 1-p_n,
// q_{N+1} = 1, which costs one stable power per file.
double cut_bound(const PopularityProfile& profile, int ell_max, double cache) {
  const int n_files = profile.size();
  double best = 0.0;
  for (int ell = 1; ell <= ell_max; ++ell) {
    const double need = static_cast<double>(ell) * cache;
    double prev_tail = pow1m(profile.prob(0), static_cast<double>(ell));  // q_1^ell
    double sum = 0.0;
    for (int n = 1; n <= n_files; ++n) {
      const double tail = n < n_files ? pow1m(profile.prob(n), static_cast<double>(ell)) : 1.0;
      const double excess = static_cast<double>(n) - need;
      if (excess > 0.0) sum += (tail - prev_tail) * excess;
      prev_tail = tail;
    }
    best = std::max(best, sum);
  }
  return best;
}

}  // namespace

double fsn_lower_bound(const PopularityProfile& profile, int users, double cache) {
  check_users(users);
  check_cache_range(cache, profile.size());
  return cut_bound(profile, users, cache);
}

double relaxed_lower_bound(int n_files, int users, double cache) {
  check_users(users);
  if (n_files < 1) throw std::invalid_argument("need at least one file");
  check_cache_range(cache, n_files);
  const int ell_max = std::min(users, (n_files + 3) / 4);
  return cut_bound(PopularityProfile::from_zipf(n_files, 0.0), ell_max, cache);
}

double high_cache_optimal(const PopularityProfile& profile, int users, double cache) {
  check_users(users);
  const int n_files = profile.size();
  check_cache_range(cache, n_files);
  const double threshold = profile.is_uniform()
                               ? static_cast<double>(n_files) - static_cast<double>(n_files) / users
                               : static_cast<double>(n_files) - 1.0 / users;
  if (cache < threshold - 1e-12)
    throw std::domain_error("cache size " + std::to_string(cache) +
                            " is below the exact-optimality threshold " + std::to_string(threshold) +
                            " for this profile");
  return std::max(0.0, profile.prob(n_files - 1) * (static_cast<double>(n_files) - cache));
}

CornerPointSet corner_points(int n_files, int users, GapMode mode) {
  check_users(users);
  if (n_files < 1) throw std::invalid_argument("need at least one file");
  const int cap = mode == GapMode::Ergodic ? n_files : (n_files + 3) / 4;
  CornerPointSet set;
  set.l_max = std::min(users, cap);
  set.points.emplace_back(0, static_cast<double>(n_files));
  const double n = static_cast<double>(n_files);
  for (int ell = 1; ell < set.l_max; ++ell) {
    // Intersection of the ell-th and (ell+1)-th cut lines of the uniform
    // bound: omega_ell = N beta^ell / (N + (ell+1-N) beta^ell), beta=1-1/N.
    const double beta_ell = pow1m(1.0 / n, static_cast<double>(ell));
    const double omega = n * beta_ell / (n + (ell + 1 - n) * beta_ell);
    set.points.emplace_back(ell, omega);
  }
  set.points.emplace_back(set.l_max, 0.0);
  return set;
}

}  // namespace codedcache
