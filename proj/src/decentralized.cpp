#include "codedcache/decentralized.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "codedcache/numeric.hpp"

namespace codedcache {

double FractionalAllocation::cache() const {
  CompensatedSum acc;
  for (double v : r) acc.add(v);
  return acc.value();
}

void FractionalAllocation::validate() const {
  if (r.empty()) throw std::invalid_argument("allocation: no files");
  for (std::size_t n = 0; n < r.size(); ++n)
    if (!std::isfinite(r[n]) || r[n] < 0.0 || r[n] > 1.0)
      throw std::invalid_argument("allocation: entry " + std::to_string(n + 1) + " = " + std::to_string(r[n]) +
                                  " outside [0, 1]");
}

namespace {

void check_match(const PopularityProfile& profile, const FractionalAllocation& alloc) {
  alloc.validate();
  if (alloc.n_files() != profile.size())
    throw std::invalid_argument("allocation has " + std::to_string(alloc.n_files()) + " files, profile has " +
                                std::to_string(profile.size()));
}

// One file's ergodic cost: p (1-r) (1 - a^L) / (1 - a) with a = (1-p)(1-r),
// switching to the continuity limit p (1-r) L as a -> 1.
double file_rate(double p, double r, int users) {
  const double miss = 1.0 - r;
  const double a = (1.0 - p) * miss;
  const double denom = 1.0 - a;
  if (denom < 1e-12) return p * miss * users;
  return p * miss * (1.0 - std::pow(a, users)) / denom;
}

// Marginal value of cache on one file: minus the derivative of the file
// cost,
//   g(r) = p * sum_{l=0}^{L-1} (l+1) [(1-p)(1-r)]^l.
// The closed form p (1 - (L+1)x^L + L x^{L+1}) / (1-x)^2, x = (1-p)(1-r),
// cancels catastrophically as x -> 1, so short horizons and x near 1 use
// the direct sum.
double marginal_value(double p, double r, int users) {
  const double x = (1.0 - p) * (1.0 - r);
  if (users <= 256 || x > 0.999) {
    double sum = 0.0;
    double xl = 1.0;
    for (int l = 0; l < users; ++l) {
      sum += (l + 1) * xl;
      xl *= x;
    }
    return p * sum;
  }
  const double xl = std::pow(x, users);
  const double one_minus = 1.0 - x;
  return p * (1.0 - (users + 1) * xl + users * xl * x) / (one_minus * one_minus);
}

}  // namespace

double ergodic_rate(const PopularityProfile& profile, const FractionalAllocation& alloc, int users) {
  check_match(profile, alloc);
  if (users < 1) throw std::invalid_argument("need at least one user");
  CompensatedSum acc;
  for (int n = 0; n < profile.size(); ++n) acc.add(file_rate(profile.prob(n), alloc.r[n], users));
  return acc.value();
}

KktSolution kkt_optimize(const PopularityProfile& profile, int users, double cache) {
  if (users < 1) throw std::invalid_argument("need at least one user");
  const int n_files = profile.size();
  if (!std::isfinite(cache) || cache < -1e-12 || cache > n_files + 1e-12)
    throw std::invalid_argument("cache size must lie in [0, " + std::to_string(n_files) + "], got " +
                                std::to_string(cache));
  cache = std::clamp(cache, 0.0, static_cast<double>(n_files));

  KktSolution solution;
  solution.allocation.r.assign(n_files, 0.0);
  auto finish = [&](double lambda) {
    solution.lambda = lambda;
    solution.rate = ergodic_rate(profile, solution.allocation, users);
    double residual = 0.0;
    for (int n = 0; n < n_files; ++n) {
      const double r = solution.allocation.r[n];
      if (r > 0.0 && r < 1.0)
        residual = std::max(residual, std::abs(marginal_value(profile.prob(n), r, users) - lambda));
    }
    solution.stationarity_residual = residual;
    solution.budget_residual = std::abs(solution.allocation.cache() - cache);
    return solution;
  };

  if (cache == 0.0) {
    double top = 0.0;
    for (int n = 0; n < n_files; ++n) top = std::max(top, marginal_value(profile.prob(n), 0.0, users));
    return finish(top);
  }
  if (cache == static_cast<double>(n_files)) {
    solution.allocation.r.assign(n_files, 1.0);
    return finish(0.0);
  }

  // Zero-probability files never earn cache; they only receive mass when
  // everything useful is already fully replicated.
  std::vector<int> active;
  for (int n = 0; n < n_files; ++n)
    if (profile.prob(n) > 0.0) active.push_back(n);
  if (cache >= static_cast<double>(active.size())) {
    const double spill = cache - static_cast<double>(active.size());
    const int idle = n_files - static_cast<int>(active.size());
    for (int n = 0; n < n_files; ++n)
      solution.allocation.r[n] = profile.prob(n) > 0.0 ? 1.0 : spill / idle;
    return finish(0.0);
  }
  if (active.size() == 1) {
    // Covers p = 1 (where the marginal value is constant and the water
    // level degenerates): the single useful file takes the whole budget.
    solution.allocation.r[active[0]] = cache;
    return finish(marginal_value(profile.prob(active[0]), cache, users));
  }

  // One shared request: the objective is linear in each coordinate with
  // slope -p_n, so cache goes to the most popular files outright and the
  // water level is the probability at the fill boundary.
  if (users == 1) {
    double remaining = cache;
    double lambda = 0.0;
    for (int n : active) {
      const double take = std::min(1.0, remaining);
      solution.allocation.r[n] = take;
      remaining -= take;
      if (take > 0.0) lambda = profile.prob(n);
      if (remaining <= 0.0) break;
    }
    return finish(lambda);
  }

  // Water-filling. r_n(lambda) is non-increasing in lambda and continuous,
  // so bisect the water level on the cache budget; each coordinate solves
  // g_n(r) = lambda by inner bisection (g_n is strictly decreasing in r for
  // p < 1, and p = 1 was handled above).
  std::vector<double> value_at_zero(n_files, 0.0);
  for (int n : active) value_at_zero[n] = marginal_value(profile.prob(n), 0.0, users);
  const auto coordinate = [&](int n, double lambda) {
    const double p = profile.prob(n);
    if (p >= lambda) return 1.0;  // even a fully-cached file earns >= lambda
    if (value_at_zero[n] <= lambda) return 0.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (marginal_value(p, mid, users) > lambda) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  const auto filled = [&](double lambda) {
    CompensatedSum acc;
    for (int n : active) acc.add(coordinate(n, lambda));
    return acc.value();
  };

  double lam_lo = 0.0;  // fills every active file completely
  double lam_hi = 0.0;
  for (int n : active) lam_hi = std::max(lam_hi, value_at_zero[n]);
  for (int it = 0; it < 80 && lam_hi - lam_lo > 0.0; ++it) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    if (filled(mid) > cache) {
      lam_lo = mid;
    } else {
      lam_hi = mid;
    }
  }
  const double lambda = 0.5 * (lam_lo + lam_hi);
  for (int n : active) solution.allocation.r[n] = coordinate(n, lambda);

  // The bisections leave at most a few ulps of budget slack; spread any
  // leftover across interior coordinates so the constraint holds exactly.
  double gap = cache - solution.allocation.cache();
  if (gap != 0.0) {
    std::vector<int> interior;
    for (int n : active)
      if (solution.allocation.r[n] > 0.0 && solution.allocation.r[n] < 1.0) interior.push_back(n);
    if (!interior.empty()) {
      const double share = gap / static_cast<double>(interior.size());
      for (int n : interior) solution.allocation.r[n] = std::clamp(solution.allocation.r[n] + share, 0.0, 1.0);
    }
  }
  return finish(lambda);
}

double static_rate_for_request(const FractionalAllocation& alloc, const RequestVector& request, int users) {
  alloc.validate();
  if (users < 1) throw std::invalid_argument("need at least one user");
  if (request.users() != users)
    throw std::invalid_argument("request lists " + std::to_string(request.users()) + " users, expected " +
                                std::to_string(users));
  for (int file : request.files)
    if (file < 0 || file >= alloc.n_files())
      throw std::invalid_argument("request names file " + std::to_string(file + 1) + " of " +
                                  std::to_string(alloc.n_files()));

  // f_j(r) = r^(j-1) (1-r)^(L-j+1): expected share of a file cached at rate
  // r that is held by exactly the j-1 other members of a given j-subset.
  const auto f = [&](int j, double r) {
    if (r <= 0.0) return j == 1 ? 1.0 : 0.0;
    if (r >= 1.0) return 0.0;
    return std::exp((j - 1) * std::log(r) + (users - j + 1) * std::log1p(-r));
  };

  // For subset size j, the multicast cost is the largest f_j among the
  // members. Sorting the per-user values descending (ties by user index)
  // counts, for each rank i, the C(L-i, j-1) subsets in which rank i leads.
  double rate = 0.0;
  std::vector<double> values(users);
  for (int j = 1; j <= users; ++j) {
    for (int u = 0; u < users; ++u) values[u] = f(j, alloc.r[request.files[u]]);
    std::sort(values.begin(), values.end(), std::greater<double>());
    CompensatedSum acc;
    for (int i = 1; i <= users; ++i) {
      if (values[i - 1] == 0.0) break;
      acc.add(values[i - 1] * binom(users - i, j - 1));
    }
    rate += acc.value();
  }
  return rate;
}

MnRate mn_worst_case(int n_files, int users, double cache) {
  if (users < 1) throw std::invalid_argument("need at least one user");
  if (n_files < 1) throw std::invalid_argument("need at least one file");
  if (!std::isfinite(cache) || cache < 0.0 || cache > static_cast<double>(n_files))
    throw std::invalid_argument("cache size must lie in [0, " + std::to_string(n_files) + "], got " +
                                std::to_string(cache));
  if (cache == 0.0) return {static_cast<double>(users), true};
  const double ratio = cache / static_cast<double>(n_files);
  const double value = (static_cast<double>(n_files) - cache) / cache *
                       (1.0 - pow1m(ratio, static_cast<double>(users)));
  return {value, false};
}

}  // namespace codedcache
