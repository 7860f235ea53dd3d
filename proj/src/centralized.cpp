#include "codedcache/centralized.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "codedcache/numeric.hpp"

namespace codedcache {

long long IntegerAllocation::total_units() const {
  long long s = 0;
  for (int v : r) s += v;
  return s;
}

double IntegerAllocation::cache() const {
  if (users < 1) throw std::invalid_argument("allocation: user count not set");
  return static_cast<double>(total_units()) / users;
}

void IntegerAllocation::validate() const {
  if (users < 1) throw std::invalid_argument("allocation: need at least one user");
  if (r.empty()) throw std::invalid_argument("allocation: no files");
  for (std::size_t n = 0; n < r.size(); ++n)
    if (r[n] < 0 || r[n] > users)
      throw std::invalid_argument("allocation: entry " + std::to_string(n + 1) + " = " + std::to_string(r[n]) +
                                  " outside [0, " + std::to_string(users) + "]");
}

double kappa(int r, double p, int users) {
  if (users < 1) throw std::invalid_argument("kappa: need at least one user");
  if (!std::isfinite(p) || p < 0.0 || p > 1.0)
    throw std::invalid_argument("kappa: probability must lie in [0, 1]");
  if (r < 0 || r > users + 1)
    throw std::invalid_argument("kappa: copy count " + std::to_string(r) + " outside [0, " +
                                std::to_string(users + 1) + "]");
  if (r >= users) return 0.0;  // fully replicated (and the r = L+1 convention)
  const int m = users - r;
  double sum = 0.0;
  for (int j = m; j >= 1; --j)
    sum += static_cast<double>(j) / static_cast<double>(j + r) * binom_pmf(m, j, p);
  return sum;
}

double ergodic_rate(const PopularityProfile& profile, const IntegerAllocation& alloc) {
  alloc.validate();
  if (alloc.n_files() != profile.size())
    throw std::invalid_argument("allocation has " + std::to_string(alloc.n_files()) + " files, profile has " +
                                std::to_string(profile.size()));
  CompensatedSum acc;
  for (int n = 0; n < profile.size(); ++n) acc.add(kappa(alloc.r[n], profile.prob(n), alloc.users));
  return acc.value();
}

namespace {

// Greedy state shared by greedy_optimize and greedy_sweep: assign placement
// units one at a time to the file with the largest rate reduction
// kappa(r_n) - kappa(r_n + 1). The gains are non-increasing in r_n, which
// makes the greedy exact and the resulting rate sequence convex in the unit
// count. Ties go to the smallest index, i.e. the most popular file.
struct GreedySweep {
  explicit GreedySweep(const PopularityProfile& profile, int users)
      : users_(users), r(profile.size(), 0), current(profile.size()), next(profile.size()) {
    for (int n = 0; n < profile.size(); ++n) {
      const double p = profile.prob(n);
      current[n] = kappa(0, p, users);
      next[n] = kappa(1, p, users);
      probs.push_back(p);
    }
  }

  double rate() const {
    CompensatedSum acc;
    for (double v : current) acc.add(v);
    return acc.value();
  }

  // Advances by one unit; returns false when every file is saturated.
  bool step() {
    int best = -1;
    double best_gain = -1.0;
    for (int n = 0; n < static_cast<int>(r.size()); ++n) {
      if (r[n] >= users_) continue;
      const double gain = current[n] - next[n];
      if (gain > best_gain) {
        best_gain = gain;
        best = n;
      }
    }
    if (best < 0) return false;
    r[best] += 1;
    current[best] = next[best];
    next[best] = kappa(std::min(r[best] + 1, users_ + 1), probs[best], users_);
    return true;
  }

  int users_;
  std::vector<int> r;
  std::vector<double> current;
  std::vector<double> next;
  std::vector<double> probs;
};

}  // namespace

GreedyResult greedy_optimize(const PopularityProfile& profile, int users, double cache) {
  if (users < 1) throw std::invalid_argument("need at least one user");
  const int n_files = profile.size();
  if (!std::isfinite(cache) || cache < -1e-9 || cache > n_files + 1e-9)
    throw std::invalid_argument("cache size must lie in [0, " + std::to_string(n_files) + "], got " +
                                std::to_string(cache));
  const double units_real = cache * users;
  const long long units = std::llround(units_real);
  if (std::abs(units_real - static_cast<double>(units)) > 1e-9)
    throw std::invalid_argument("users * cache = " + std::to_string(units_real) +
                                " is not an integer placement-unit count (cache grid step is 1/" +
                                std::to_string(users) + "); memory-share between adjacent grid points instead");
  if (units < 0 || units > static_cast<long long>(n_files) * users)
    throw std::invalid_argument("placement units outside [0, N*L]");

  GreedySweep sweep(profile, users);
  for (long long s = 0; s < units; ++s) sweep.step();
  GreedyResult result;
  result.allocation = IntegerAllocation{sweep.r, users};
  result.rate = sweep.rate();
  return result;
}

std::vector<double> greedy_sweep(const PopularityProfile& profile, int users) {
  if (users < 1) throw std::invalid_argument("need at least one user");
  GreedySweep sweep(profile, users);
  std::vector<double> rates;
  rates.reserve(static_cast<std::size_t>(profile.size()) * users + 1);
  rates.push_back(sweep.rate());
  while (sweep.step()) rates.push_back(sweep.rate());
  return rates;
}

namespace {

// Request-count view of a demand: counts[j] = number of users whose
// requested file is cached at j copies, j = 0 .. L-1 (fully replicated
// files never cost anything and are left out). The static rate in grouped
// form is
//   sum_j [(L-j)/(j+1)] * (1 - prod_{i=0}^{j} (L - c_j - i) / (L - i)),
// the j-th factor product being the fraction of (j+1)-subsets that avoid
// all c_j users of level j.
double rate_from_counts(const std::vector<int>& counts, int users) {
  double rate = 0.0;
  for (int j = 0; j < users; ++j) {
    const int c = counts[j];
    if (c == 0) continue;
    double avoid = 1.0;
    for (int i = 0; i <= j; ++i) {
      const int numer = users - c - i;
      if (numer <= 0) {
        avoid = 0.0;
        break;
      }
      avoid *= static_cast<double>(numer) / static_cast<double>(users - i);
    }
    rate += static_cast<double>(users - j) / static_cast<double>(j + 1) * (1.0 - avoid);
  }
  return rate;
}

std::vector<int> request_counts(const IntegerAllocation& alloc, const RequestVector& request) {
  std::vector<int> counts(alloc.users, 0);
  for (int file : request.files) {
    if (file < 0 || file >= alloc.n_files())
      throw std::invalid_argument("request names file " + std::to_string(file + 1) + " of " +
                                  std::to_string(alloc.n_files()));
    const int copies = alloc.r[file];
    if (copies < alloc.users) counts[copies] += 1;
  }
  return counts;
}

}  // namespace

double static_rate_for_request(const IntegerAllocation& alloc, const RequestVector& request) {
  alloc.validate();
  if (request.users() != alloc.users)
    throw std::invalid_argument("request lists " + std::to_string(request.users()) + " users, allocation has " +
                                std::to_string(alloc.users));
  return rate_from_counts(request_counts(alloc, request), alloc.users);
}

double static_average_rate(const PopularityProfile& profile, const IntegerAllocation& alloc) {
  alloc.validate();
  if (alloc.n_files() != profile.size())
    throw std::invalid_argument("allocation has " + std::to_string(alloc.n_files()) + " files, profile has " +
                                std::to_string(profile.size()));
  const int users = alloc.users;
  // alpha[j] = probability that one request lands on a level-j file.
  std::vector<double> alpha(users, 0.0);
  for (int n = 0; n < profile.size(); ++n)
    if (alloc.r[n] < users) alpha[alloc.r[n]] += profile.prob(n);
  double rate = 0.0;
  for (int j = 0; j < users; ++j) {
    if (alpha[j] == 0.0) continue;
    rate += static_cast<double>(users - j) / static_cast<double>(j + 1) *
            (1.0 - pow1m(alpha[j], static_cast<double>(j + 1)));
  }
  return rate;
}

WorstCaseRate static_worst_case_rate(const PopularityProfile& profile, const IntegerAllocation& alloc,
                                     std::uint64_t enumeration_budget) {
  alloc.validate();
  if (alloc.n_files() != profile.size())
    throw std::invalid_argument("allocation has " + std::to_string(alloc.n_files()) + " files, profile has " +
                                std::to_string(profile.size()));
  const int users = alloc.users;
  const int n_files = alloc.n_files();

  double combos = 1.0;
  for (int u = 0; u < users; ++u) combos *= n_files;
  WorstCaseRate result;

  if (combos <= static_cast<double>(enumeration_budget)) {
    // Enumerate every request vector with an odometer.
    RequestVector y{std::vector<int>(users, 0)};
    result.rate = -1.0;
    while (true) {
      const double rate = static_rate_for_request(alloc, y);
      if (rate > result.rate) {
        result.rate = rate;
        result.argmax = y;
      }
      int pos = users - 1;
      while (pos >= 0 && y.files[pos] == n_files - 1) y.files[pos--] = 0;
      if (pos < 0) break;
      y.files[pos] += 1;
    }
    result.exact = true;
    return result;
  }

  // The rate depends on the demand only through the per-level request
  // counts, so search over count vectors instead: maximize
  // sum_j t_j(c_j) over c >= 0 with sum_j c_j = L (or <= L when some file
  // is fully replicated and can absorb the remaining users for free).
  // Each t_j is independent, which makes this a small exact DP.
  std::vector<int> levels;  // cache levels < L that some file sits at
  std::vector<int> level_file(users, -1);
  bool absorber = false;
  int absorber_file = -1;
  for (int n = 0; n < n_files; ++n) {
    if (alloc.r[n] >= users) {
      absorber = true;
      if (absorber_file < 0) absorber_file = n;
    } else if (level_file[alloc.r[n]] < 0) {
      level_file[alloc.r[n]] = n;
      levels.push_back(alloc.r[n]);
    }
  }
  std::sort(levels.begin(), levels.end());

  const auto term = [&](int j, int c) {
    std::vector<int> counts(users, 0);
    counts[j] = c;
    return rate_from_counts(counts, users);
  };

  const double kNoState = -1.0;
  std::vector<std::vector<double>> best(levels.size() + 1, std::vector<double>(users + 1, kNoState));
  std::vector<std::vector<int>> choice(levels.size() + 1, std::vector<int>(users + 1, 0));
  best[0][0] = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k)
    for (int used = 0; used <= users; ++used) {
      if (best[k][used] == kNoState) continue;
      for (int c = 0; used + c <= users; ++c) {
        const double value = best[k][used] + (c > 0 ? term(levels[k], c) : 0.0);
        if (value > best[k + 1][used + c]) {
          best[k + 1][used + c] = value;
          choice[k + 1][used + c] = c;
        }
      }
    }

  int take_total = users;
  double take_value = best[levels.size()][users];
  if (absorber) {
    for (int used = 0; used <= users; ++used)
      if (best[levels.size()][used] > take_value) {
        take_value = best[levels.size()][used];
        take_total = used;
      }
  }
  if (take_value == kNoState)
    throw std::logic_error("worst-case search found no feasible demand");  // unreachable: levels or absorber exist

  // Rebuild a witness demand from the chosen counts.
  RequestVector witness{std::vector<int>()};
  int used = take_total;
  for (std::size_t k = levels.size(); k > 0; --k) {
    const int c = choice[k][used];
    for (int i = 0; i < c; ++i) witness.files.push_back(level_file[levels[k - 1]]);
    used -= c;
  }
  while (static_cast<int>(witness.files.size()) < users) witness.files.push_back(absorber_file);
  std::sort(witness.files.begin(), witness.files.end());

  result.rate = take_value;
  result.exact = false;
  result.argmax = witness;
  return result;
}

}  // namespace codedcache
