#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "codedcache/bounds.hpp"
#include "codedcache/numeric.hpp"
#include "codedcache/popularity.hpp"
#include "support/exact.hpp"

using codedcache::fsn_lower_bound;
using codedcache::PopularityProfile;
using exact::rational;

namespace {

// Literal transcription of the cut bound: max over the number of served
// users l of sum_n (s_n(l) - s_{n+1}(l)) (n - l R_c)^+ with s_n the coverage
// probability of file n and s_{N+1} = 0, all in rationals.
rational cut_bound_exact(const std::vector<rational>& probs, int users, const rational& cache) {
  const int n_files = static_cast<int>(probs.size());
  rational best = 0;
  for (int l = 1; l <= users; ++l) {
    std::vector<rational> coverage(n_files + 1, 0);
    for (int n = 0; n < n_files; ++n) coverage[n] = 1 - exact::pow_rat(1 - probs[n], l);
    rational sum = 0;
    for (int n = 0; n < n_files; ++n) {
      const rational excess = rational(n + 1) - rational(l) * cache;
      if (excess > 0) sum += (coverage[n] - coverage[n + 1]) * excess;
    }
    best = std::max(best, sum);
  }
  return best;
}

}  // namespace

TEST_CASE("cut lower bound matches its rational transcription") {
  const std::vector<std::vector<int>> weight_sets = {{1, 1}, {3, 1}, {4, 2, 1}, {5, 3, 2, 1}};
  for (const auto& weights : weight_sets) {
    const auto probs = exact::profile_from_weights(weights);
    const auto profile = PopularityProfile::from_values(exact::to_doubles(probs));
    const int n_files = static_cast<int>(weights.size());
    for (int users : {1, 2, 3}) {
      for (int k = 0; k <= 8; ++k) {
        const rational cache(k * n_files, 8);
        const double got = fsn_lower_bound(profile, users, exact::to_double(cache));
        const double want = exact::to_double(cut_bound_exact(probs, users, cache));
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("uniform profiles collapse to the single surviving term") {
  for (int n_files : {1, 2, 5, 17}) {
    const auto profile = PopularityProfile::from_zipf(n_files, 0.0);
    for (int users : {1, 3, 9}) {
      for (double cache : {0.0, 0.4, 1.5, n_files * 0.75}) {
        if (cache > n_files) continue;
        double closed = 0.0;
        for (int l = 1; l <= users; ++l) {
          const double excess = n_files - l * cache;
          if (excess <= 0.0) break;
          closed = std::max(closed, (1.0 - codedcache::pow1m(1.0 / n_files, l)) * excess);
        }
        CHECK(fsn_lower_bound(profile, users, cache) == closed);
      }
    }
  }
}

TEST_CASE("relaxed bound caps the cut size at a quarter of the catalog") {
  // N = 10, L = 15: cuts are limited to l <= 3, and at zero cache the best
  // is l = 3 giving (1 - 0.9^3) * 10 = 2.71.
  CHECK(codedcache::relaxed_lower_bound(10, 15, 0.0) == doctest::Approx(2.71).epsilon(1e-12));
  // With only one user the cap cannot bind.
  CHECK(codedcache::relaxed_lower_bound(10, 1, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  // The relaxed bound never exceeds the full bound on uniform profiles.
  const auto uniform = PopularityProfile::from_zipf(12, 0.0);
  for (double cache : {0.0, 1.0, 3.0, 6.0}) {
    CHECK(codedcache::relaxed_lower_bound(12, 9, cache) <= fsn_lower_bound(uniform, 9, cache) + 1e-15);
  }
}

TEST_CASE("high-cache closed form guards its domain and hits the endpoints") {
  const auto profile = PopularityProfile::from_values({0.7, 0.3});
  const int users = 4;
  const double threshold = 2.0 - 1.0 / users;
  CHECK_THROWS_AS(codedcache::high_cache_optimal(profile, users, threshold - 0.01), std::domain_error);
  try {
    codedcache::high_cache_optimal(profile, users, 0.0);
    FAIL("expected a throw");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("1.75") != std::string::npos);
  }
  CHECK(codedcache::high_cache_optimal(profile, users, threshold) ==
        doctest::Approx(0.3 / users).epsilon(1e-14));
  CHECK(codedcache::high_cache_optimal(profile, users, 2.0) == 0.0);
  // Uniform profiles use the wider window starting at N - N/L.
  const auto uniform = PopularityProfile::from_zipf(4, 0.0);
  CHECK(codedcache::high_cache_optimal(uniform, 2, 2.0) == doctest::Approx(0.25 * 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(codedcache::high_cache_optimal(uniform, 2, 1.9), std::domain_error);
}

TEST_CASE("corner points interleave between zero and the catalog size") {
  const auto corners = codedcache::corner_points(2, 2, codedcache::GapMode::Ergodic);
  REQUIRE(corners.points.size() == 3);
  CHECK(corners.l_max == 2);
  // Anchored at (0, N) and (l_max, 0); with N = 2 the interior corner sits
  // at cache 1/2.
  CHECK(corners.points.front() == std::pair<int, double>(0, 2.0));
  CHECK(corners.points.back() == std::pair<int, double>(2, 0.0));
  CHECK(corners.points[1].first == 1);
  CHECK(corners.points[1].second == doctest::Approx(0.5).epsilon(1e-12));
  for (std::size_t i = 1; i + 1 < corners.points.size(); ++i) {
    CHECK(corners.points[i].second > 0.0);
    CHECK(corners.points[i].second < 2.0);
  }
  // Static mode caps the cut size at ceil(N/4).
  const auto wide = codedcache::corner_points(10, 15, codedcache::GapMode::Static);
  CHECK(wide.l_max == 3);
  const auto tall = codedcache::corner_points(10, 2, codedcache::GapMode::Static);
  CHECK(tall.l_max == 2);
}
