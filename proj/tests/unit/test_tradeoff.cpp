#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "codedcache/bounds.hpp"
#include "codedcache/centralized.hpp"
#include "codedcache/numeric.hpp"
#include "codedcache/popularity.hpp"
#include "codedcache/tradeoff.hpp"

using codedcache::build_curve;
using codedcache::convexify;
using codedcache::CurvePoint;
using codedcache::PopularityProfile;
using codedcache::Scheme;

TEST_CASE("lower envelope keeps convex chains and drops dominated points") {
  // Already convex: all points stay.
  const auto convex = convexify({{0.0, 4.0}, {1.0, 2.0}, {2.0, 1.0}, {3.0, 0.5}});
  REQUIRE(convex.points.size() == 4);
  CHECK(convex.convexified);

  // A point above the chord disappears.
  const auto trimmed = convexify({{0.0, 4.0}, {1.0, 3.9}, {2.0, 0.0}});
  REQUIRE(trimmed.points.size() == 2);
  CHECK(trimmed.points[0].r_c == 0.0);
  CHECK(trimmed.points[1].r_c == 2.0);

  // Collinear interior points merge into one segment.
  const auto merged = convexify({{0.0, 2.0}, {1.0, 1.0}, {2.0, 0.0}});
  REQUIRE(merged.points.size() == 2);

  // Duplicate cache sizes keep the cheaper rate.
  const auto dedup = convexify({{0.0, 4.0}, {0.0, 3.0}, {1.0, 0.0}});
  REQUIRE(dedup.points.size() == 2);
  CHECK(dedup.points[0].r_u == 3.0);

  CHECK_THROWS_AS(convexify({}), std::invalid_argument);
  CHECK_THROWS_AS(convexify({{0.0, std::nan("")}}), std::invalid_argument);
}

TEST_CASE("curve evaluation interpolates and guards its span") {
  const auto curve = convexify({{0.0, 4.0}, {2.0, 1.0}, {4.0, 0.0}});
  CHECK(curve.eval(0.0) == 4.0);
  CHECK(curve.eval(1.0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(curve.eval(3.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(curve.eval(4.0) == 0.0);
  CHECK_THROWS_AS(curve.eval(-0.5), std::domain_error);
  CHECK_THROWS_AS(curve.eval(4.5), std::domain_error);
}

TEST_CASE("popular-file caching pays the coverage of the uncached tail") {
  const auto uniform = PopularityProfile::from_zipf(2, 0.0);
  CHECK(codedcache::hpf_rate(uniform, 2, 0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(codedcache::hpf_rate(uniform, 2, 1) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(codedcache::hpf_rate(uniform, 2, 2) == 0.0);
  CHECK_THROWS_AS(codedcache::hpf_rate(uniform, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(codedcache::hpf_rate(uniform, 2, -1), std::invalid_argument);
}

TEST_CASE("scheme names round-trip and unknown names are rejected") {
  for (Scheme s : {Scheme::Lower, Scheme::Centralized, Scheme::Decentralized, Scheme::Hpf,
                   Scheme::MnCentralized, Scheme::MnDecentralized, Scheme::OptimalRegime}) {
    CHECK(codedcache::scheme_from_string(codedcache::scheme_name(s)) == s);
  }
  CHECK_THROWS_AS(codedcache::scheme_from_string("turbo"), std::invalid_argument);
}

TEST_CASE("sampled curves hit the grid endpoints and match point evaluators") {
  const auto profile = PopularityProfile::from_values({0.5, 0.3, 0.2});
  const int users = 2;
  const auto curve = build_curve(Scheme::Centralized, profile, users, 0.5);
  REQUIRE_FALSE(curve.points.empty());
  CHECK(curve.min_cache() == 0.0);
  CHECK(curve.max_cache() == 3.0);
  for (const auto& pt : curve.points) {
    const double units = pt.r_c * users;
    if (units == std::floor(units)) {
      const auto single = codedcache::greedy_optimize(profile, users, pt.r_c);
      CHECK(pt.r_u == doctest::Approx(single.rate).epsilon(1e-13));
    }
  }

  const auto dec = build_curve(Scheme::Decentralized, profile, users, 0.75);
  CHECK(dec.points.back().r_u == doctest::Approx(0.0).epsilon(1e-12));
  const auto lower = build_curve(Scheme::Lower, profile, users, 0.75);
  REQUIRE(lower.points.size() == dec.points.size());
  for (std::size_t i = 0; i < dec.points.size(); ++i) {
    CHECK(lower.points[i].r_c == dec.points[i].r_c);
    CHECK(lower.points[i].r_u <= dec.points[i].r_u + 1e-12);
  }

  // The regime curve starts at its threshold, not at zero.
  const auto regime = build_curve(Scheme::OptimalRegime, profile, users, 0.5);
  CHECK(regime.min_cache() == doctest::Approx(3.0 - 0.5).epsilon(1e-12));
  CHECK(regime.points.back().r_u == 0.0);

  // Thread count must not change sampled values.
  const auto threaded = build_curve(Scheme::Centralized, profile, users, 0.5, false, 4);
  REQUIRE(threaded.points.size() == curve.points.size());
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    CHECK(threaded.points[i].r_c == curve.points[i].r_c);
    CHECK(threaded.points[i].r_u == curve.points[i].r_u);
  }
}

TEST_CASE("single-file networks certify a gap of exactly one") {
  const auto certificate = codedcache::gap_ergodic(1, 3, 200);
  CHECK(certificate.max_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(certificate.certified_bound == 4.0);
}

TEST_CASE("gap certificates stay under their bounds on small networks") {
  for (int n_files : {1, 2, 3, 7}) {
    for (int users : {1, 2, 5}) {
      const auto ergodic = codedcache::gap_ergodic(n_files, users, 400);
      CHECK(ergodic.max_ratio <= 4.0);
      CHECK(ergodic.max_ratio >= 1.0 - 1e-12);
      CHECK(ergodic.argmax_rc >= 0.0);
      CHECK(ergodic.argmax_rc < n_files);
      const auto stat = codedcache::gap_static(n_files, users, 400);
      CHECK(stat.max_ratio <= 4.7);
      CHECK(stat.max_ratio > 0.0);
      CHECK(stat.certified_bound == 4.7);
    }
  }
}

TEST_CASE("limit constants match their closed forms") {
  CHECK(codedcache::gap_limit_ergodic_zero_cache() == doctest::Approx(1.5820).epsilon(5e-4));
  CHECK(codedcache::gap_limit_static_zero_cache() == doctest::Approx(4.521).epsilon(1e-3));
  CHECK(codedcache::gap_limit_static_corner() == doctest::Approx(4.607).epsilon(1e-3));
}

TEST_CASE("certificate ratios on corner segments peak at the segment ends") {
  // The achievable envelope is piecewise linear and the uniform cut bound is
  // affine and positive between adjacent corners, so the ratio on each
  // segment is quasiconvex: a dense scan must not beat the endpoints.
  const int n_files = 12;
  const int users = 9;
  const double n = n_files;
  const double beta = 1.0 - 1.0 / n;

  std::vector<CurvePoint> pts;
  pts.push_back({0.0, n * (1.0 - codedcache::pow1m(1.0 / n, static_cast<double>(users)))});
  for (int k = 1; k <= 4096; ++k) {
    const double x = n * k / 4096.0;
    pts.push_back({x, (n - x) / (1.0 + x * beta)});
  }
  const auto upper = convexify(std::move(pts));
  const auto lower_bound_at = [&](double x) {
    double best = 0.0;
    for (int ell = 1; ell <= users; ++ell) {
      const double excess = n - ell * x;
      if (excess <= 0.0) break;
      best = std::max(best, (1.0 - codedcache::pow1m(1.0 / n, static_cast<double>(ell))) * excess);
    }
    return best;
  };

  const auto corners = codedcache::corner_points(n_files, users, codedcache::GapMode::Ergodic);
  for (std::size_t i = 0; i + 1 < corners.points.size(); ++i) {
    const double a = corners.points[i].second;
    const double b = corners.points[i + 1].second;
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    if (hi >= n) continue;
    const double end_ratio = std::max(upper.eval(lo) / lower_bound_at(lo), upper.eval(hi) / lower_bound_at(hi));
    for (int k = 1; k < 64; ++k) {
      const double x = lo + (hi - lo) * k / 64.0;
      const double lb = lower_bound_at(x);
      if (lb <= 0.0) continue;
      CHECK(upper.eval(x) / lb <= end_ratio + 1e-9);
    }
  }
}
