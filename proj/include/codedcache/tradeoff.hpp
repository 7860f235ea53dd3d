#pragma once

#include <string>
#include <vector>

#include "codedcache/popularity.hpp"

namespace codedcache {

// Rate-versus-cache tradeoff curves, convexification (memory sharing), and
// the multiplicative-gap certificates.

struct CurvePoint {
  double r_c = 0.0;
  double r_u = 0.0;
};

struct TradeoffCurve {
  std::vector<CurvePoint> points;  // strictly increasing in r_c
  std::string label;
  bool convexified = false;

  double min_cache() const { return points.front().r_c; }
  double max_cache() const { return points.back().r_c; }

  // Piecewise-linear evaluation. Throws std::domain_error outside the
  // cache span of the curve.
  double eval(double cache) const;
};

// Lower convex envelope of a point set (memory sharing between operating
// points). Points with equal cache size keep the smallest rate; collinear
// interior points are merged using a 1e-12 cross-product tolerance. Throws
// std::invalid_argument on an empty set or non-finite coordinates.
TradeoffCurve convexify(std::vector<CurvePoint> points, std::string label = "");

// Rate of caching the R_c most popular files outright and multicasting the
// rest on demand: sum_{n > R_c} (1 - (1-p_n)^L). Requires an integer number
// of cached files, 0 <= cached_files <= N.
double hpf_rate(const PopularityProfile& profile, int users, int cached_files);

enum class Scheme {
  Lower,            // ergodic converse bound
  Centralized,      // greedy-optimal coordinated placement, ergodic
  Decentralized,    // water-filling random placement, ergodic
  Hpf,              // most-popular-files baseline (integer anchors, shared)
  MnCentralized,    // uniform-placement worst-case static baseline
  MnDecentralized,  // uniform random placement worst-case static baseline
  OptimalRegime,    // exact optimum over the large-cache regime
};

Scheme scheme_from_string(const std::string& name);
std::string scheme_name(Scheme scheme);

// Samples a scheme over the cache grid {0, step, 2*step, ..., N} (N is
// always included; OptimalRegime instead starts at its regime threshold).
// Set convexify_result to take the lower envelope of the sampled points.
TradeoffCurve build_curve(Scheme scheme, const PopularityProfile& profile, int users, double grid_step,
                          bool convexify_result = false, int threads = 1);

struct GapCertificate {
  int n_files = 0;
  int users = 0;
  double max_ratio = 0.0;
  double argmax_rc = 0.0;
  double certified_bound = 0.0;
};

// Certifies that the convexified uniform-placement achievable envelope is
// within a factor 4 of the ergodic lower bound for the uniform profile,
// over cache sizes in [0, N). The ratio is evaluated at the corner points
// plus a uniform grid with `grid_points` intervals; a breach raises
// InvariantError. Ties in the argmax resolve to the smallest cache size.
GapCertificate gap_ergodic(int n_files, int users, int grid_points = 10000, int threads = 1);

// Static-demand counterpart: certifies the convexified uniform-placement
// baseline (anchored at the uncoded point (0, min(L, N))) within a factor
// 4.7 of the relaxed lower bound, and checks the bound chain
// lower <= baseline <= (N-x)*min(1/x, 1) envelope along the way.
GapCertificate gap_static(int n_files, int users, int grid_points = 10000, int threads = 1);

// Limiting ratios that the certificates approach asymptotically:
// zero-cache ergodic 1/(1 - e^-1), zero-cache static 1/(1 - e^-(1/4)), and
// the interior-corner static limit v^v (1 + v ln v / (v^v - 1))^2 at
// v = 5/4.
double gap_limit_ergodic_zero_cache();
double gap_limit_static_zero_cache();
double gap_limit_static_corner();

}  // namespace codedcache
