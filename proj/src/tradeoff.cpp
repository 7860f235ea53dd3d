#include "codedcache/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "codedcache/bounds.hpp"
#include "codedcache/centralized.hpp"
#include "codedcache/decentralized.hpp"
#include "codedcache/numeric.hpp"

namespace codedcache {

double TradeoffCurve::eval(double cache) const {
  if (points.empty()) throw std::domain_error("curve is empty");
  if (!std::isfinite(cache) || cache < points.front().r_c - 1e-12 || cache > points.back().r_c + 1e-12)
    throw std::domain_error("cache size " + std::to_string(cache) + " outside the curve span [" +
                            std::to_string(points.front().r_c) + ", " + std::to_string(points.back().r_c) + "]");
  cache = std::clamp(cache, points.front().r_c, points.back().r_c);
  const auto it = std::lower_bound(points.begin(), points.end(), cache,
                                   [](const CurvePoint& pt, double x) { return pt.r_c < x; });
  if (it == points.begin()) return it->r_u;
  if (it == points.end()) return points.back().r_u;
  if (it->r_c == cache) return it->r_u;
  const CurvePoint& hi = *it;
  const CurvePoint& lo = *(it - 1);
  const double t = (cache - lo.r_c) / (hi.r_c - lo.r_c);
  return lo.r_u + t * (hi.r_u - lo.r_u);
}

TradeoffCurve convexify(std::vector<CurvePoint> points, std::string label) {
  if (points.empty()) throw std::invalid_argument("convexify: no points");
  for (const auto& pt : points)
    if (!std::isfinite(pt.r_c) || !std::isfinite(pt.r_u))
      throw std::invalid_argument("convexify: non-finite point");
  std::sort(points.begin(), points.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return a.r_c != b.r_c ? a.r_c < b.r_c : a.r_u < b.r_u;
  });
  // Equal cache sizes: only the cheapest rate can be on the lower envelope.
  std::vector<CurvePoint> unique;
  for (const auto& pt : points)
    if (unique.empty() || unique.back().r_c != pt.r_c) unique.push_back(pt);

  // Monotone-chain lower hull; collinear points (cross product within
  // 1e-12) are merged away so memory-sharing segments stay maximal.
  std::vector<CurvePoint> hull;
  for (const auto& pt : unique) {
    while (hull.size() >= 2) {
      const CurvePoint& a = hull[hull.size() - 2];
      const CurvePoint& b = hull[hull.size() - 1];
      const double cross = (b.r_c - a.r_c) * (pt.r_u - a.r_u) - (b.r_u - a.r_u) * (pt.r_c - a.r_c);
      if (cross <= 1e-12) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(pt);
  }

  TradeoffCurve curve;
  curve.points = std::move(hull);
  curve.label = std::move(label);
  curve.convexified = true;
  return curve;
}

double hpf_rate(const PopularityProfile& profile, int users, int cached_files) {
  if (users < 1) throw std::invalid_argument("need at least one user");
  if (cached_files < 0 || cached_files > profile.size())
    throw std::invalid_argument("cached file count must lie in [0, " + std::to_string(profile.size()) +
                                "], got " + std::to_string(cached_files));
  CompensatedSum acc;
  for (int n = cached_files; n < profile.size(); ++n) acc.add(profile.coverage_prob(n, users));
  return acc.value();
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "lower") return Scheme::Lower;
  if (name == "centralized") return Scheme::Centralized;
  if (name == "decentralized") return Scheme::Decentralized;
  if (name == "hpf") return Scheme::Hpf;
  if (name == "mn_centralized") return Scheme::MnCentralized;
  if (name == "mn_decentralized") return Scheme::MnDecentralized;
  if (name == "optimal_regime") return Scheme::OptimalRegime;
  throw std::invalid_argument(
      "unknown scheme '" + name +
      "' (expected lower|centralized|decentralized|hpf|mn_centralized|mn_decentralized|optimal_regime)");
}

std::string scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::Lower: return "lower";
    case Scheme::Centralized: return "centralized";
    case Scheme::Decentralized: return "decentralized";
    case Scheme::Hpf: return "hpf";
    case Scheme::MnCentralized: return "mn_centralized";
    case Scheme::MnDecentralized: return "mn_decentralized";
    case Scheme::OptimalRegime: return "optimal_regime";
  }
  throw std::logic_error("unhandled scheme");
}

namespace {

std::vector<double> cache_grid(double lo, double hi, double step) {
  if (!std::isfinite(step) || step <= 0.0) throw std::invalid_argument("grid step must be positive");
  std::vector<double> xs;
  for (long long k = 0;; ++k) {
    const double x = lo + static_cast<double>(k) * step;
    if (x >= hi - 1e-12) break;
    xs.push_back(x);
  }
  xs.push_back(hi);
  return xs;
}

// Worst-case rate of full uniform replication at cache x: every file is
// cached at rate x/N, giving (L - Lx/N) / (1 + Lx/N) per demand.
double mn_centralized_rate(int n_files, int users, double cache) {
  const double t = static_cast<double>(users) * cache / static_cast<double>(n_files);
  return (static_cast<double>(users) - t) / (1.0 + t);
}

}  // namespace

TradeoffCurve build_curve(Scheme scheme, const PopularityProfile& profile, int users, double grid_step,
                          bool convexify_result, int threads) {
  if (users < 1) throw std::invalid_argument("need at least one user");
  const int n_files = profile.size();
  const double n = static_cast<double>(n_files);
  TradeoffCurve curve;
  curve.label = scheme_name(scheme);

  const auto sample = [&](const std::vector<double>& xs, const std::function<double(double)>& rate) {
    curve.points.assign(xs.size(), CurvePoint{});
    parallel_for(static_cast<std::int64_t>(xs.size()), threads,
                 [&](std::int64_t i) { curve.points[i] = CurvePoint{xs[i], rate(xs[i])}; });
  };

  switch (scheme) {
    case Scheme::Lower:
      sample(cache_grid(0.0, n, grid_step), [&](double x) { return fsn_lower_bound(profile, users, x); });
      break;
    case Scheme::Centralized: {
      // One greedy pass gives the whole unit grid; fractional cache sizes
      // memory-share between adjacent grid points (the sweep is convex).
      const std::vector<double> unit_rates = greedy_sweep(profile, users);
      const auto xs = cache_grid(0.0, n, grid_step);
      sample(xs, [&](double x) {
        const double units = x * static_cast<double>(users);
        const double lo = std::floor(units);
        const std::size_t idx = static_cast<std::size_t>(lo);
        if (idx + 1 >= unit_rates.size()) return unit_rates.back();
        const double t = units - lo;
        return (1.0 - t) * unit_rates[idx] + t * unit_rates[idx + 1];
      });
      break;
    }
    case Scheme::Decentralized:
      sample(cache_grid(0.0, n, grid_step),
             [&](double x) { return kkt_optimize(profile, users, x).rate; });
      break;
    case Scheme::Hpf: {
      // Anchors at integer file counts; intermediate caches share memory
      // between the neighbouring anchors.
      std::vector<double> anchor(n_files + 1);
      for (int k = 0; k <= n_files; ++k) anchor[k] = hpf_rate(profile, users, k);
      sample(cache_grid(0.0, n, grid_step), [&](double x) {
        const double lo = std::floor(x);
        const std::size_t idx = static_cast<std::size_t>(lo);
        if (idx + 1 >= anchor.size()) return anchor.back();
        const double t = x - lo;
        return (1.0 - t) * anchor[idx] + t * anchor[idx + 1];
      });
      break;
    }
    case Scheme::MnCentralized:
      sample(cache_grid(0.0, n, grid_step), [&](double x) { return mn_centralized_rate(n_files, users, x); });
      break;
    case Scheme::MnDecentralized:
      sample(cache_grid(0.0, n, grid_step), [&](double x) { return mn_worst_case(n_files, users, x).value; });
      break;
    case Scheme::OptimalRegime: {
      const double threshold = profile.is_uniform() ? n - n / users : n - 1.0 / users;
      std::vector<double> xs;
      xs.push_back(threshold);
      for (long long k = static_cast<long long>(std::ceil(threshold / grid_step));; ++k) {
        const double x = static_cast<double>(k) * grid_step;
        if (x >= n - 1e-12) break;
        if (x > threshold + 1e-12) xs.push_back(x);
      }
      xs.push_back(n);
      sample(xs, [&](double x) { return high_cache_optimal(profile, users, x); });
      break;
    }
  }

  if (convexify_result) {
    auto label = curve.label;
    curve = convexify(std::move(curve.points), std::move(label));
  }
  return curve;
}

double gap_limit_ergodic_zero_cache() { return 1.0 / (1.0 - std::exp(-1.0)); }
double gap_limit_static_zero_cache() { return 1.0 / (1.0 - std::exp(-0.25)); }
double gap_limit_static_corner() {
  const double v = 1.25;
  const double vv = std::pow(v, v);
  const double t = 1.0 + v * std::log(v) / (vv - 1.0);
  return vv * t * t;
}

namespace {

// Fast uniform-profile cut bound: coefficient (1 - (1-1/N)^ell) per cut ell,
// evaluated as max over ell of coeff[ell] * (N - ell x)^+. Equals the
// general profile bound exactly for the uniform profile (interior coverage
// differences vanish term by term).
struct UniformCut {
  UniformCut(int n_files, int users, int ell_cap) : n(static_cast<double>(n_files)) {
    const int count = std::min(users, ell_cap);
    coeff.resize(count + 1, 0.0);
    for (int ell = 1; ell <= count; ++ell)
      coeff[ell] = 1.0 - pow1m(1.0 / n, static_cast<double>(ell));
  }

  double operator()(double x) const {
    double best = 0.0;
    for (int ell = 1; ell < static_cast<int>(coeff.size()); ++ell) {
      const double excess = n - static_cast<double>(ell) * x;
      if (excess <= 0.0) break;  // later cuts only need more cache
      best = std::max(best, coeff[ell] * excess);
    }
    return best;
  }

  double n;
  std::vector<double> coeff;
};

struct RatioScan {
  double max_ratio = 0.0;
  double argmax = 0.0;
};

// Evaluates numerator/denominator over the given cache sizes (ascending),
// skipping points where the denominator vanishes; ties keep the smallest
// cache size.
RatioScan scan_ratio(const std::vector<double>& xs, const TradeoffCurve& numerator,
                     const std::function<double(double)>& denominator, int threads) {
  std::vector<double> ratio(xs.size(), -1.0);
  parallel_for(static_cast<std::int64_t>(xs.size()), threads, [&](std::int64_t i) {
    const double lb = denominator(xs[i]);
    if (lb > 0.0) ratio[i] = numerator.eval(xs[i]) / lb;
  });
  RatioScan scan;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (ratio[i] > scan.max_ratio) {
      scan.max_ratio = ratio[i];
      scan.argmax = xs[i];
    }
  return scan;
}

std::vector<double> certificate_grid(int n_files, int users, GapMode mode, int grid_points) {
  if (grid_points < 1) throw std::invalid_argument("need at least one grid interval");
  const double n = static_cast<double>(n_files);
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(grid_points) + 8);
  for (int k = 0; k < grid_points; ++k) xs.push_back(n * static_cast<double>(k) / grid_points);
  for (const auto& [ell, omega] : corner_points(n_files, users, mode).points)
    if (omega < n) xs.push_back(omega);  // stay inside [0, N)
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace

GapCertificate gap_ergodic(int n_files, int users, int grid_points, int threads) {
  if (n_files < 1) throw std::invalid_argument("need at least one file");
  if (users < 1) throw std::invalid_argument("need at least one user");
  const double n = static_cast<double>(n_files);
  const double beta = 1.0 - 1.0 / n;

  // Convexified achievable curve: the zero-cache rate N(1 - (1-1/N)^L)
  // plus the uniform-allocation sweep (N - x) / (1 + x beta), whose lower
  // envelope is taken over a dense grid and the corner points.
  std::vector<CurvePoint> pts;
  pts.push_back({0.0, n * (1.0 - pow1m(1.0 / n, static_cast<double>(users)))});
  const int samples = std::max(2 * grid_points, 512);
  for (int k = 1; k <= samples; ++k) {
    const double x = n * static_cast<double>(k) / samples;
    pts.push_back({x, (n - x) / (1.0 + x * beta)});
  }
  const TradeoffCurve upper = convexify(std::move(pts));

  // Full cut range [1:L]: at zero cache the deepest cut matches the
  // achievable rate exactly, so the certified ratio starts at 1.
  const UniformCut lower(n_files, users, users);
  const auto xs = certificate_grid(n_files, users, GapMode::Ergodic, grid_points);
  const RatioScan scan = scan_ratio(xs, upper, [&](double x) { return lower(x); }, threads);

  if (scan.max_ratio > 4.0)
    throw InvariantError("ergodic gap certificate breached: ratio " + std::to_string(scan.max_ratio) +
                         " at cache " + std::to_string(scan.argmax) + " for N=" + std::to_string(n_files) +
                         ", L=" + std::to_string(users));
  return {n_files, users, scan.max_ratio, scan.argmax, 4.0};
}

GapCertificate gap_static(int n_files, int users, int grid_points, int threads) {
  if (n_files < 1) throw std::invalid_argument("need at least one file");
  if (users < 1) throw std::invalid_argument("need at least one user");
  const double n = static_cast<double>(n_files);
  const double uncoded = static_cast<double>(std::min(users, n_files));

  // Convexified uniform random placement baseline, anchored at the uncoded
  // zero-cache point (0, min(L, N)): serving whole files needs at most one
  // transmission per user and never more than the library.
  const int samples = std::max(2 * grid_points, 512);
  std::vector<CurvePoint> pts;
  pts.push_back({0.0, uncoded});
  for (int k = 1; k <= samples; ++k) {
    const double x = n * static_cast<double>(k) / samples;
    pts.push_back({x, mn_worst_case(n_files, users, x).value});
  }
  const TradeoffCurve baseline = convexify(std::move(pts));

  // Outer envelope (N - x) * min(1/x, 1) with the same zero-cache anchor;
  // the chain lower <= baseline <= envelope is verified below.
  std::vector<CurvePoint> env_pts;
  env_pts.push_back({0.0, uncoded});
  for (int k = 1; k <= samples; ++k) {
    const double x = n * static_cast<double>(k) / samples;
    env_pts.push_back({x, (n - x) * std::min(1.0 / x, 1.0)});
  }
  const TradeoffCurve envelope = convexify(std::move(env_pts));

  const UniformCut lower(n_files, users, (n_files + 3) / 4);
  const auto xs = certificate_grid(n_files, users, GapMode::Static, grid_points);
  for (double x : xs) {
    const double lb = lower(x);
    const double mid = baseline.eval(x);
    const double top = envelope.eval(x);
    if (lb > mid * (1.0 + 1e-9) + 1e-9 || mid > top * (1.0 + 1e-9) + 1e-9)
      throw InvariantError("static bound chain violated at cache " + std::to_string(x) + " for N=" +
                           std::to_string(n_files) + ", L=" + std::to_string(users) + ": lower=" +
                           std::to_string(lb) + ", baseline=" + std::to_string(mid) + ", envelope=" +
                           std::to_string(top));
  }

  const RatioScan scan = scan_ratio(xs, baseline, [&](double x) { return lower(x); }, threads);
  if (scan.max_ratio > 4.7)
    throw InvariantError("static gap certificate breached: ratio " + std::to_string(scan.max_ratio) +
                         " at cache " + std::to_string(scan.argmax) + " for N=" + std::to_string(n_files) +
                         ", L=" + std::to_string(users));
  return {n_files, users, scan.max_ratio, scan.argmax, 4.7};
}

}  // namespace codedcache
