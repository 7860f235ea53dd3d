#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Small numeric helpers shared across the library: stable powers of (1-p),
// binomial coefficients / PMFs, compensated summation, and the keyed
// counter-based generator used for reproducible placement randomness.

namespace codedcache {

// Error thrown when an internal consistency guarantee is violated (failed
// decode, breached certificate, ...). CLI maps this to exit code 2, as
// opposed to input validation errors which map to exit code 1.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

// I/O failures (unwritable paths and friends); treated as user-facing
// validation errors by the CLI.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// (1-p)^e computed as exp(e*log1p(-p)) for small p, which keeps full
// relative precision when p is tiny and the exponent is large (e up to 1e3
// appears in the many-user sweeps). For p >= 0.5 the direct pow is exact
// enough and avoids log1p(-1) at p = 1.
inline double pow1m(double p, double e) {
  if (e == 0.0) return 1.0;
  if (p >= 0.5) return std::pow(1.0 - p, e);
  return std::exp(e * std::log1p(-p));
}

// Binomial coefficient by multiplicative recurrence. Exact in double up to
// the low 50s of n; larger arguments are still accurate to ~1e-15 relative,
// which is all the double evaluation paths need (exact paths use rationals
// on the test side).
inline double binom(long long n, long long k) {
  if (k < 0 || k > n || n < 0) return 0.0;
  if (k > n - k) k = n - k;
  double c = 1.0;
  for (long long i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

// P[Binom(m, p) = j], stable for large m via log-space evaluation.
inline double binom_pmf(long long m, long long j, double p) {
  if (j < 0 || j > m) return 0.0;
  if (p <= 0.0) return j == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return j == m ? 1.0 : 0.0;
  if (m <= 60) return binom(m, j) * std::pow(p, static_cast<double>(j)) * pow1m(p, static_cast<double>(m - j));
  const double lc = std::lgamma(static_cast<double>(m) + 1.0) - std::lgamma(static_cast<double>(j) + 1.0) -
                    std::lgamma(static_cast<double>(m - j) + 1.0);
  const double lt = lc + static_cast<double>(j) * std::log(p) + static_cast<double>(m - j) * std::log1p(-p);
  return lt < -745.0 ? 0.0 : std::exp(lt);
}

// Neumaier-compensated accumulator; used wherever a long probability sum
// must stay well below the 1e-12 validation tolerances (e.g. Zipf
// normalization at N = 1e6).
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace rng {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stateless keyed generator: every draw is a pure function of its key, so
// placement bits are reproducible and independent of evaluation order (a
// user's cache map depends only on the seed and its own key components).
inline std::uint64_t keyed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                           std::uint64_t d = 0) {
  std::uint64_t h = mix64(seed ^ 0x6A09E667F3BCC909ull);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  h = mix64(h ^ d);
  return h;
}

// Uniform double in [0, 1) from the top 53 bits.
inline double to_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

}  // namespace rng

// Deterministic parallel loop: the index space is split into contiguous
// chunks so results written to per-index slots are identical for any thread
// count. Reductions must be done by the caller, serially, over the slots.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& body);

}  // namespace codedcache
