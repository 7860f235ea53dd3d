#pragma once

#include <string>
#include <vector>

namespace codedcache {

// Immutable popularity profile over a library of files. Probabilities are
// validated, normalized, and stored in non-increasing order; the original
// ordering is kept as a permutation so externally visible file indices can
// be translated in and out of the sorted domain.
class PopularityProfile {
 public:
  // Builds a profile from raw per-file probabilities (any order). Throws
  // std::invalid_argument for an empty list, a non-finite or negative entry
  // (the message names the offending index), an all-zero vector, or a sum
  // deviating from 1 by more than 1e-6. Values are renormalized to sum to 1.
  static PopularityProfile from_values(const std::vector<double>& values);

  // Zipf profile with exponent alpha >= 0: p_n proportional to n^-alpha
  // (alpha = 0 gives the uniform profile).
  static PopularityProfile from_zipf(int n_files, double alpha);

  // Parses a popularity specifier: "uniform", "zipf:<alpha>", or a path to
  // a text file with one probability per line ('#' starts a comment).
  // n_files is required for the two parametric forms and, when positive,
  // cross-checked against the file's entry count.
  static PopularityProfile from_spec(const std::string& spec, int n_files);

  int size() const { return static_cast<int>(probs_.size()); }

  // Probability of the file at sorted position i (0-based, most popular
  // first).
  double prob(int i) const;

  const std::vector<double>& probs() const { return probs_; }

  // permutation()[i] = original index of the file at sorted position i.
  // Ties keep their original relative order, so the mapping is
  // deterministic.
  const std::vector<int>& permutation() const { return perm_; }

  // Inverse mapping: sorted position of the file with original index j.
  const std::vector<int>& inverse_permutation() const { return inv_perm_; }

  // Probability that the file at sorted position i is requested at least
  // once among `ell` independent requests: 1 - (1 - p_i)^ell. Requires
  // ell >= 1.
  double coverage_prob(int i, int ell) const;

  // True when every entry equals 1/N to within 1e-12.
  bool is_uniform() const;

 private:
  PopularityProfile(std::vector<double> probs, std::vector<int> perm);

  std::vector<double> probs_;
  std::vector<int> perm_;
  std::vector<int> inv_perm_;
};

}  // namespace codedcache
