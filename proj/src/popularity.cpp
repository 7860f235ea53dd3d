#include "codedcache/popularity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "codedcache/numeric.hpp"

namespace codedcache {

namespace {

std::vector<int> invert(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (int i = 0; i < static_cast<int>(perm.size()); ++i) inv[perm[i]] = i;
  return inv;
}

}  // namespace

PopularityProfile::PopularityProfile(std::vector<double> probs, std::vector<int> perm)
    : probs_(std::move(probs)), perm_(std::move(perm)), inv_perm_(invert(perm_)) {}

PopularityProfile PopularityProfile::from_values(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("popularity: value list is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw std::invalid_argument("popularity: entry " + std::to_string(i + 1) + " is not finite");
    if (values[i] < 0.0)
      throw std::invalid_argument("popularity: entry " + std::to_string(i + 1) + " is negative (" +
                                  std::to_string(values[i]) + ")");
  }
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  const double sum = acc.value();
  if (sum == 0.0) throw std::invalid_argument("popularity: all entries are zero");
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("popularity: entries sum to " + std::to_string(sum) +
                                ", more than 1e-6 away from 1");

  const int n = static_cast<int>(values.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });
  std::vector<double> sorted(n);
  for (int i = 0; i < n; ++i) sorted[i] = values[order[i]] / sum;
  return PopularityProfile(std::move(sorted), std::move(order));
}

PopularityProfile PopularityProfile::from_zipf(int n_files, double alpha) {
  if (n_files < 1) throw std::invalid_argument("popularity: need at least one file");
  if (!std::isfinite(alpha) || alpha < 0.0)
    throw std::invalid_argument("popularity: zipf exponent must be finite and non-negative");
  std::vector<double> weights(n_files);
  for (int n = 0; n < n_files; ++n) weights[n] = std::pow(static_cast<double>(n + 1), -alpha);
  CompensatedSum acc;
  for (double w : weights) acc.add(w);
  const double sum = acc.value();
  for (double& w : weights) w /= sum;
  std::vector<int> identity(n_files);
  std::iota(identity.begin(), identity.end(), 0);
  return PopularityProfile(std::move(weights), std::move(identity));
}

PopularityProfile PopularityProfile::from_spec(const std::string& spec, int n_files) {
  if (spec == "uniform") {
    if (n_files < 1) throw std::invalid_argument("popularity: 'uniform' needs a positive file count");
    return from_zipf(n_files, 0.0);
  }
  if (spec.rfind("zipf:", 0) == 0) {
    if (n_files < 1) throw std::invalid_argument("popularity: 'zipf:' needs a positive file count");
    const std::string arg = spec.substr(5);
    std::size_t used = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(arg, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("popularity: cannot parse zipf exponent '" + arg + "'");
    }
    if (used != arg.size()) throw std::invalid_argument("popularity: cannot parse zipf exponent '" + arg + "'");
    return from_zipf(n_files, alpha);
  }

  std::ifstream in(spec);
  if (!in) throw std::invalid_argument("popularity: cannot open file '" + spec + "'");
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string token;
    while (fields >> token) {
      try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        values.push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument("popularity: '" + spec + "' line " + std::to_string(line_no) +
                                    ": cannot parse '" + token + "'");
      }
    }
  }
  if (n_files > 0 && static_cast<int>(values.size()) != n_files)
    throw std::invalid_argument("popularity: '" + spec + "' holds " + std::to_string(values.size()) +
                                " entries but " + std::to_string(n_files) + " files were requested");
  return from_values(values);
}

double PopularityProfile::prob(int i) const {
  if (i < 0 || i >= size()) throw std::invalid_argument("popularity: file index out of range");
  return probs_[i];
}

double PopularityProfile::coverage_prob(int i, int ell) const {
  if (ell < 1) throw std::invalid_argument("popularity: coverage needs at least one request");
  return 1.0 - pow1m(prob(i), static_cast<double>(ell));
}

bool PopularityProfile::is_uniform() const {
  const double u = 1.0 / size();
  for (double p : probs_)
    if (std::abs(p - u) > 1e-12) return false;
  return true;
}

}  // namespace codedcache
