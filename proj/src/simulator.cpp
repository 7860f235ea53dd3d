#include "codedcache/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

#include "codedcache/numeric.hpp"

namespace codedcache {

namespace {

constexpr std::uint64_t kSaltDatabase = 1;
constexpr std::uint64_t kSaltCache = 2;
constexpr std::uint64_t kSaltDemand = 3;

std::uint64_t comb_u64(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return c;
}

// Lexicographic rank of a size-k subset (bitmask) of {0..n-1}: subsets are
// ordered by their sorted element lists, so skipping element `pos` while
// still needing `k` picks jumps over C(n-pos-1, k-1) subsets.
std::int64_t rank_combination(std::uint32_t mask, int n, int k) {
  std::int64_t rank = 0;
  int need = k;
  for (int pos = 0; pos < n && need > 0; ++pos) {
    if (mask & (1u << pos)) {
      --need;
    } else {
      rank += static_cast<std::int64_t>(comb_u64(n - pos - 1, need - 1));
    }
  }
  return rank;
}

// Inverse of rank_combination.
std::uint32_t unrank_combination(std::int64_t rank, int n, int k) {
  std::uint32_t mask = 0;
  int need = k;
  for (int pos = 0; pos < n && need > 0; ++pos) {
    const std::int64_t skip = static_cast<std::int64_t>(comb_u64(n - pos - 1, need - 1));
    if (rank < skip) {
      mask |= 1u << pos;
      --need;
    } else {
      rank -= skip;
    }
  }
  return mask;
}

}  // namespace

SimulatedNetwork::SimulatedNetwork(int n_files, int users, std::int64_t file_bits, std::uint64_t seed)
    : n_files_(n_files), users_(users), requested_bits_(file_bits), file_bits_(file_bits), seed_(seed) {
  if (n_files < 1) throw std::invalid_argument("simulator: need at least one file");
  if (users < 1) throw std::invalid_argument("simulator: need at least one user");
  if (users > 20)
    throw std::invalid_argument("simulator: delivery enumerates all 2^L user subsets; L is capped at 20");
  if (file_bits < 1) throw std::invalid_argument("simulator: file size must be positive");
}

std::uint8_t SimulatedNetwork::database_bit(int file, std::int64_t bit) const {
  return static_cast<std::uint8_t>(rng::keyed(seed_, kSaltDatabase, static_cast<std::uint64_t>(file),
                                              static_cast<std::uint64_t>(bit)) &
                                   1u);
}

void SimulatedNetwork::place_centralized(const IntegerAllocation& alloc) {
  alloc.validate();
  if (alloc.n_files() != n_files_ || alloc.users != users_)
    throw std::invalid_argument("simulator: allocation shape does not match the network");

  // The file is padded to a common multiple of the subfile counts so every
  // split is exact.
  std::uint64_t common = 1;
  for (int n = 0; n < n_files_; ++n) {
    const std::uint64_t parts = comb_u64(users_, alloc.r[n]);
    if (parts > static_cast<std::uint64_t>(requested_bits_))
      throw std::invalid_argument("simulator: file " + std::to_string(n + 1) + " splits into " +
                                  std::to_string(parts) + " subfiles but files hold only " +
                                  std::to_string(requested_bits_) + " bits");
    common = std::lcm(common, parts);
    if (common > (1ull << 30))
      throw std::invalid_argument(
          "simulator: padding the file to a common multiple of the subfile counts exceeds 2^30 bits; "
          "choose copy counts with smaller C(L, r_n)");
  }
  file_bits_ = static_cast<std::int64_t>((static_cast<std::uint64_t>(requested_bits_) + common - 1) / common *
                                         common);
  copies_ = alloc.r;
  subfile_bits_.assign(n_files_, 0);
  for (int n = 0; n < n_files_; ++n)
    subfile_bits_[n] = file_bits_ / static_cast<std::int64_t>(comb_u64(users_, alloc.r[n]));
  cache_masks_.clear();
  cache_prob_.clear();
  placement_ = Placement::Centralized;
}

void SimulatedNetwork::place_decentralized(const FractionalAllocation& alloc) {
  alloc.validate();
  if (alloc.n_files() != n_files_)
    throw std::invalid_argument("simulator: allocation shape does not match the network");
  file_bits_ = requested_bits_;
  cache_masks_.assign(n_files_, std::vector<std::uint32_t>(static_cast<std::size_t>(file_bits_), 0));
  for (int n = 0; n < n_files_; ++n) {
    const double r = alloc.r[n];
    for (std::int64_t i = 0; i < file_bits_; ++i) {
      std::uint32_t mask = 0;
      for (int u = 0; u < users_; ++u) {
        const double draw = rng::to_unit(rng::keyed(seed_, kSaltCache, static_cast<std::uint64_t>(u),
                                                    static_cast<std::uint64_t>(n),
                                                    static_cast<std::uint64_t>(i)));
        if (draw < r) mask |= 1u << u;
      }
      cache_masks_[n][static_cast<std::size_t>(i)] = mask;
    }
  }
  cache_prob_ = alloc.r;
  copies_.clear();
  subfile_bits_.clear();
  placement_ = Placement::Decentralized;
}

std::int64_t SimulatedNetwork::cache_bits(int user) const {
  if (user < 0 || user >= users_) throw std::invalid_argument("simulator: user index out of range");
  if (placement_ == Placement::Centralized) {
    std::int64_t total = 0;
    for (int n = 0; n < n_files_; ++n)
      total += subfile_bits_[n] * static_cast<std::int64_t>(comb_u64(users_ - 1, copies_[n] - 1));
    return total;
  }
  if (placement_ == Placement::Decentralized) {
    std::int64_t total = 0;
    for (const auto& file_masks : cache_masks_)
      for (std::uint32_t mask : file_masks) total += (mask >> user) & 1u;
    return total;
  }
  throw std::logic_error("simulator: no placement installed");
}

void SimulatedNetwork::validate_request(const RequestVector& request) const {
  if (request.users() != users_)
    throw std::invalid_argument("simulator: request lists " + std::to_string(request.users()) +
                                " users, network has " + std::to_string(users_));
  for (int file : request.files)
    if (file < 0 || file >= n_files_)
      throw std::invalid_argument("simulator: request names file " + std::to_string(file + 1) + " of " +
                                  std::to_string(n_files_));
}

DeliveryTranscript SimulatedNetwork::deliver(const RequestVector& request) const {
  validate_request(request);
  DeliveryTranscript transcript;
  switch (placement_) {
    case Placement::Centralized:
      transcript = deliver_centralized(request);
      break;
    case Placement::Decentralized:
      transcript = deliver_decentralized(request);
      break;
    case Placement::None:
      throw std::logic_error("simulator: no placement installed");
  }
  if (!verify_decode(request, transcript))
    throw InvariantError("simulator: delivery transcript failed the bit-exact decode check");
  return transcript;
}

bool SimulatedNetwork::verify_decode(const RequestVector& request, const DeliveryTranscript& transcript) const {
  validate_request(request);
  switch (placement_) {
    case Placement::Centralized:
      return decode_centralized(request, transcript);
    case Placement::Decentralized:
      return decode_decentralized(request, transcript);
    case Placement::None:
      throw std::logic_error("simulator: no placement installed");
  }
  return false;
}

DeliveryTranscript SimulatedNetwork::deliver_centralized(const RequestVector& request) const {
  DeliveryTranscript transcript;
  const std::uint32_t all = (1u << users_) - 1;
  for (std::uint32_t subset = 1; subset <= all; ++subset) {
    const int size = std::popcount(subset);
    const int level = size - 1;
    DeliveryMessage message;
    message.subset_mask = subset;
    for (int u = 0; u < users_; ++u) {
      if (!(subset & (1u << u))) continue;
      if (copies_[request.files[u]] != level) continue;
      message.component_users.push_back(u);
    }
    if (message.component_users.empty()) continue;

    const std::int64_t length = file_bits_ / static_cast<std::int64_t>(comb_u64(users_, level));
    message.payload.assign(static_cast<std::size_t>(length), 0);
    for (int u : message.component_users) {
      const int file = request.files[u];
      const std::int64_t offset = rank_combination(subset & ~(1u << u), users_, level) * length;
      for (std::int64_t b = 0; b < length; ++b)
        message.payload[static_cast<std::size_t>(b)] ^= database_bit(file, offset + b);
      message.component_lengths.push_back(length);
    }
    transcript.total_bits += length;
    transcript.messages.push_back(std::move(message));
  }
  transcript.normalized_rate = static_cast<double>(transcript.total_bits) / static_cast<double>(file_bits_);
  return transcript;
}

bool SimulatedNetwork::decode_centralized(const RequestVector& request, const DeliveryTranscript& transcript) const {
  std::vector<std::int64_t> message_of_subset(1ull << users_, -1);
  for (std::size_t m = 0; m < transcript.messages.size(); ++m)
    message_of_subset[transcript.messages[m].subset_mask] = static_cast<std::int64_t>(m);

  // A cache read: user u holds the subfile of `file` labelled by `label`
  // exactly when u is a member of the label. Reads outside the cache are a
  // decoder bug, not bad data.
  const auto cached_bit = [&](int u, int file, std::uint32_t label, std::int64_t bit_in_subfile) {
    if (!(label & (1u << u))) throw std::logic_error("simulator: centralized decoder read an uncached subfile");
    const std::int64_t offset = rank_combination(label, users_, std::popcount(label)) * subfile_bits_[file];
    return database_bit(file, offset + bit_in_subfile);
  };

  for (int u = 0; u < users_; ++u) {
    const int file = request.files[u];
    const int level = copies_[file];
    const std::int64_t parts = static_cast<std::int64_t>(comb_u64(users_, level));
    for (std::int64_t part = 0; part < parts; ++part) {
      const std::uint32_t label = unrank_combination(part, users_, level);
      if (label & (1u << u)) continue;  // already cached
      const std::uint32_t subset = label | (1u << u);
      const std::int64_t m = message_of_subset[subset];
      if (m < 0) return false;
      const DeliveryMessage& message = transcript.messages[static_cast<std::size_t>(m)];
      const std::int64_t length = subfile_bits_[file];
      if (static_cast<std::int64_t>(message.payload.size()) != length) return false;
      for (std::int64_t b = 0; b < length; ++b) {
        std::uint8_t value = message.payload[static_cast<std::size_t>(b)];
        for (int other : message.component_users) {
          if (other == u) continue;
          value ^= cached_bit(u, request.files[other], subset & ~(1u << other), b);
        }
        if (value != database_bit(file, part * length + b)) return false;
      }
    }
  }
  return true;
}

namespace {

// Per-subset component bit lists for decentralized delivery: for message
// subset S and member u, the bits of u's file cached by exactly S \ {u}.
// Built in one pass over the placement masks; bit indices stay ascending.
struct ComponentTable {
  std::map<std::uint32_t, std::map<int, std::vector<std::int64_t>>> by_subset;
};

ComponentTable build_components(const RequestVector& request, const std::vector<std::vector<std::uint32_t>>& masks,
                                std::int64_t file_bits, int users) {
  ComponentTable table;
  for (int u = 0; u < users; ++u) {
    const auto& file_masks = masks[request.files[u]];
    for (std::int64_t i = 0; i < file_bits; ++i) {
      const std::uint32_t mask = file_masks[static_cast<std::size_t>(i)];
      if (mask & (1u << u)) continue;
      table.by_subset[mask | (1u << u)][u].push_back(i);
    }
  }
  return table;
}

}  // namespace

DeliveryTranscript SimulatedNetwork::deliver_decentralized(const RequestVector& request) const {
  DeliveryTranscript transcript;
  const ComponentTable table = build_components(request, cache_masks_, file_bits_, users_);
  for (const auto& [subset, components] : table.by_subset) {
    DeliveryMessage message;
    message.subset_mask = subset;
    std::int64_t length = 0;
    for (const auto& [u, bits] : components) length = std::max(length, static_cast<std::int64_t>(bits.size()));
    message.payload.assign(static_cast<std::size_t>(length), 0);
    for (const auto& [u, bits] : components) {
      message.component_users.push_back(u);
      message.component_lengths.push_back(static_cast<std::int64_t>(bits.size()));
      const int file = request.files[u];
      for (std::size_t k = 0; k < bits.size(); ++k) message.payload[k] ^= database_bit(file, bits[k]);
    }
    transcript.total_bits += length;
    transcript.messages.push_back(std::move(message));
  }
  transcript.normalized_rate = static_cast<double>(transcript.total_bits) / static_cast<double>(file_bits_);
  return transcript;
}

bool SimulatedNetwork::decode_decentralized(const RequestVector& request,
                                            const DeliveryTranscript& transcript) const {
  std::map<std::uint32_t, const DeliveryMessage*> message_of_subset;
  for (const auto& message : transcript.messages) message_of_subset[message.subset_mask] = &message;

  // The placement masks are shared randomness: every user can reconstruct
  // which bits of which file landed in which component, but may only read
  // bit values its own cache holds.
  const ComponentTable table = build_components(request, cache_masks_, file_bits_, users_);
  const auto cached_bit = [&](int u, int file, std::int64_t bit) {
    if (!((cache_masks_[file][static_cast<std::size_t>(bit)] >> u) & 1u))
      throw std::logic_error("simulator: decentralized decoder read an uncached bit");
    return database_bit(file, bit);
  };

  for (int u = 0; u < users_; ++u) {
    const int file = request.files[u];
    for (std::int64_t i = 0; i < file_bits_; ++i) {
      const std::uint32_t mask = cache_masks_[file][static_cast<std::size_t>(i)];
      if (mask & (1u << u)) continue;  // cached directly
      const std::uint32_t subset = mask | (1u << u);
      const auto message_it = message_of_subset.find(subset);
      if (message_it == message_of_subset.end()) return false;
      const DeliveryMessage& message = *message_it->second;

      const auto table_it = table.by_subset.find(subset);
      if (table_it == table.by_subset.end()) return false;
      const auto& components = table_it->second;
      const auto own = components.find(u);
      if (own == components.end()) return false;
      const auto& own_bits = own->second;
      const auto pos = std::lower_bound(own_bits.begin(), own_bits.end(), i);
      if (pos == own_bits.end() || *pos != i) return false;
      const std::int64_t k = pos - own_bits.begin();
      if (k >= static_cast<std::int64_t>(message.payload.size())) return false;

      std::uint8_t value = message.payload[static_cast<std::size_t>(k)];
      for (const auto& [other, other_bits] : components) {
        if (other == u || k >= static_cast<std::int64_t>(other_bits.size())) continue;
        value ^= cached_bit(u, request.files[other], other_bits[static_cast<std::size_t>(k)]);
      }
      if (value != database_bit(file, i)) return false;
    }
  }
  return true;
}

namespace {

// Expected-transcript oracles. For every subset S and member u the exact
// per-demand component size k_{S,u}(y) is accumulated over the demand
// distribution; the rate estimate is sum_S max_{u in S} E_y[k_{S,u}].

// Centralized: a component for (S, u) exists per subfile label T of u's
// file with T inside S, every member of S \ T requesting the file and
// nobody outside S requesting it; each label carries 1 / C(L, r) of the
// file. Enumerated literally over the labels.
double component_size_centralized(const IntegerAllocation& alloc, const RequestVector& y, std::uint32_t subset,
                                  int leader) {
  const int users = alloc.users;
  const int file = y.files[leader];
  const int copies = alloc.r[file];
  for (int j = 0; j < users; ++j)
    if (!(subset & (1u << j)) && y.files[j] == file) return 0.0;

  const std::uint32_t pool = subset & ~(1u << leader);
  if (copies > std::popcount(pool)) return 0.0;
  // Walk all size-`copies` subsets T of the pool.
  std::vector<int> members;
  for (int j = 0; j < users; ++j)
    if (pool & (1u << j)) members.push_back(j);
  std::int64_t active = 0;
  std::vector<int> pick(static_cast<std::size_t>(copies), 0);
  const std::function<void(int, std::uint32_t)> walk = [&](int depth, std::uint32_t label) {
    if (depth == copies) {
      for (int j = 0; j < users; ++j)
        if ((subset & (1u << j)) && !(label & (1u << j)) && y.files[j] != file) return;
      ++active;
      return;
    }
    const int start = depth == 0 ? 0 : pick[static_cast<std::size_t>(depth - 1)] + 1;
    for (int idx = start; idx < static_cast<int>(members.size()); ++idx) {
      pick[static_cast<std::size_t>(depth)] = idx;
      walk(depth + 1, label | (1u << members[idx]));
    }
  };
  walk(0, 0);
  return static_cast<double>(active) / binom(users, copies);
}

// Decentralized: the expected share of the leader's file cached by exactly
// the rest of S, with users requesting the same file always counting as
// holders and same-file users outside S suppressing the component.
double component_size_decentralized(const FractionalAllocation& alloc, const RequestVector& y, int users,
                                    std::uint32_t subset, int leader) {
  const int file = y.files[leader];
  const double r = alloc.r[file];
  double share = 1.0 - r;
  for (int j = 0; j < users; ++j) {
    if (j == leader) continue;
    if (subset & (1u << j)) {
      if (y.files[j] != file) share *= r;
    } else {
      if (y.files[j] == file) return 0.0;
      share *= 1.0 - r;
    }
  }
  return share;
}

struct OracleAccumulator {
  int users;
  std::vector<double> expectation;  // [subset * users + leader]

  explicit OracleAccumulator(int users_in)
      : users(users_in), expectation(static_cast<std::size_t>(1ull << users_in) * users_in, 0.0) {}

  template <typename Component>
  void add_demand(const RequestVector& y, double weight, const Component& component) {
    const std::uint32_t all = (1u << users) - 1;
    for (std::uint32_t subset = 1; subset <= all; ++subset)
      for (int u = 0; u < users; ++u)
        if (subset & (1u << u))
          expectation[static_cast<std::size_t>(subset) * users + u] += weight * component(y, subset, u);
  }

  double total(std::vector<int>* argmax = nullptr) const {
    const std::uint32_t all = (1u << users) - 1;
    if (argmax) argmax->assign(all + 1, -1);
    CompensatedSum acc;
    for (std::uint32_t subset = 1; subset <= all; ++subset) {
      double best = 0.0;
      int best_u = -1;
      for (int u = 0; u < users; ++u)
        if (subset & (1u << u)) {
          const double v = expectation[static_cast<std::size_t>(subset) * users + u];
          if (best_u < 0 || v > best) {
            best = v;
            best_u = u;
          }
        }
      acc.add(best);
      if (argmax) (*argmax)[subset] = best_u;
    }
    return acc.value();
  }
};

template <typename Component>
OracleResult run_oracle(const PopularityProfile& profile, int users, std::uint64_t enumeration_budget,
                        std::uint64_t mc_samples, std::uint64_t seed, const Component& component) {
  if (users > 16)
    throw std::invalid_argument("oracle: per-subset bookkeeping is capped at 16 users");
  const int n_files = profile.size();

  double combos = 1.0;
  for (int u = 0; u < users && combos <= 1e18; ++u) combos *= n_files;

  OracleResult result;
  OracleAccumulator acc(users);

  if (combos <= static_cast<double>(enumeration_budget)) {
    RequestVector y{std::vector<int>(users, 0)};
    while (true) {
      double weight = 1.0;
      for (int u = 0; u < users; ++u) weight *= profile.prob(y.files[u]);
      if (weight > 0.0) acc.add_demand(y, weight, component);
      int pos = users - 1;
      while (pos >= 0 && y.files[pos] == n_files - 1) y.files[pos--] = 0;
      if (pos < 0) break;
      y.files[pos] += 1;
    }
    result.value = acc.total();
    result.exact = true;
    result.samples = static_cast<std::uint64_t>(combos);
    return result;
  }

  // Monte Carlo over demand draws; the reported value fixes the argmax
  // leader of each subset and the standard error is the sample error of
  // the corresponding per-demand totals.
  if (mc_samples < 2) throw std::invalid_argument("oracle: need at least two samples");
  std::vector<double> cdf(n_files);
  double run = 0.0;
  for (int n = 0; n < n_files; ++n) {
    run += profile.prob(n);
    cdf[n] = run;
  }
  cdf[n_files - 1] = 1.0;

  std::vector<std::uint16_t> draws(static_cast<std::size_t>(mc_samples) * users);
  if (n_files > 65535) throw std::invalid_argument("oracle: Monte Carlo path supports at most 65535 files");
  for (std::uint64_t s = 0; s < mc_samples; ++s)
    for (int u = 0; u < users; ++u) {
      const double x = rng::to_unit(rng::keyed(seed, kSaltDemand, s, static_cast<std::uint64_t>(u)));
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), x);
      draws[static_cast<std::size_t>(s) * users + u] =
          static_cast<std::uint16_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), n_files - 1));
    }

  const double weight = 1.0 / static_cast<double>(mc_samples);
  RequestVector y{std::vector<int>(users, 0)};
  for (std::uint64_t s = 0; s < mc_samples; ++s) {
    for (int u = 0; u < users; ++u) y.files[u] = draws[static_cast<std::size_t>(s) * users + u];
    acc.add_demand(y, weight, component);
  }
  std::vector<int> leaders;
  result.value = acc.total(&leaders);

  // Second pass: per-demand totals at the chosen leaders.
  const std::uint32_t all = (1u << users) - 1;
  double sq_dev = 0.0;
  for (std::uint64_t s = 0; s < mc_samples; ++s) {
    for (int u = 0; u < users; ++u) y.files[u] = draws[static_cast<std::size_t>(s) * users + u];
    double total = 0.0;
    for (std::uint32_t subset = 1; subset <= all; ++subset) total += component(y, subset, leaders[subset]);
    const double dev = total - result.value;
    sq_dev += dev * dev;
  }
  result.exact = false;
  result.samples = mc_samples;
  result.std_error = std::sqrt(sq_dev / static_cast<double>(mc_samples - 1) / static_cast<double>(mc_samples));
  return result;
}

}  // namespace

OracleResult ergodic_rate_oracle(const PopularityProfile& profile, const IntegerAllocation& alloc,
                                 std::uint64_t enumeration_budget, std::uint64_t mc_samples, std::uint64_t seed) {
  alloc.validate();
  if (alloc.n_files() != profile.size())
    throw std::invalid_argument("allocation has " + std::to_string(alloc.n_files()) + " files, profile has " +
                                std::to_string(profile.size()));
  return run_oracle(profile, alloc.users, enumeration_budget, mc_samples, seed,
                    [&](const RequestVector& y, std::uint32_t subset, int leader) {
                      return component_size_centralized(alloc, y, subset, leader);
                    });
}

OracleResult ergodic_rate_oracle(const PopularityProfile& profile, const FractionalAllocation& alloc, int users,
                                 std::uint64_t enumeration_budget, std::uint64_t mc_samples, std::uint64_t seed) {
  alloc.validate();
  if (users < 1) throw std::invalid_argument("need at least one user");
  if (alloc.n_files() != profile.size())
    throw std::invalid_argument("allocation has " + std::to_string(alloc.n_files()) + " files, profile has " +
                                std::to_string(profile.size()));
  return run_oracle(profile, users, enumeration_budget, mc_samples, seed,
                    [&](const RequestVector& y, std::uint32_t subset, int leader) {
                      return component_size_decentralized(alloc, y, users, subset, leader);
                    });
}

}  // namespace codedcache
