#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "codedcache/centralized.hpp"
#include "codedcache/decentralized.hpp"
#include "codedcache/popularity.hpp"
#include "codedcache/request.hpp"

namespace codedcache {

// Bit-exact placement/delivery simulator. Files are random bit strings; the
// placement fills every cache, the delivery emits XOR multicast messages,
// and decoding is verified bit-for-bit against the source database.

struct DeliveryMessage {
  // Target user subset as an L-bit mask (bit u set <=> user u in S).
  std::uint32_t subset_mask = 0;
  // XOR of the per-user components, zero-padded at the tail to the longest
  // component. Stored one bit per byte.
  std::vector<std::uint8_t> payload;
  // Users contributing a component, with the component bit-lengths
  // (header-style metadata; lengths differ only for decentralized
  // placement).
  std::vector<int> component_users;
  std::vector<std::int64_t> component_lengths;
};

struct DeliveryTranscript {
  std::vector<DeliveryMessage> messages;
  std::int64_t total_bits = 0;
  // total_bits / file_bits, where file_bits includes any padding applied at
  // placement time.
  double normalized_rate = 0.0;
};

class SimulatedNetwork {
 public:
  // Throws std::invalid_argument for non-positive sizes or users > 20 (the
  // delivery walks all 2^L user subsets).
  SimulatedNetwork(int n_files, int users, std::int64_t file_bits, std::uint64_t seed);

  int n_files() const { return n_files_; }
  int users() const { return users_; }
  // File size after placement padding (centralized placement rounds the
  // file up to a common multiple of the subfile counts C(L, r_n)).
  std::int64_t file_bits() const { return file_bits_; }
  std::int64_t requested_file_bits() const { return requested_bits_; }

  // Splits each file n into C(L, r_n) equal subfiles, one per size-r_n user
  // subset, cached by exactly that subset. Pads the file size to make the
  // splits exact; throws std::invalid_argument if some C(L, r_n) exceeds
  // the file size or the required padding is unreasonable (> 2^30 bits).
  void place_centralized(const IntegerAllocation& alloc);

  // Independently caches each bit of file n at each user with probability
  // r_n, using per-(user, file, bit) keyed randomness: a user's cache map
  // depends only on the seed and its own index.
  void place_decentralized(const FractionalAllocation& alloc);

  // Bits cached at `user` under the current placement.
  std::int64_t cache_bits(int user) const;

  // Runs the delivery for one request vector and verifies internally that
  // every user can reconstruct its file bit-for-bit; an undecodable
  // transcript raises InvariantError. Requires a placement.
  DeliveryTranscript deliver(const RequestVector& request) const;

  // Re-runs the per-user decoders against a transcript. Exposed so tests
  // can exercise decoding separately from delivery.
  bool verify_decode(const RequestVector& request, const DeliveryTranscript& transcript) const;

 private:
  enum class Placement { None, Centralized, Decentralized };

  DeliveryTranscript deliver_centralized(const RequestVector& request) const;
  DeliveryTranscript deliver_decentralized(const RequestVector& request) const;
  bool decode_centralized(const RequestVector& request, const DeliveryTranscript& transcript) const;
  bool decode_decentralized(const RequestVector& request, const DeliveryTranscript& transcript) const;
  void validate_request(const RequestVector& request) const;
  std::uint8_t database_bit(int file, std::int64_t bit) const;

  int n_files_ = 0;
  int users_ = 0;
  std::int64_t requested_bits_ = 0;
  std::int64_t file_bits_ = 0;
  std::uint64_t seed_ = 0;
  Placement placement_ = Placement::None;

  // Centralized placement state: per-file copy count and subfile size.
  std::vector<int> copies_;
  std::vector<std::int64_t> subfile_bits_;

  // Decentralized placement state: per-file, per-bit cache membership mask.
  std::vector<std::vector<std::uint32_t>> cache_masks_;
  std::vector<double> cache_prob_;
};

struct OracleResult {
  double value = 0.0;
  // True when the request space was enumerated exactly; false for the
  // Monte Carlo estimate.
  bool exact = false;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

// Independent estimate of the ergodic rate, built from per-subset expected
// transcript contributions: for every user subset S the multicast cost is
// max over u in S of the expected length of the component addressed to u,
// and the rate is the sum over subsets. The expectation over demands is an
// exact N^L enumeration while N^L <= enumeration_budget, otherwise a Monte
// Carlo average over mc_samples demand draws (std_error reported).
OracleResult ergodic_rate_oracle(const PopularityProfile& profile, const IntegerAllocation& alloc,
                                 std::uint64_t enumeration_budget = 1'000'000,
                                 std::uint64_t mc_samples = 200'000, std::uint64_t seed = 20260817);

OracleResult ergodic_rate_oracle(const PopularityProfile& profile, const FractionalAllocation& alloc, int users,
                                 std::uint64_t enumeration_budget = 1'000'000,
                                 std::uint64_t mc_samples = 200'000, std::uint64_t seed = 20260817);

}  // namespace codedcache
