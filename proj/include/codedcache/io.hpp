#pragma once

#include <string>

#include "codedcache/centralized.hpp"
#include "codedcache/decentralized.hpp"
#include "codedcache/popularity.hpp"
#include "codedcache/tradeoff.hpp"

namespace codedcache {

// Serialization helpers shared by the CLI and tests. All numeric text uses
// 12 significant digits; file writes go through a temp file + rename so a
// failed run never leaves a partial output.

std::string format_double(double v);

// "r_c,r_u" header plus one point per line.
std::string curve_to_csv(const TradeoffCurve& curve);

// JSON object {"schema":1, "users":L, "r":[...]} with the allocation given
// in the original (pre-sort) file order, translated via the profile
// permutation. Fractional overload emits reals.
std::string allocation_to_json(const PopularityProfile& profile, const IntegerAllocation& alloc);
std::string allocation_to_json(const PopularityProfile& profile, const FractionalAllocation& alloc, int users);

// Parses either allocation form back into the sorted domain. Throws
// std::invalid_argument on malformed JSON, a missing field, a length
// mismatch with the profile, or (integer form) non-integral entries.
IntegerAllocation integer_allocation_from_json(const std::string& text, const PopularityProfile& profile);
FractionalAllocation fractional_allocation_from_json(const std::string& text, const PopularityProfile& profile);

// Atomically replaces `path` with `content`. Throws IoError with an
// actionable message when the destination is not writable.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace codedcache
