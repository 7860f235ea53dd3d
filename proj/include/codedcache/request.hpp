#pragma once

#include <vector>

namespace codedcache {

// A demand vector: files[u] is the 0-based sorted-domain index of the file
// requested by user u. Produced internally; CLI-facing request lists are
// 1-based in the original (pre-sort) file numbering and are translated via
// the profile permutation.
struct RequestVector {
  std::vector<int> files;

  int users() const { return static_cast<int>(files.size()); }
};

}  // namespace codedcache
