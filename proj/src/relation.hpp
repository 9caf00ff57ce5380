#pragma once

#include <map>
#include <utility>
#include <vector>

#include "semiring.hpp"

namespace faqnet {

using Tuple = std::vector<int>;

// Listing representation of a semiring-annotated function: only tuples with
// nonzero values are stored. Entries are kept sorted lexicographically so
// serialization and simulation traces are reproducible.
struct Relation {
  std::vector<int> attrs;         // variable ids, ordered
  std::vector<int> domain_sizes;  // aligned with attrs; values lie in [0, D)
  std::vector<std::pair<Tuple, Value>> entries;

  int arity() const { return static_cast<int>(attrs.size()); }
  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  int attr_pos(int var) const;  // -1 if absent
  int domain_of(int var) const;

  // Sorts entries, merges duplicate tuples with s.add, drops zeros, and
  // validates domain ranges.
  void normalize(const Semiring& s);

  bool operator==(const Relation& o) const = default;
};

Relation join(const Relation& a, const Relation& b, const Semiring& s);
Relation semijoin(const Relation& a, const Relation& b);
Relation project_aggregate(const Relation& r, const std::vector<int>& keep,
                           const Semiring& s);

// Projection of the tuple onto the given attribute subset (in `onto` order).
Tuple project_tuple(const Relation& r, const Tuple& t, const std::vector<int>& onto);

// Lookup table keyed by projected tuples; missing keys mean semiring zero.
std::map<Tuple, Value> aggregate_index(const Relation& r, const std::vector<int>& onto,
                                       const Semiring& s);

}  // namespace faqnet
