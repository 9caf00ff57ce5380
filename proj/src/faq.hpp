#pragma once

#include <map>

#include "hypergraph.hpp"
#include "relation.hpp"

namespace faqnet {

struct FaqQuery {
  Hypergraph h;
  std::map<int, Relation> relations;  // hyperedge id -> relation
  std::vector<int> free_vars;         // sorted; empty means scalar (BCQ-style)
  Semiring semiring;

  void validate() const;  // one relation per edge, attrs match edge vars
  std::size_t max_relation_size() const;
  int max_domain() const;
};

// Literal sum-of-products over the full variable product space. Throws if the
// product of domain sizes exceeds `cap`.
Relation eval_faq_bruteforce(const FaqQuery& q, std::uint64_t cap = 1u << 20);

// Bottom-up message passing over a valid GHD with aggregate push-down.
Relation eval_faq_centralized(const FaqQuery& q, const Ghd& ghd);

// Convenience: build a canonical GYO-GHD and evaluate.
Relation eval_faq(const FaqQuery& q);

// Scalar result of a free-variable-free query (a zero-or-one-entry relation
// over no attributes).
Value scalar_answer(const Relation& r, const Semiring& s);

bool relations_equal(const Relation& a, const Relation& b);

}  // namespace faqnet
