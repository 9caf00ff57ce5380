#pragma once

#include "faq.hpp"
#include "topology.hpp"

namespace faqnet {

struct BoundsInput {
  long y = 0;
  long n2 = 0;
  long d = 1;
  long r = 2;
  long N = 0;
  long B = 1;
  long mincut = 1;
  std::map<int, int> st;  // delta -> packing size
  long mcf_rounds = 0;
};

BoundsInput bounds_input(const FaqQuery& q, const Topology& t, const Assignment& a);

// y * min over delta (ceil(N / (B * ST(delta))) + delta) + mcf_rounds
long upper_bound_bcq(const BoundsInput& b);

// ceil((y/r + n2/(d*r)) * N / mincut), evaluated as one exact integer ceiling
long lower_bound_bcq(const BoundsInput& b);

struct TribesInstance {
  int m = 0;
  long n = 0;                                          // sets live in [0, n)
  std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
  bool value = false;  // AND over pairs of "the two sets intersect"
};

// Random instance; hard mode caps every pairwise intersection at one element.
TribesInstance gen_tribes(int m, long n, std::uint64_t seed, bool hard = false);

enum class EmbeddingKind { Forest, Cycle, IndependentSet, Hypergraph };

struct HardInstance {
  FaqQuery query;
  TribesInstance tribes;
  EmbeddingKind kind = EmbeddingKind::Forest;
  std::vector<int> s_edges;    // hyperedge ids carrying the S sets
  std::vector<int> t_edges;    // hyperedge ids carrying the T sets
  std::vector<int> pad_edges;  // everything else
  long effective_n = 0;        // set universe after any square shrink
};

// Per-vertex embedding on a binary forest: each pair rides two edges of one
// degree->=2 vertex from a single bipartition class.
HardInstance embed_forest(const Hypergraph& h, const TribesInstance& tr);

// Core embedding: vertex-disjoint short cycles when the core is dense (average
// degree > 10, sets re-encoded over [sqrt(N)]^2), otherwise per-vertex
// embedding on a greedy independent set.
HardInstance embed_core(const Hypergraph& h, const TribesInstance& tr);

// Embedding over the private attributes of an MD decomposition's internal
// nodes; arities above two are padded with pinned coordinates.
HardInstance embed_hypergraph(const Hypergraph& h, const Ghd& ghd,
                              const TribesInstance& tr);

// Min-cut witness split: S relations on one side's terminals, T relations on
// the other, padding round-robin.
Assignment cut_assignment(const Topology& t, const HardInstance& inst);

struct GapReport {
  std::string query_label;
  std::string topology_label;
  std::string protocol_label;
  BoundsInput input;
  long upper = 0;
  long lower = 0;
  long measured = 0;
  double ratio_up = 0;
  double ratio_low = 0;
};

GapReport gap_report(const FaqQuery& q, const Topology& t, const Assignment& a,
                     long measured_rounds);

std::string gap_csv_header();
std::string gap_csv_row(const GapReport& g);

}  // namespace faqnet
