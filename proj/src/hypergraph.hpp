#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace faqnet {

struct Hyperedge {
  int id = 0;
  std::vector<int> vars;  // sorted, distinct
};

struct Hypergraph {
  std::map<int, int> domain;        // variable id -> domain size
  std::vector<Hyperedge> edges;     // multiset; distinct ids

  int k() const { return static_cast<int>(edges.size()); }
  int r() const;                    // max arity
  std::vector<int> vertices() const;
  const Hyperedge* edge_by_id(int id) const;
  void validate() const;            // nonempty edges, every vertex covered
};

struct GyoStep {
  enum Kind { EliminateVertex, DeleteEdge } kind;
  int vertex = -1;   // EliminateVertex
  int edge = -1;     // both: the edge acted on
  int subsumer = -1; // DeleteEdge: current edge containing the remnant
};

std::string format_gyo_log(const std::vector<GyoStep>& log, const Hypergraph& h);

// Unique GYO-reduction with a canonical removal log (lowest vertex id first,
// then lowest edge id). `reduced` is empty iff h is acyclic.
std::pair<Hypergraph, std::vector<GyoStep>> gyo_reduce(const Hypergraph& h);
bool is_acyclic(const Hypergraph& h);

// Rooted decomposition tree. Node 0 need not be the root.
struct Ghd {
  std::vector<int> parent;                // -1 for the root
  std::vector<std::vector<int>> chi;      // sorted variable ids per node
  std::vector<std::vector<int>> lambda;   // hyperedge ids per node
  std::map<int, int> cover;               // hyperedge id -> covering node

  int node_count() const { return static_cast<int>(parent.size()); }
  int root() const;
  std::vector<std::vector<int>> children() const;
  int internal_nodes() const;             // nodes with >=1 child; lone root counts 0
  std::vector<int> depths() const;
  std::string serialize() const;          // canonical text form (tie-break key)
};

// Coverage (every hyperedge inside some bag, with cover bookkeeping) plus the
// running-intersection property.
bool ghd_valid(const Hypergraph& h, const Ghd& t, std::string* why = nullptr);

struct CoreForest {
  std::vector<int> core_vertices;               // sorted
  std::vector<int> core_edges;                  // surviving + forest-root edge ids
  std::vector<int> survivor_edges;              // GYO survivors only
  std::vector<std::vector<int>> forest_trees;   // edge ids per removed tree, root first
  std::vector<std::map<int, int>> forest_parent;// per tree: edge id -> parent edge id (root -> -1)
  int n2 = 0;                                   // |core_vertices|
};

CoreForest core_forest(const Hypergraph& h);

// GYO-GHD: root bag = core vertex set, one leaf per core edge, removed-forest
// edges hung below. The seed permutes root/attachment choices among valid
// alternatives; seed 0 is canonical.
Ghd build_gyo_ghd(const Hypergraph& h, std::uint64_t forest_shape_seed = 0);

struct WidthResult {
  int y = 0;
  Ghd witness;
  bool exact = false;
};

// Minimum internal-node count over explored GYO-GHDs: exhaustive root
// enumeration for k <= 8, otherwise `budget` seeded restarts (default 64).
WidthResult internal_node_width(const Hypergraph& h, int budget = 64);

int degeneracy(const Hypergraph& h);

// Re-hangs children to the topmost predecessor containing the parent-child
// interface until a fixed point; never increases the internal-node count.
Ghd md_ghd(const Hypergraph& h, const Ghd& t);

struct IndependentSetResult {
  std::vector<int> vertices;  // pairwise non-co-occurring
  bool meets_bound = false;   // >= |V| / (d * (r - 1)); logged, not asserted
};

IndependentSetResult strong_independent_set(const Hypergraph& h);

}  // namespace faqnet
