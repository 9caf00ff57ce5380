#pragma once

#include <map>
#include <string>
#include <vector>

namespace faqnet {

struct Topology {
  std::vector<std::string> names;           // player index -> name
  std::vector<std::pair<int, int>> edges;   // undirected, a < b
  std::vector<int> terminals;               // K, sorted player indices
  int capacity_bits = 1;                    // B, per edge per direction per round
  bool half_duplex = false;

  int n() const { return static_cast<int>(names.size()); }
  int edge_index(int a, int b) const;       // -1 if absent
  std::vector<std::vector<int>> adjacency() const;
  bool connected() const;
  void validate() const;
  int player(const std::string& name) const;
};

struct Assignment {
  std::map<int, int> owner;  // hyperedge id -> player
  int answer_player = 0;
};

struct MinCutResult {
  int value = 0;
  std::vector<int> side_a;  // witness partition containing the reference terminal
  std::vector<int> side_b;
};

MinCutResult min_cut(const Topology& t);

struct SteinerPacking {
  std::vector<std::vector<int>> trees;  // edge indices per tree
  int delta = 0;
  bool exact = false;
};

// Edge-disjoint Steiner trees spanning K with terminal-to-terminal distance
// (inside the tree) at most delta. Exact for |E| <= 16, greedy otherwise.
SteinerPacking steiner_packing(const Topology& t, int delta);

struct DeltaChoice {
  int delta = 0;
  long rounds_estimate = 0;
  int st = 0;  // packing size at the chosen delta
};

// Minimizes ceil(n_items / ST(delta)) + delta over delta in [1, |V|].
DeltaChoice best_delta(const Topology& t, long n_items);

std::map<int, int> st_table(const Topology& t);  // delta -> packing size

struct McfResult {
  long rounds = 0;         // greedy store-and-forward schedule
  long formula_floor = 0;  // max(ceil(total/(B*mincut)), max distance)
};

McfResult mcf_schedule(const Topology& t, const std::vector<std::pair<int, long>>& demands,
                       int sink);

std::vector<int> bfs_dist(const Topology& t, int source);
std::vector<int> shortest_path(const Topology& t, int from, int to);

// Tree utilities over edge-index sets.
bool tree_spans(const Topology& t, const std::vector<int>& tree_edges,
                const std::vector<int>& required);
int tree_terminal_diameter(const Topology& t, const std::vector<int>& tree_edges,
                           const std::vector<int>& terminals);

}  // namespace faqnet
