#include "topology.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <stdexcept>

namespace faqnet {

int Topology::edge_index(int a, int b) const {
  if (a > b) std::swap(a, b);
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i] == std::make_pair(a, b)) return static_cast<int>(i);
  return -1;
}

std::vector<std::vector<int>> Topology::adjacency() const {
  std::vector<std::vector<int>> adj(n());
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& v : adj) std::sort(v.begin(), v.end());
  return adj;
}

bool Topology::connected() const {
  if (n() == 0) return false;
  auto d = bfs_dist(*this, 0);
  return std::none_of(d.begin(), d.end(), [](int x) { return x < 0; });
}

void Topology::validate() const {
  if (!connected()) throw std::invalid_argument("topology must be connected");
  if (terminals.empty()) throw std::invalid_argument("terminal set K is empty");
  for (int k : terminals)
    if (k < 0 || k >= n()) throw std::invalid_argument("terminal out of range");
  for (auto [a, b] : edges)
    if (a >= b || a < 0 || b >= n()) throw std::invalid_argument("bad edge");
  if (capacity_bits < 1) throw std::invalid_argument("capacity must be positive");
}

int Topology::player(const std::string& name) const {
  for (int i = 0; i < n(); ++i)
    if (names[i] == name) return i;
  throw std::invalid_argument("unknown player: " + name);
}

std::vector<int> bfs_dist(const Topology& t, int source) {
  std::vector<int> d(t.n(), -1);
  std::queue<int> q;
  d[source] = 0;
  q.push(source);
  auto adj = t.adjacency();
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u])
      if (d[v] < 0) {
        d[v] = d[u] + 1;
        q.push(v);
      }
  }
  return d;
}

std::vector<int> shortest_path(const Topology& t, int from, int to) {
  auto d = bfs_dist(t, to);
  std::vector<int> path{from};
  auto adj = t.adjacency();
  int cur = from;
  while (cur != to) {
    int next = -1;
    for (int v : adj[cur])
      if (d[v] == d[cur] - 1 && (next < 0 || v < next)) next = v;
    if (next < 0) throw std::logic_error("no path");
    path.push_back(next);
    cur = next;
  }
  return path;
}

// ---------------------------------------------------------------------------
// Min cut (unit capacities, Edmonds-Karp per terminal pair)

namespace {
struct FlowNet {
  int n;
  std::vector<std::vector<int>> cap;  // dense; small graphs only
  explicit FlowNet(const Topology& t) : n(t.n()), cap(n, std::vector<int>(n, 0)) {
    for (auto [a, b] : t.edges) {
      cap[a][b] += 1;
      cap[b][a] += 1;
    }
  }
  int max_flow(int s, int t, std::vector<int>* cut_side = nullptr) {
    auto res = cap;
    int flow = 0;
    for (;;) {
      std::vector<int> prev(n, -1);
      std::queue<int> q;
      q.push(s);
      prev[s] = s;
      while (!q.empty() && prev[t] < 0) {
        int u = q.front();
        q.pop();
        for (int v = 0; v < n; ++v)
          if (prev[v] < 0 && res[u][v] > 0) {
            prev[v] = u;
            q.push(v);
          }
      }
      if (prev[t] < 0) {
        if (cut_side) {
          cut_side->clear();
          for (int v = 0; v < n; ++v)
            if (prev[v] >= 0) cut_side->push_back(v);
        }
        return flow;
      }
      for (int v = t; v != s; v = prev[v]) {
        res[prev[v]][v] -= 1;
        res[v][prev[v]] += 1;
      }
      ++flow;
    }
  }
};
}  // namespace

MinCutResult min_cut(const Topology& t) {
  t.validate();
  if (t.terminals.size() < 2)
    throw std::invalid_argument("min_cut needs at least two terminals");
  FlowNet net(t);
  int k0 = t.terminals[0];
  MinCutResult best;
  best.value = -1;
  for (std::size_t i = 1; i < t.terminals.size(); ++i) {
    std::vector<int> side;
    int f = net.max_flow(k0, t.terminals[i], &side);
    if (best.value < 0 || f < best.value) {
      best.value = f;
      best.side_a = side;
      best.side_b.clear();
      std::set<int> sa(side.begin(), side.end());
      for (int v = 0; v < t.n(); ++v)
        if (!sa.count(v)) best.side_b.push_back(v);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Steiner tree packing

bool tree_spans(const Topology& t, const std::vector<int>& tree_edges,
                const std::vector<int>& required) {
  if (required.empty()) return true;
  std::vector<std::vector<int>> adj(t.n());
  for (int ei : tree_edges) {
    auto [a, b] = t.edges[ei];
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(t.n(), false);
  std::vector<int> stack{required[0]};
  seen[required[0]] = true;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
  }
  return std::all_of(required.begin(), required.end(), [&](int k) { return seen[k]; });
}

int tree_terminal_diameter(const Topology& t, const std::vector<int>& tree_edges,
                           const std::vector<int>& terminals) {
  std::vector<std::vector<int>> adj(t.n());
  for (int ei : tree_edges) {
    auto [a, b] = t.edges[ei];
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  int diam = 0;
  for (int s : terminals) {
    std::vector<int> d(t.n(), -1);
    std::queue<int> q;
    d[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (d[v] < 0) {
          d[v] = d[u] + 1;
          q.push(v);
        }
    }
    for (int k : terminals) {
      if (d[k] < 0) return -1;  // does not span
      diam = std::max(diam, d[k]);
    }
  }
  return diam;
}

namespace {

// Prunes non-terminal leaves until fixpoint.
std::vector<int> prune_tree(const Topology& t, std::vector<int> tree,
                            const std::vector<int>& terminals) {
  std::set<int> term(terminals.begin(), terminals.end());
  for (;;) {
    std::vector<int> deg(t.n(), 0);
    for (int ei : tree) {
      deg[t.edges[ei].first]++;
      deg[t.edges[ei].second]++;
    }
    bool changed = false;
    for (std::size_t i = 0; i < tree.size(); ++i) {
      auto [a, b] = t.edges[tree[i]];
      if ((deg[a] == 1 && !term.count(a)) || (deg[b] == 1 && !term.count(b))) {
        tree.erase(tree.begin() + i);
        changed = true;
        break;
      }
    }
    if (!changed) return tree;
  }
}

// One greedy tree in the残 subgraph: BFS tree from each terminal, pruned,
// best terminal diameter wins.
std::vector<int> greedy_tree(const Topology& t, const std::set<int>& used, int delta) {
  std::vector<int> best;
  int best_diam = -1;
  auto adj = t.adjacency();
  for (int root : t.terminals) {
    std::vector<int> par(t.n(), -1);
    std::vector<int> dist(t.n(), -1);
    std::queue<int> q;
    dist[root] = 0;
    q.push(root);
    std::vector<int> tree;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        int ei = t.edge_index(u, v);
        if (used.count(ei) || dist[v] >= 0) continue;
        dist[v] = dist[u] + 1;
        par[v] = ei;
        tree.push_back(ei);
        q.push(v);
      }
    }
    bool ok = std::all_of(t.terminals.begin(), t.terminals.end(),
                          [&](int k) { return dist[k] >= 0; });
    if (!ok) continue;
    tree = prune_tree(t, tree, t.terminals);
    int diam = tree_terminal_diameter(t, tree, t.terminals);
    if (diam < 0 || diam > delta) continue;
    if (best_diam < 0 || diam < best_diam ||
        (diam == best_diam && tree.size() < best.size())) {
      best = tree;
      best_diam = diam;
    }
  }
  return best;
}

// Exact max packing by enumeration of valid trees + branch and bound.
std::vector<std::vector<int>> exact_packing(const Topology& t, int delta) {
  int m = static_cast<int>(t.edges.size());
  std::vector<std::uint32_t> trees;  // edge masks of valid Steiner trees
  std::vector<std::vector<int>> tree_edges;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> es;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) es.push_back(i);
    // Must be a tree: |E| = |V(E)| - 1 and connected; must span K with the
    // diameter bound.
    std::set<int> verts;
    for (int ei : es) {
      verts.insert(t.edges[ei].first);
      verts.insert(t.edges[ei].second);
    }
    if (es.size() != verts.size() - 1) continue;
    int diam = tree_terminal_diameter(t, es, t.terminals);
    if (diam < 0 || diam > delta) continue;
    if (!tree_spans(t, es, t.terminals)) continue;
    // Connectivity of the tree itself.
    std::vector<int> first{t.edges[es[0]].first};
    if (!tree_spans(t, es, std::vector<int>(verts.begin(), verts.end()))) continue;
    trees.push_back(mask);
    tree_edges.push_back(es);
  }
  std::vector<int> order(trees.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return __builtin_popcount(trees[a]) < __builtin_popcount(trees[b]);
  });

  std::vector<int> best_pick;
  std::vector<int> pick;
  std::size_t min_size = trees.empty() ? 1 : __builtin_popcount(trees[order[0]]);
  std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t idx,
                                                            std::uint32_t used) {
    std::size_t free_edges = m - __builtin_popcount(used);
    if (pick.size() + free_edges / min_size <= best_pick.size()) return;
    if (pick.size() > best_pick.size()) best_pick = pick;
    for (std::size_t i = idx; i < order.size(); ++i) {
      if (trees[order[i]] & used) continue;
      pick.push_back(order[i]);
      rec(i + 1, used | trees[order[i]]);
      pick.pop_back();
    }
    if (pick.size() > best_pick.size()) best_pick = pick;
  };
  rec(0, 0);
  std::vector<std::vector<int>> out;
  for (int i : best_pick) out.push_back(tree_edges[i]);
  return out;
}

}  // namespace

SteinerPacking steiner_packing(const Topology& t, int delta) {
  t.validate();
  if (delta < 1) throw std::invalid_argument("delta must be >= 1");
  SteinerPacking p;
  p.delta = delta;
  if (t.edges.size() <= 16) {
    p.trees = exact_packing(t, delta);
    p.exact = true;
    return p;
  }
  std::set<int> used;
  for (;;) {
    std::vector<int> tree = greedy_tree(t, used, delta);
    if (tree.empty()) break;
    p.trees.push_back(tree);
    used.insert(tree.begin(), tree.end());
  }
  return p;
}

std::map<int, int> st_table(const Topology& t) {
  std::map<int, int> table;
  for (int delta = 1; delta <= t.n(); ++delta)
    table[delta] = static_cast<int>(steiner_packing(t, delta).trees.size());
  return table;
}

DeltaChoice best_delta(const Topology& t, long n_items) {
  DeltaChoice best;
  best.delta = -1;
  for (int delta = 1; delta <= t.n(); ++delta) {
    int st = static_cast<int>(steiner_packing(t, delta).trees.size());
    if (st == 0) continue;
    long est = (n_items + st - 1) / st + delta;
    if (best.delta < 0 || est < best.rounds_estimate) {
      best.delta = delta;
      best.rounds_estimate = est;
      best.st = st;
    }
  }
  if (best.delta < 0) throw std::runtime_error("no delta admits a Steiner packing");
  return best;
}

McfResult mcf_schedule(const Topology& t,
                       const std::vector<std::pair<int, long>>& demands, int sink) {
  t.validate();
  auto dist = bfs_dist(t, sink);
  std::vector<long> queue_bits(t.n(), 0);
  long total = 0;
  long max_dist = 0;
  for (auto [src, bits] : demands) {
    if (src == sink) continue;
    queue_bits[src] += bits;
    total += bits;
    max_dist = std::max<long>(max_dist, dist[src]);
  }
  McfResult res;
  if (total == 0) return res;

  // Fluid store-and-forward: nodes are processed farthest-first, so bits can
  // be relayed downhill within the round they arrive (this is what makes a
  // single path achieve the ceil(total/B) + latency floor).
  std::vector<int> order(t.n());
  for (int i = 0; i < t.n(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::tie(dist[b], a) < std::tie(dist[a], b);
  });
  auto adj = t.adjacency();
  long rounds = 0;
  long at_sink = 0;
  long cap = 4L * total + 4L * t.n() + 16;
  while (at_sink < total) {
    ++rounds;
    if (rounds > cap) throw std::logic_error("mcf schedule failed to drain");
    for (int u : order) {
      if (u == sink || queue_bits[u] == 0) continue;
      for (int v : adj[u]) {
        if (dist[v] != dist[u] - 1) continue;
        long send = std::min<long>(t.capacity_bits, queue_bits[u]);
        if (send == 0) break;
        queue_bits[u] -= send;
        if (v == sink)
          at_sink += send;
        else
          queue_bits[v] += send;
      }
    }
  }
  // The fluid relay can outrun hop latency when the bottleneck is bandwidth
  // elsewhere; no bit from the farthest loaded source arrives earlier than its
  // distance, so clamp to that.
  res.rounds = std::max(rounds, max_dist);
  long mc = min_cut(t).value;
  long bw = static_cast<long>(t.capacity_bits) * std::max<long>(1, mc);
  res.formula_floor = std::max((total + bw - 1) / bw, max_dist);
  return res;
}

}  // namespace faqnet
