#include "hypergraph.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace faqnet {

int Hypergraph::r() const {
  std::size_t m = 0;
  for (const auto& e : edges) m = std::max(m, e.vars.size());
  return static_cast<int>(m);
}

std::vector<int> Hypergraph::vertices() const {
  std::vector<int> out;
  for (const auto& [v, d] : domain) out.push_back(v);
  return out;
}

const Hyperedge* Hypergraph::edge_by_id(int id) const {
  for (const auto& e : edges)
    if (e.id == id) return &e;
  return nullptr;
}

void Hypergraph::validate() const {
  std::set<int> ids, covered;
  for (const auto& e : edges) {
    if (e.vars.empty()) throw std::invalid_argument("empty hyperedge");
    if (!ids.insert(e.id).second) throw std::invalid_argument("duplicate edge id");
    if (!std::is_sorted(e.vars.begin(), e.vars.end()))
      throw std::invalid_argument("hyperedge vars not sorted");
    for (int v : e.vars) {
      if (!domain.count(v)) throw std::invalid_argument("edge var without domain");
      covered.insert(v);
    }
  }
  for (const auto& [v, d] : domain)
    if (!covered.count(v)) throw std::invalid_argument("vertex in no hyperedge");
}

// ---------------------------------------------------------------------------
// GYO reduction

std::pair<Hypergraph, std::vector<GyoStep>> gyo_reduce(const Hypergraph& h) {
  h.validate();
  struct Live {
    int id;
    std::set<int> vars;
  };
  std::vector<Live> live;
  for (const auto& e : h.edges)
    live.push_back({e.id, {e.vars.begin(), e.vars.end()}});
  std::vector<GyoStep> log;

  auto degree = [&](int v) {
    int d = 0;
    for (const auto& e : live) d += e.vars.count(v) ? 1 : 0;
    return d;
  };

  for (;;) {
    // Preferred step: eliminate the lowest-id vertex present in one hyperedge.
    int best_v = -1, host = -1;
    std::set<int> seen;
    for (const auto& e : live)
      for (int v : e.vars) seen.insert(v);
    for (int v : seen)
      if (degree(v) == 1 && (best_v < 0 || v < best_v)) {
        best_v = v;
        for (std::size_t i = 0; i < live.size(); ++i)
          if (live[i].vars.count(v)) host = static_cast<int>(i);
      }
    if (best_v >= 0) {
      live[host].vars.erase(best_v);
      log.push_back({GyoStep::EliminateVertex, best_v, live[host].id, -1});
      if (live[host].vars.empty()) {
        log.push_back({GyoStep::DeleteEdge, -1, live[host].id, -1});
        live.erase(live.begin() + host);
      }
      continue;
    }
    // Otherwise delete the lowest-id subsumed edge. An edge equal to another
    // is subsumed by the lower-id copy.
    int victim = -1, subsumer = -1;
    for (std::size_t i = 0; i < live.size() && victim < 0; ++i) {
      for (std::size_t j = 0; j < live.size(); ++j) {
        if (i == j) continue;
        const auto& a = live[i].vars;
        const auto& b = live[j].vars;
        bool subset = std::includes(b.begin(), b.end(), a.begin(), a.end());
        if (!subset) continue;
        if (a.size() == b.size() && live[j].id > live[i].id) continue;
        if (victim < 0 || live[j].id < subsumer) {
          victim = static_cast<int>(i);
          subsumer = live[j].id;
        }
      }
    }
    if (victim < 0) break;
    log.push_back({GyoStep::DeleteEdge, -1, live[victim].id, subsumer});
    live.erase(live.begin() + victim);
  }

  Hypergraph reduced;
  for (const auto& e : live) {
    Hyperedge he{e.id, {e.vars.begin(), e.vars.end()}};
    reduced.edges.push_back(he);
    for (int v : he.vars) reduced.domain[v] = h.domain.at(v);
  }
  return {reduced, log};
}

bool is_acyclic(const Hypergraph& h) { return gyo_reduce(h).first.edges.empty(); }

std::string format_gyo_log(const std::vector<GyoStep>& log, const Hypergraph& h) {
  std::ostringstream os;
  for (const auto& s : log) {
    if (s.kind == GyoStep::EliminateVertex)
      os << "eliminate v" << s.vertex << " from e" << s.edge << "\n";
    else if (s.subsumer >= 0)
      os << "delete e" << s.edge << " subsumed by e" << s.subsumer << "\n";
    else
      os << "delete e" << s.edge << " empty\n";
  }
  auto reduced = gyo_reduce(h).first;  // unique; cheap at test sizes
  os << "surviving";
  for (const auto& e : reduced.edges) os << " e" << e.id;
  os << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Ghd helpers

int Ghd::root() const {
  for (int i = 0; i < node_count(); ++i)
    if (parent[i] < 0) return i;
  throw std::logic_error("ghd has no root");
}

std::vector<std::vector<int>> Ghd::children() const {
  std::vector<std::vector<int>> ch(node_count());
  for (int i = 0; i < node_count(); ++i)
    if (parent[i] >= 0) ch[parent[i]].push_back(i);
  return ch;
}

int Ghd::internal_nodes() const {
  auto ch = children();
  int n = 0;
  for (int i = 0; i < node_count(); ++i)
    if (!ch[i].empty()) ++n;
  return n;
}

std::vector<int> Ghd::depths() const {
  std::vector<int> d(node_count(), -1);
  std::vector<int> stack{root()};
  d[root()] = 0;
  auto ch = children();
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int c : ch[u]) {
      d[c] = d[u] + 1;
      stack.push_back(c);
    }
  }
  return d;
}

std::string Ghd::serialize() const {
  std::ostringstream os;
  for (int i = 0; i < node_count(); ++i) {
    os << i << ":p" << parent[i] << ":chi";
    for (int v : chi[i]) os << "," << v;
    os << ":lam";
    for (int e : lambda[i]) os << "," << e;
    os << ";";
  }
  return os.str();
}

bool ghd_valid(const Hypergraph& h, const Ghd& t, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  int roots = 0;
  for (int p : t.parent)
    if (p < 0) ++roots;
  if (roots != 1) return fail("not exactly one root");
  // Coverage.
  for (const auto& e : h.edges) {
    auto it = t.cover.find(e.id);
    if (it == t.cover.end()) return fail("edge e" + std::to_string(e.id) + " uncovered");
    const auto& bag = t.chi[it->second];
    if (!std::includes(bag.begin(), bag.end(), e.vars.begin(), e.vars.end()))
      return fail("edge e" + std::to_string(e.id) + " not inside its cover bag");
    const auto& lam = t.lambda[it->second];
    if (std::find(lam.begin(), lam.end(), e.id) == lam.end())
      return fail("cover node missing lambda entry for e" + std::to_string(e.id));
  }
  // Running intersection: nodes containing each variable form a subtree.
  for (int v : h.vertices()) {
    std::vector<int> holders;
    for (int i = 0; i < t.node_count(); ++i)
      if (std::binary_search(t.chi[i].begin(), t.chi[i].end(), v)) holders.push_back(i);
    if (holders.empty()) return fail("variable v" + std::to_string(v) + " in no bag");
    std::set<int> hs(holders.begin(), holders.end());
    // Each holder except the topmost one must have a holder parent.
    int topless = 0;
    for (int u : holders) {
      int p = t.parent[u];
      if (p < 0 || !hs.count(p)) ++topless;
    }
    if (topless != 1) return fail("running intersection broken at v" + std::to_string(v));
  }
  return true;
}

// ---------------------------------------------------------------------------
// Core / forest decomposition

namespace {

struct JoinForest {
  // One entry per removed component: edge ids and the max-weight join tree
  // (adjacency between component-local indices).
  std::vector<std::vector<int>> comp_edges;
  std::vector<std::vector<std::pair<int, int>>> comp_tree;  // local index pairs
};

std::vector<int> edge_vars(const Hypergraph& h, int id) { return h.edge_by_id(id)->vars; }

int intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return static_cast<int>(out.size());
}

// Maximum-weight spanning forest of the intersection graph of the removed
// edges (Bernstein–Goodman: a join forest, since the removed set is acyclic).
JoinForest removed_join_forest(const Hypergraph& h, const std::vector<int>& removed) {
  int n = static_cast<int>(removed.size());
  struct E {
    int w, i, j;
  };
  std::vector<E> cands;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      int w = intersection_size(edge_vars(h, removed[i]), edge_vars(h, removed[j]));
      if (w > 0) cands.push_back({w, i, j});
    }
  std::sort(cands.begin(), cands.end(), [](const E& a, const E& b) {
    return std::tie(b.w, a.i, a.j) < std::tie(a.w, b.i, b.j);
  });
  std::vector<int> dsu(n);
  std::iota(dsu.begin(), dsu.end(), 0);
  auto find = [&](int x) {
    while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
    return x;
  };
  std::vector<std::vector<std::pair<int, int>>> adj;  // global tree edges later
  std::vector<std::pair<int, int>> tree;
  for (const auto& c : cands) {
    int a = find(c.i), b = find(c.j);
    if (a == b) continue;
    dsu[a] = b;
    tree.emplace_back(c.i, c.j);
  }
  // Group into components.
  std::map<int, int> comp_of_root;
  JoinForest jf;
  std::vector<int> local(n, -1);
  for (int i = 0; i < n; ++i) {
    int rt = find(i);
    if (!comp_of_root.count(rt)) {
      comp_of_root[rt] = static_cast<int>(jf.comp_edges.size());
      jf.comp_edges.emplace_back();
      jf.comp_tree.emplace_back();
    }
    int c = comp_of_root[rt];
    local[i] = static_cast<int>(jf.comp_edges[c].size());
    jf.comp_edges[c].push_back(removed[i]);
  }
  for (auto [i, j] : tree) {
    int c = comp_of_root[find(i)];
    jf.comp_tree[c].emplace_back(local[i], local[j]);
  }
  return jf;
}

// Orients each component tree away from the chosen roots (multi-source BFS)
// and returns edge-id -> parent edge-id (-1 for roots).
std::map<int, int> orient_component(const std::vector<int>& edges,
                                    const std::vector<std::pair<int, int>>& tree,
                                    const std::vector<int>& root_ids) {
  int n = static_cast<int>(edges.size());
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : tree) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<int> parent(n, -2);
  std::vector<int> queue;
  for (int r : root_ids) {
    int li = static_cast<int>(std::find(edges.begin(), edges.end(), r) - edges.begin());
    parent[li] = -1;
    queue.push_back(li);
  }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    int u = queue[qi];
    std::vector<int> nb = adj[u];
    std::sort(nb.begin(), nb.end());
    for (int v : nb)
      if (parent[v] == -2) {
        parent[v] = u;
        queue.push_back(v);
      }
  }
  std::map<int, int> out;
  for (int i = 0; i < n; ++i) {
    if (parent[i] == -2) throw std::logic_error("join forest not spanning");
    out[edges[i]] = parent[i] < 0 ? -1 : edges[parent[i]];
  }
  return out;
}

CoreForest core_forest_with_roots(const Hypergraph& h,
                                  const std::vector<std::vector<int>>& roots_per_comp) {
  auto [reduced, log] = gyo_reduce(h);
  std::set<int> surviving;
  for (const auto& e : reduced.edges) surviving.insert(e.id);
  std::vector<int> removed;
  for (const auto& e : h.edges)
    if (!surviving.count(e.id)) removed.push_back(e.id);

  JoinForest jf = removed_join_forest(h, removed);

  CoreForest cf;
  cf.survivor_edges.assign(surviving.begin(), surviving.end());
  cf.core_edges = cf.survivor_edges;
  std::set<int> core_verts;
  for (int id : cf.survivor_edges)
    for (int v : edge_vars(h, id)) core_verts.insert(v);

  for (std::size_t c = 0; c < jf.comp_edges.size(); ++c) {
    std::vector<int> roots = c < roots_per_comp.size() ? roots_per_comp[c]
                                                       : std::vector<int>{};
    if (roots.empty()) roots = {*std::min_element(jf.comp_edges[c].begin(),
                                                  jf.comp_edges[c].end())};
    auto parent = orient_component(jf.comp_edges[c], jf.comp_tree[c], roots);
    // BFS order: roots first, then children.
    std::vector<int> order = roots;
    std::sort(order.begin(), order.end());
    for (std::size_t qi = 0; qi < order.size(); ++qi) {
      std::vector<int> kids;
      for (auto [e, p] : parent)
        if (p == order[qi]) kids.push_back(e);
      std::sort(kids.begin(), kids.end());
      order.insert(order.end(), kids.begin(), kids.end());
    }
    cf.forest_trees.push_back(order);
    std::map<int, int> pm;
    for (auto [e, p] : parent) pm[e] = p;
    cf.forest_parent.push_back(pm);
    for (int r : roots) {
      cf.core_edges.push_back(r);
      for (int v : edge_vars(h, r)) core_verts.insert(v);
    }
  }
  std::sort(cf.core_edges.begin(), cf.core_edges.end());
  cf.core_vertices.assign(core_verts.begin(), core_verts.end());
  cf.n2 = static_cast<int>(cf.core_vertices.size());
  return cf;
}

Ghd ghd_from_core_forest(const Hypergraph& h, const CoreForest& cf,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Ghd t;
  auto add_node = [&](const std::vector<int>& bag, const std::vector<int>& lam,
                      int parent) {
    t.parent.push_back(parent);
    t.chi.push_back(bag);
    t.lambda.push_back(lam);
    return t.node_count() - 1;
  };
  int rprime = add_node(cf.core_vertices, cf.core_edges, -1);
  std::map<int, int> node_of_edge;
  for (int e : cf.core_edges) {
    int n = add_node(edge_vars(h, e), {e}, rprime);
    node_of_edge[e] = n;
    t.cover[e] = n;
  }
  for (std::size_t ti = 0; ti < cf.forest_trees.size(); ++ti) {
    const auto& order = cf.forest_trees[ti];
    const auto& parent = cf.forest_parent[ti];
    for (int e : order) {
      int pe = parent.at(e);
      if (pe < 0) continue;  // root: already a core leaf
      // Valid attachment targets: the join parent's node and every ancestor
      // whose bag contains the interface. Seed 0 picks the topmost.
      std::vector<int> evars = edge_vars(h, e);
      std::vector<int> pvars = edge_vars(h, pe);
      std::vector<int> iface;
      std::set_intersection(evars.begin(), evars.end(), pvars.begin(), pvars.end(),
                            std::back_inserter(iface));
      int anchor = node_of_edge.at(pe);
      std::vector<int> chain;  // anchor .. root
      for (int u = anchor; u >= 0; u = t.parent[u]) chain.push_back(u);
      std::vector<int> valid;
      for (int u : chain) {
        const auto& bag = t.chi[u];
        if (std::includes(bag.begin(), bag.end(), iface.begin(), iface.end()))
          valid.push_back(u);
      }
      int target = valid.empty() ? anchor
                 : seed == 0     ? valid.back()  // topmost
                                 : valid[rng() % valid.size()];
      int n = add_node(evars, {e}, target);
      node_of_edge[e] = n;
      t.cover[e] = n;
    }
  }
  return t;
}

}  // namespace

CoreForest core_forest(const Hypergraph& h) { return core_forest_with_roots(h, {}); }

Ghd build_gyo_ghd(const Hypergraph& h, std::uint64_t seed) {
  auto [reduced, log] = gyo_reduce(h);
  bool acyclic = reduced.edges.empty();
  std::set<int> surviving;
  for (const auto& e : reduced.edges) surviving.insert(e.id);
  std::vector<int> removed;
  for (const auto& e : h.edges)
    if (!surviving.count(e.id)) removed.push_back(e.id);
  JoinForest jf = removed_join_forest(h, removed);

  std::vector<std::vector<int>> roots(jf.comp_edges.size());
  if (seed != 0) {
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < jf.comp_edges.size(); ++c) {
      std::vector<int> sorted = jf.comp_edges[c];
      std::sort(sorted.begin(), sorted.end());
      if (acyclic) {
        roots[c] = {sorted[rng() % sorted.size()]};
      } else {
        for (int e : sorted)
          if (rng() % 2) roots[c].push_back(e);
        if (roots[c].empty()) roots[c] = {sorted[rng() % sorted.size()]};
      }
    }
  }
  CoreForest cf = core_forest_with_roots(h, roots);
  return ghd_from_core_forest(h, cf, seed);
}

// ---------------------------------------------------------------------------
// MD transform

Ghd md_ghd(const Hypergraph& h, const Ghd& input) {
  Ghd t = input;
  int cap = t.node_count() * std::max(1, t.internal_nodes()) + 8;
  for (int iter = 0; iter <= cap; ++iter) {
    if (iter == cap) throw std::logic_error("md_ghd move bound exceeded");
    auto depth = t.depths();
    std::vector<int> order(t.node_count());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return depth[a] > depth[b]; });
    bool moved = false;
    for (int v : order) {
      int u = t.parent[v];
      if (u < 0) continue;
      std::vector<int> iface;
      std::set_intersection(t.chi[v].begin(), t.chi[v].end(), t.chi[u].begin(),
                            t.chi[u].end(), std::back_inserter(iface));
      // Topmost predecessor of u (inclusive) whose bag contains the interface.
      int topmost = u;
      for (int w = u; w >= 0; w = t.parent[w])
        if (std::includes(t.chi[w].begin(), t.chi[w].end(), iface.begin(), iface.end()))
          topmost = w;
      if (topmost != u) {
        t.parent[v] = topmost;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Width search

namespace {
void enumerate_root_sets(const Hypergraph& h, const JoinForest& jf, bool acyclic,
                         std::vector<std::vector<std::vector<int>>>& per_comp) {
  for (const auto& comp : jf.comp_edges) {
    std::vector<int> sorted = comp;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::vector<int>> choices;
    if (acyclic) {
      for (int e : sorted) choices.push_back({e});
    } else {
      int n = static_cast<int>(sorted.size());
      for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> s;
        for (int i = 0; i < n; ++i)
          if (mask & (1u << i)) s.push_back(sorted[i]);
        choices.push_back(s);
      }
    }
    per_comp.push_back(choices);
  }
}
}  // namespace

WidthResult internal_node_width(const Hypergraph& h, int budget) {
  auto [reduced, log] = gyo_reduce(h);
  bool acyclic = reduced.edges.empty();
  std::set<int> surviving;
  for (const auto& e : reduced.edges) surviving.insert(e.id);
  std::vector<int> removed;
  for (const auto& e : h.edges)
    if (!surviving.count(e.id)) removed.push_back(e.id);
  JoinForest jf = removed_join_forest(h, removed);

  WidthResult best;
  best.y = -1;
  auto consider = [&](const Ghd& cand) {
    std::string why;
    if (!ghd_valid(h, cand, &why)) return;
    Ghd normal = md_ghd(h, cand);
    if (!ghd_valid(h, normal, &why)) normal = cand;
    int y = normal.internal_nodes();
    if (best.y < 0 || y < best.y ||
        (y == best.y && normal.serialize() < best.witness.serialize())) {
      best.y = y;
      best.witness = normal;
    }
  };

  std::uint64_t combos = 1;
  std::vector<std::vector<std::vector<int>>> per_comp;
  enumerate_root_sets(h, jf, acyclic, per_comp);
  for (const auto& c : per_comp) combos *= c.size();

  if (h.k() <= 8 && combos <= 4096) {
    std::vector<std::size_t> idx(per_comp.size(), 0);
    for (;;) {
      std::vector<std::vector<int>> roots;
      for (std::size_t c = 0; c < per_comp.size(); ++c)
        roots.push_back(per_comp[c][idx[c]]);
      consider(ghd_from_core_forest(h, core_forest_with_roots(h, roots), 0));
      std::size_t c = 0;
      while (c < idx.size() && ++idx[c] == per_comp[c].size()) idx[c++] = 0;
      if (c == idx.size()) break;
      if (per_comp.empty()) break;
    }
    if (per_comp.empty())
      consider(ghd_from_core_forest(h, core_forest(h), 0));
    best.exact = true;
  } else {
    consider(build_gyo_ghd(h, 0));
    for (int s = 1; s <= budget; ++s) consider(build_gyo_ghd(h, s));
    best.exact = false;
  }
  if (best.y < 0) throw std::logic_error("width search found no valid GHD");
  return best;
}

// ---------------------------------------------------------------------------
// Degeneracy and strong independent sets

int degeneracy(const Hypergraph& h) {
  std::vector<Hyperedge> live = h.edges;
  std::set<int> verts;
  for (const auto& e : live)
    for (int v : e.vars) verts.insert(v);
  int d = 0;
  while (!verts.empty()) {
    int best = -1, bdeg = 0;
    for (int v : verts) {
      int deg = 0;
      for (const auto& e : live)
        if (std::binary_search(e.vars.begin(), e.vars.end(), v)) ++deg;
      if (best < 0 || deg < bdeg) {
        best = v;
        bdeg = deg;
      }
    }
    d = std::max(d, bdeg);
    // Removing a vertex removes every incident hyperedge.
    std::erase_if(live, [&](const Hyperedge& e) {
      return std::binary_search(e.vars.begin(), e.vars.end(), best);
    });
    verts.erase(best);
  }
  return d;
}

IndependentSetResult strong_independent_set(const Hypergraph& h) {
  std::vector<int> verts = h.vertices();
  auto conflicts = [&](int a, int b) {
    for (const auto& e : h.edges)
      if (std::binary_search(e.vars.begin(), e.vars.end(), a) &&
          std::binary_search(e.vars.begin(), e.vars.end(), b))
        return true;
    return false;
  };
  auto greedy = [&](const std::vector<int>& order) {
    std::vector<int> out;
    for (int v : order) {
      bool ok = true;
      for (int u : out)
        if (conflicts(u, v)) {
          ok = false;
          break;
        }
      if (ok) out.push_back(v);
    }
    return out;
  };
  auto codegree = [&](int v) {
    std::set<int> nb;
    for (const auto& e : h.edges)
      if (std::binary_search(e.vars.begin(), e.vars.end(), v))
        nb.insert(e.vars.begin(), e.vars.end());
    return static_cast<int>(nb.size());
  };

  IndependentSetResult best;
  auto consider = [&](std::vector<int> cand) {
    std::sort(cand.begin(), cand.end());
    if (cand.size() > best.vertices.size()) best.vertices = cand;
  };
  consider(greedy(verts));
  std::vector<int> by_deg = verts;
  std::sort(by_deg.begin(), by_deg.end(),
            [&](int a, int b) { return codegree(a) < codegree(b); });
  consider(greedy(by_deg));
  std::mt19937_64 rng(7);
  for (int pass = 0; pass < 8; ++pass) {
    std::vector<int> shuffled = verts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    consider(greedy(shuffled));
  }

  int d = degeneracy(h), r = h.r();
  long denom = static_cast<long>(d) * std::max(1, r - 1);
  best.meets_bound =
      denom > 0 && static_cast<long>(best.vertices.size()) * denom >=
                       static_cast<long>(verts.size());
  return best;
}

}  // namespace faqnet
