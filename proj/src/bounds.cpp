#include "bounds.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

namespace faqnet {

namespace {

long ceil_div(long a, long b) { return (a + b - 1) / b; }

}  // namespace

BoundsInput bounds_input(const FaqQuery& q, const Topology& t, const Assignment& a) {
  BoundsInput b;
  WidthResult w = internal_node_width(q.h);
  CoreForest cf = core_forest(q.h);
  b.y = w.y;
  b.n2 = cf.n2;
  b.d = std::max(1, degeneracy(q.h));
  b.r = std::max(1, q.h.r());
  b.N = static_cast<long>(q.max_relation_size());
  b.B = t.capacity_bits;
  b.mincut = min_cut(t).value;
  b.st = st_table(t);
  std::vector<std::pair<int, long>> demands;
  for (const auto& [e, rel] : q.relations) {
    int owner = a.owner.at(e);
    if (owner == a.answer_player) continue;
    long bits = 32 + static_cast<long>(rel.size()) *
                         (8 * static_cast<long>(rel.arity()));
    demands.emplace_back(owner, bits);
  }
  b.mcf_rounds = mcf_schedule(t, demands, a.answer_player).formula_floor;
  return b;
}

long upper_bound_bcq(const BoundsInput& b) {
  if (b.st.empty()) throw std::invalid_argument("empty packing table");
  long best = -1;
  for (auto [delta, st] : b.st) {
    if (st <= 0) continue;
    long est = ceil_div(std::max<long>(1, b.N), b.B * st) + delta;
    if (best < 0 || est < best) best = est;
  }
  if (best < 0) throw std::invalid_argument("empty packing table");
  return b.y * best + b.mcf_rounds;
}

long lower_bound_bcq(const BoundsInput& b) {
  if (b.mincut <= 0) throw std::invalid_argument("zero min cut");
  // (y/r + n2/(d*r)) * N / mincut  ==  (y*d + n2) * N / (d * r * mincut)
  long num = (b.y * b.d + b.n2) * b.N;
  long den = b.d * b.r * b.mincut;
  return ceil_div(num, den);
}

TribesInstance gen_tribes(int m, long n, std::uint64_t seed, bool hard) {
  std::mt19937_64 rng(seed);
  TribesInstance tr;
  tr.m = m;
  tr.n = n;
  tr.value = true;
  for (int i = 0; i < m; ++i) {
    std::vector<int> s, t;
    if (hard) {
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      long half = n / 2;
      for (long j = 0; j < half; ++j)
        if (rng() & 1) s.push_back(perm[j]);
      for (long j = half; j < n; ++j)
        if (rng() & 1) t.push_back(perm[j]);
      if (rng() & 1) {  // optionally a single witness element
        int w = perm[rng() % n];
        s.push_back(w);
        t.push_back(w);
      }
    } else {
      for (long v = 0; v < n; ++v) {
        if (rng() & 1) s.push_back(static_cast<int>(v));
        if (rng() & 1) t.push_back(static_cast<int>(v));
      }
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    std::vector<int> inter;
    std::set_intersection(s.begin(), s.end(), t.begin(), t.end(),
                          std::back_inserter(inter));
    tr.value = tr.value && !inter.empty();
    tr.pairs.emplace_back(std::move(s), std::move(t));
  }
  return tr;
}

namespace {

Relation pinned_relation(const Hyperedge& e, const std::map<int, int>& domain) {
  Relation r;
  r.attrs = e.vars;
  for (int v : e.vars) r.domain_sizes.push_back(domain.at(v));
  r.entries.push_back({Tuple(e.vars.size(), 0), 1});
  return r;
}

// {(l, 0, ..., 0) : l in the free positions} with the set (or full range) at
// one coordinate and zero pins elsewhere.
Relation coord_relation(const Hyperedge& e, const std::map<int, int>& domain,
                        int var, const std::vector<int>& values) {
  Relation r;
  r.attrs = e.vars;
  for (int v : e.vars) r.domain_sizes.push_back(domain.at(v));
  int pos = r.attr_pos(var);
  for (int val : values) {
    Tuple t(e.vars.size(), 0);
    t[pos] = val;
    r.entries.push_back({t, 1});
  }
  return r;
}

std::vector<int> full_range(long n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Shared per-vertex embedding: each chosen vertex o carries S on one incident
// edge and T on another; remaining o-incident edges are unconstrained at o;
// everything else is pinned to the all-zero tuple.
HardInstance per_vertex_embedding(const Hypergraph& h, const TribesInstance& tr,
                                  const std::vector<int>& chosen,
                                  EmbeddingKind kind) {
  if (static_cast<int>(chosen.size()) < tr.m)
    throw std::invalid_argument("forest too small for m");
  HardInstance inst;
  inst.kind = kind;
  inst.tribes = tr;
  inst.effective_n = tr.n;
  inst.query.semiring = Semiring::boolean();
  inst.query.h = h;
  for (auto& [v, d] : inst.query.h.domain) d = static_cast<int>(tr.n);
  const auto& domain = inst.query.h.domain;

  std::map<int, char> role;  // edge -> 's' | 't' | 'p'
  for (int i = 0; i < tr.m; ++i) {
    int o = chosen[static_cast<std::size_t>(i)];
    std::vector<int> incident;
    for (const auto& e : h.edges)
      if (std::count(e.vars.begin(), e.vars.end(), o)) incident.push_back(e.id);
    if (incident.size() < 2)
      throw std::invalid_argument("chosen vertex lacks two incident edges");
    const Hyperedge* se = h.edge_by_id(incident[0]);
    const Hyperedge* te = h.edge_by_id(incident[1]);
    inst.query.relations[se->id] =
        coord_relation(*se, domain, o, tr.pairs[i].first);
    inst.query.relations[te->id] =
        coord_relation(*te, domain, o, tr.pairs[i].second);
    role[se->id] = 's';
    role[te->id] = 't';
    inst.s_edges.push_back(se->id);
    inst.t_edges.push_back(te->id);
    for (std::size_t j = 2; j < incident.size(); ++j) {
      const Hyperedge* pe = h.edge_by_id(incident[j]);
      inst.query.relations[pe->id] =
          coord_relation(*pe, domain, o, full_range(tr.n));
      role[pe->id] = 'p';
    }
  }
  for (const auto& e : h.edges) {
    if (role.count(e.id)) {
      if (role[e.id] == 'p') inst.pad_edges.push_back(e.id);
      continue;
    }
    inst.query.relations[e.id] = pinned_relation(e, domain);
    inst.pad_edges.push_back(e.id);
  }
  inst.query.validate();
  return inst;
}

}  // namespace

HardInstance embed_forest(const Hypergraph& h, const TribesInstance& tr) {
  if (!is_acyclic(h) || h.r() > 2)
    throw std::invalid_argument("binary forest required");
  // bipartition by BFS parity, per connected component
  std::vector<int> verts = h.vertices();
  std::map<int, int> parity, deg;
  for (const auto& e : h.edges)
    for (int v : e.vars) deg[v]++;
  std::map<int, std::vector<int>> adj;
  for (const auto& e : h.edges)
    if (e.vars.size() == 2) {
      adj[e.vars[0]].push_back(e.vars[1]);
      adj[e.vars[1]].push_back(e.vars[0]);
    }
  for (int root : verts) {
    if (parity.count(root)) continue;
    parity[root] = 0;
    std::vector<int> queue{root};
    for (std::size_t i = 0; i < queue.size(); ++i)
      for (int w : adj[queue[i]])
        if (!parity.count(w)) {
          parity[w] = parity[queue[i]] ^ 1;
          queue.push_back(w);
        }
  }
  std::vector<int> even, odd;
  for (int v : verts) {
    if (deg[v] < 2) continue;
    (parity[v] == 0 ? even : odd).push_back(v);
  }
  const std::vector<int>& side = even.size() >= odd.size() ? even : odd;
  return per_vertex_embedding(h, tr, side, EmbeddingKind::Forest);
}

HardInstance embed_core(const Hypergraph& h, const TribesInstance& tr) {
  CoreForest cf = core_forest(h);
  if (cf.core_edges.empty()) throw std::invalid_argument("empty core");
  Hypergraph core;
  for (int e : cf.core_edges) core.edges.push_back(*h.edge_by_id(e));
  for (const auto& e : core.edges)
    for (int v : e.vars) core.domain[v] = h.domain.at(v);

  long verts = static_cast<long>(core.domain.size());
  long pairs2 = 0;
  for (const auto& e : core.edges)
    pairs2 += static_cast<long>(e.vars.size()) * (e.vars.size() - 1) / 2;
  double avg_degree = verts > 0 ? 2.0 * pairs2 / verts : 0.0;

  if (avg_degree > 10.0 && core.r() <= 2) {
    // dense core: vertex-disjoint short cycles, sets re-encoded over [w]^2
    long w = 1;
    while ((w + 1) * (w + 1) <= tr.n) ++w;
    TribesInstance shrunk = tr;
    shrunk.n = w * w;
    shrunk.value = true;
    for (auto& [s, t] : shrunk.pairs) {
      auto clip = [&](std::vector<int>& v) {
        v.erase(std::remove_if(v.begin(), v.end(),
                               [&](int x) { return x >= w * w; }),
                v.end());
      };
      clip(s);
      clip(t);
      std::vector<int> inter;
      std::set_intersection(s.begin(), s.end(), t.begin(), t.end(),
                            std::back_inserter(inter));
      shrunk.value = shrunk.value && !inter.empty();
    }

    std::map<int, std::vector<std::pair<int, int>>> g;  // v -> (neighbor, edge)
    for (const auto& e : core.edges)
      if (e.vars.size() == 2) {
        g[e.vars[0]].emplace_back(e.vars[1], e.id);
        g[e.vars[1]].emplace_back(e.vars[0], e.id);
      }
    std::set<int> alive;
    for (const auto& [v, nb] : g) alive.insert(v);
    std::map<std::pair<int, int>, int> edge_of;
    for (const auto& e : core.edges)
      if (e.vars.size() == 2) {
        edge_of[{e.vars[0], e.vars[1]}] = e.id;
        edge_of[{e.vars[1], e.vars[0]}] = e.id;
      }

    auto shortest_cycle = [&]() -> std::vector<int> {
      std::vector<int> best;
      for (int start : alive) {
        std::map<int, int> depth, parent;
        depth[start] = 0;
        parent[start] = -1;
        std::vector<int> queue{start};
        for (std::size_t i = 0; i < queue.size(); ++i) {
          int x = queue[i];
          for (auto [y, eid] : g[x]) {
            if (!alive.count(y)) continue;
            if (!depth.count(y)) {
              depth[y] = depth[x] + 1;
              parent[y] = x;
              queue.push_back(y);
              continue;
            }
            if (y == parent[x]) continue;
            // non-tree edge: splice the two tree paths at their junction
            std::vector<int> px, py;
            for (int u = x; u >= 0; u = parent[u]) px.push_back(u);
            for (int u = y; u >= 0; u = parent[u]) py.push_back(u);
            std::reverse(px.begin(), px.end());
            std::reverse(py.begin(), py.end());
            std::size_t common = 0;
            while (common < px.size() && common < py.size() &&
                   px[common] == py[common])
              ++common;
            std::vector<int> cyc(px.begin() + common - 1, px.end());
            for (std::size_t j = py.size(); j-- > common;) cyc.push_back(py[j]);
            std::set<int> uniq(cyc.begin(), cyc.end());
            if (cyc.size() < 3 || uniq.size() != cyc.size()) continue;
            if (best.empty() || cyc.size() < best.size()) best = cyc;
          }
        }
      }
      return best;
    };

    HardInstance inst;
    inst.kind = EmbeddingKind::Cycle;
    inst.tribes = shrunk;
    inst.effective_n = w * w;
    inst.query.semiring = Semiring::boolean();
    inst.query.h = core;
    for (auto& [v, d] : inst.query.h.domain) d = static_cast<int>(w);
    const auto& domain = inst.query.h.domain;

    auto pair_relation = [&](int eid, int hi_var, int lo_var,
                             const std::vector<int>& set) {
      const Hyperedge* he = core.edge_by_id(eid);
      Relation r;
      r.attrs = he->vars;
      for (int v : he->vars) r.domain_sizes.push_back(domain.at(v));
      int hp = r.attr_pos(hi_var), lp = r.attr_pos(lo_var);
      for (int val : set) {
        Tuple t(2, 0);
        t[hp] = static_cast<int>(val / w);
        t[lp] = static_cast<int>(val % w);
        r.entries.push_back({t, 1});
      }
      return r;
    };

    for (int i = 0; i < shrunk.m; ++i) {
      std::vector<int> cyc = shortest_cycle();
      if (cyc.empty())
        throw std::invalid_argument("no embedding found (core too sparse for m)");
      int c1 = cyc[0], c2 = cyc[1], c3 = cyc[2];
      int se = edge_of.at({c1, c2});
      int te = edge_of.at({c2, c3});
      inst.query.relations[se] = pair_relation(se, c1, c2, shrunk.pairs[i].first);
      inst.query.relations[te] = pair_relation(te, c3, c2, shrunk.pairs[i].second);
      inst.s_edges.push_back(se);
      inst.t_edges.push_back(te);
      for (std::size_t j = 2; j + 1 < cyc.size(); ++j) {
        int eid = edge_of.at({cyc[j], cyc[j + 1]});
        const Hyperedge* he = core.edge_by_id(eid);
        Relation r;
        r.attrs = he->vars;
        for (int v : he->vars) r.domain_sizes.push_back(domain.at(v));
        for (int v = 0; v < w; ++v) r.entries.push_back({{v, v}, 1});
        inst.query.relations[eid] = r;
        inst.pad_edges.push_back(eid);
      }
      {
        int eid = edge_of.at({cyc.back(), cyc.front()});
        const Hyperedge* he = core.edge_by_id(eid);
        Relation r;
        r.attrs = he->vars;
        for (int v : he->vars) r.domain_sizes.push_back(domain.at(v));
        for (int v = 0; v < w; ++v) r.entries.push_back({{v, v}, 1});
        inst.query.relations[eid] = r;
        inst.pad_edges.push_back(eid);
      }
      for (int v : cyc) alive.erase(v);
    }
    // everything untouched is a free complete relation
    for (const auto& e : core.edges) {
      if (inst.query.relations.count(e.id)) continue;
      Relation r;
      r.attrs = e.vars;
      for (int v : e.vars) r.domain_sizes.push_back(domain.at(v));
      Tuple t(e.vars.size(), 0);
      for (;;) {
        r.entries.push_back({t, 1});
        std::size_t p = 0;
        while (p < t.size() && ++t[p] == static_cast<int>(w)) t[p++] = 0;
        if (p == t.size()) break;
      }
      inst.query.relations[e.id] = r;
      inst.pad_edges.push_back(e.id);
    }
    inst.query.validate();
    return inst;
  }

  // sparse core: greedy independent set over degree->=2 vertices
  std::vector<int> vlist = core.vertices();
  std::map<int, std::set<int>> nbr;
  std::map<int, int> deg;
  for (const auto& e : core.edges)
    for (std::size_t i = 0; i < e.vars.size(); ++i) {
      deg[e.vars[i]]++;
      for (std::size_t j = 0; j < e.vars.size(); ++j)
        if (i != j) nbr[e.vars[i]].insert(e.vars[j]);
    }
  std::set<int> alive(vlist.begin(), vlist.end()), taken;
  while (!alive.empty()) {
    int best = -1;
    std::size_t best_deg = 0;
    for (int v : alive) {
      std::size_t d = 0;
      for (int u : nbr[v])
        if (alive.count(u)) ++d;
      if (best < 0 || d < best_deg) {
        best = v;
        best_deg = d;
      }
    }
    taken.insert(best);
    alive.erase(best);
    for (int u : nbr[best]) alive.erase(u);
  }
  std::vector<int> chosen;
  for (int v : taken)
    if (deg[v] >= 2) chosen.push_back(v);
  if (static_cast<int>(chosen.size()) < tr.m)
    throw std::invalid_argument("no embedding found (core too sparse for m)");
  HardInstance inst =
      per_vertex_embedding(core, tr, chosen, EmbeddingKind::IndependentSet);
  return inst;
}

HardInstance embed_hypergraph(const Hypergraph& h, const Ghd& ghd,
                              const TribesInstance& tr) {
  std::string why;
  if (!ghd_valid(h, ghd, &why))
    throw std::invalid_argument("invalid decomposition: " + why);
  auto kids = ghd.children();
  int root = ghd.root();

  HardInstance inst;
  inst.kind = EmbeddingKind::Hypergraph;
  inst.tribes = tr;
  inst.effective_n = tr.n;
  inst.query.semiring = Semiring::boolean();
  inst.query.h = h;
  for (auto& [v, d] : inst.query.h.domain) d = static_cast<int>(tr.n);
  const auto& domain = inst.query.h.domain;

  std::set<int> claimed;
  int placed = 0;
  for (int u = 0; u < ghd.node_count() && placed < tr.m; ++u) {
    if (kids[u].empty()) continue;
    if (ghd.lambda[u].size() != 1) continue;
    int eu = ghd.lambda[u].front();
    if (claimed.count(eu)) continue;
    static const std::vector<int> kEmptyBag;
    const auto& pbag = u == root ? kEmptyBag : ghd.chi[ghd.parent[u]];
    // private attributes of this internal node
    std::vector<int> priv;
    for (int v : ghd.chi[u])
      if (!std::binary_search(pbag.begin(), pbag.end(), v)) priv.push_back(v);
    for (int p : priv) {
      // a child edge that also contains p carries the T set
      int te = -1;
      for (int c : kids[u]) {
        for (const auto& [e, node] : ghd.cover) {
          if (node != c || claimed.count(e) || e == eu) continue;
          const Hyperedge* he = h.edge_by_id(e);
          if (std::count(he->vars.begin(), he->vars.end(), p)) te = e;
        }
        if (te >= 0) break;
      }
      if (te < 0) continue;
      // claim every p-incident edge so no other pair touches p
      std::vector<int> incident;
      for (const auto& e : h.edges)
        if (std::count(e.vars.begin(), e.vars.end(), p)) incident.push_back(e.id);
      bool free = std::none_of(incident.begin(), incident.end(),
                               [&](int e) { return claimed.count(e) > 0; });
      if (!free) continue;
      inst.query.relations[eu] = coord_relation(*h.edge_by_id(eu), domain, p,
                                                tr.pairs[placed].first);
      inst.query.relations[te] = coord_relation(*h.edge_by_id(te), domain, p,
                                                tr.pairs[placed].second);
      inst.s_edges.push_back(eu);
      inst.t_edges.push_back(te);
      for (int e : incident) {
        claimed.insert(e);
        if (e == eu || e == te) continue;
        inst.query.relations[e] =
            coord_relation(*h.edge_by_id(e), domain, p, full_range(tr.n));
        inst.pad_edges.push_back(e);
      }
      ++placed;
      break;
    }
  }
  if (placed < tr.m)
    throw std::invalid_argument("insufficient private attributes");
  for (const auto& e : h.edges) {
    if (inst.query.relations.count(e.id)) continue;
    inst.query.relations[e.id] = pinned_relation(e, domain);
    inst.pad_edges.push_back(e.id);
  }
  inst.query.validate();
  return inst;
}

Assignment cut_assignment(const Topology& t, const HardInstance& inst) {
  MinCutResult cut = min_cut(t);
  std::vector<int> a_term, b_term;
  for (int p : t.terminals) {
    if (std::count(cut.side_a.begin(), cut.side_a.end(), p))
      a_term.push_back(p);
    else
      b_term.push_back(p);
  }
  if (a_term.empty() || b_term.empty())
    throw std::invalid_argument("cut does not separate the terminals");
  Assignment a;
  std::size_t ai = 0, bi = 0, ri = 0;
  for (int e : inst.s_edges) a.owner[e] = a_term[ai++ % a_term.size()];
  for (int e : inst.t_edges) a.owner[e] = b_term[bi++ % b_term.size()];
  for (int e : inst.pad_edges) a.owner[e] = t.terminals[ri++ % t.terminals.size()];
  a.answer_player = b_term.front();
  return a;
}

GapReport gap_report(const FaqQuery& q, const Topology& t, const Assignment& a,
                     long measured_rounds) {
  GapReport g;
  g.input = bounds_input(q, t, a);
  g.upper = upper_bound_bcq(g.input);
  g.lower = lower_bound_bcq(g.input);
  g.measured = measured_rounds;
  g.ratio_up = g.upper > 0 ? static_cast<double>(measured_rounds) / g.upper : 0;
  g.ratio_low = g.lower > 0 ? static_cast<double>(measured_rounds) / g.lower : 0;
  return g;
}

std::string gap_csv_header() {
  return "query,topology,y,n2,d,r,N,mincut,upper,lower,measured,protocol,"
         "ratio_up,ratio_low";
}

std::string gap_csv_row(const GapReport& g) {
  std::ostringstream os;
  os << g.query_label << "," << g.topology_label << "," << g.input.y << ","
     << g.input.n2 << "," << g.input.d << "," << g.input.r << "," << g.input.N
     << "," << g.input.mincut << "," << g.upper << "," << g.lower << ","
     << g.measured << "," << g.protocol_label << "," << g.ratio_up << ","
     << g.ratio_low;
  return os.str();
}

}  // namespace faqnet
