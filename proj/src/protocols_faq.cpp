#include <algorithm>
#include <numeric>
#include <set>

#include "protocols_detail.hpp"

namespace faqnet {

using namespace detail;

namespace {

std::vector<int> attr_positions(const std::vector<int>& attrs,
                                const std::vector<int>& subset) {
  std::vector<int> pos;
  for (int a : subset) {
    auto it = std::find(attrs.begin(), attrs.end(), a);
    if (it == attrs.end()) throw std::logic_error("attribute not in tuple schema");
    pos.push_back(static_cast<int>(it - attrs.begin()));
  }
  return pos;
}

Tuple pick(const Tuple& t, const std::vector<int>& pos) {
  Tuple r;
  r.reserve(pos.size());
  for (int p : pos) r.push_back(t[p]);
  return r;
}

Relation keys_only(const Relation& r) {
  Relation k = r;
  for (auto& [t, v] : k.entries) v = 1;
  k.normalize(Semiring::boolean());
  return k;
}

Relation schema_for(const Hypergraph& h, const std::vector<int>& attrs) {
  Relation r;
  r.attrs = attrs;
  for (int a : attrs) r.domain_sizes.push_back(h.domain.at(a));
  return r;
}

void require_terminal(const Topology& t, int player, const char* role) {
  if (!std::count(t.terminals.begin(), t.terminals.end(), player))
    throw std::invalid_argument(std::string(role) + " player must be a terminal");
}

// One star round trip: gather the center keys, broadcast the candidate tuple
// list, combine per-player factor vectors with an element-wise semiring
// product, and hand the grouped result to the sink.
struct StarSpec {
  std::vector<int> center_attrs;               // sorted bag of the center node
  std::vector<int> center_edges;               // candidate tuples = join of keys
  std::map<int, std::vector<int>> leaf_iface;  // leaf edge -> interface attrs
  std::vector<int> root_valued;                // edges multiplied at the center bag
  std::vector<int> keep;                       // result attributes (subset of bag)
  int sink = 0;
};

Relation run_star_phase(const StarSpec& sp, const std::map<int, Relation>& rels,
                        const FaqQuery& q, const Topology& t, const Assignment& a,
                        SimulationTrace& total, long cap) {
  const Semiring& s = q.semiring;
  int center_player = a.owner.at(*std::min_element(sp.center_edges.begin(),
                                                   sp.center_edges.end()));
  require_terminal(t, center_player, "center");
  require_terminal(t, sp.sink, "sink");

  // gather the other center relations' keys at the center player
  std::vector<Stream> streams;
  for (int e : sp.center_edges) {
    int owner = a.owner.at(e);
    require_terminal(t, owner, "owner");
    if (owner == center_player) continue;
    Stream st;
    st.id = e;
    st.src = owner;
    st.dst = center_player;
    st.payload = encode_relation(rels.at(e), Semiring::boolean(), false);
    st.bits = relation_bits(rels.at(e), Semiring::boolean(), false);
    streams.push_back(std::move(st));
  }
  std::map<int, std::vector<std::uint8_t>> gathered;
  if (!streams.empty()) {
    SimulationTrace tr = route_phase(t, streams, gathered, cap);
    total.append_shifted(tr, total.rounds);
  }

  // candidate center tuples: join of the center relations' key sets
  Relation cand;
  cand.entries.push_back({{}, 1});
  for (int e : sp.center_edges) {
    Relation k = gathered.count(e)
                     ? decode_relation(gathered.at(e), rels.at(e), Semiring::boolean(),
                                       false)
                     : keys_only(rels.at(e));
    cand = join(cand, k, Semiring::boolean());
  }
  cand = project_aggregate(cand, sp.center_attrs, Semiring::boolean());
  cand.domain_sizes = schema_for(q.h, sp.center_attrs).domain_sizes;
  std::size_t m = cand.size();

  // broadcast the candidate keys over one extracted Steiner tree
  std::vector<std::uint8_t> keys = encode_relation(cand, Semiring::boolean(), false);
  long key_bits = relation_bits(cand, Semiring::boolean(), false);
  SteinerPacking packing = packing_for(t, key_bits);
  std::map<int, std::vector<std::uint8_t>> received;
  SimulationTrace btr = broadcast_phase(t, center_player, keys, key_bits,
                                        {packing.trees.front()}, received, cap);
  total.append_shifted(btr, total.rounds);

  // per-player factor vectors over the candidate list
  std::vector<std::vector<Value>> local(t.n(), std::vector<Value>(m, s.one));
  for (const auto& [e, iface] : sp.leaf_iface) {
    int owner = a.owner.at(e);
    require_terminal(t, owner, "owner");
    auto idx = aggregate_index(rels.at(e), iface, s);
    auto pos = attr_positions(sp.center_attrs, iface);
    for (std::size_t i = 0; i < m; ++i) {
      auto it = idx.find(pick(cand.entries[i].first, pos));
      Value f = it == idx.end() ? s.zero : it->second;
      local[owner][i] = s.mul(local[owner][i], f);
    }
  }
  for (int e : sp.root_valued) {
    int owner = a.owner.at(e);
    const Relation& r = rels.at(e);
    auto idx = aggregate_index(r, r.attrs, s);
    auto pos = attr_positions(sp.center_attrs, r.attrs);
    for (std::size_t i = 0; i < m; ++i) {
      auto it = idx.find(pick(cand.entries[i].first, pos));
      Value f = it == idx.end() ? s.zero : it->second;
      local[owner][i] = s.mul(local[owner][i], f);
    }
  }

  // element-wise product convergecast into the sink
  std::vector<Value> out;
  if (m > 0) {
    SteinerPacking cpk = packing_for(t, static_cast<long>(m) * s.encode_bits);
    SimulationTrace ctr = convergecast_phase(
        t, sp.sink, cpk.trees, local, s.one, s.encode_bits,
        [&s](Value x, Value y) { return s.mul(x, y); }, out, cap);
    total.append_shifted(ctr, total.rounds);
  }

  Relation res = schema_for(q.h, sp.keep);
  auto keep_pos = attr_positions(sp.center_attrs, sp.keep);
  for (std::size_t i = 0; i < m; ++i)
    if (!s.is_zero(out[i]))
      res.entries.push_back({pick(cand.entries[i].first, keep_pos), out[i]});
  res.normalize(s);
  return res;
}

// Shared skeleton of forest_bcq / general_bcq / faq_ss: bottom-up star phases
// over the decomposition's internal nodes, then a trivial flush of whatever
// hangs directly under the root.
ProtocolResult elimination_protocol(const FaqQuery& q, const Topology& t,
                                    const Assignment& a) {
  q.validate();
  t.validate();
  Ghd g = md_ghd(q.h, build_gyo_ghd(q.h));
  auto kids = g.children();
  auto depth = g.depths();
  int root = g.root();
  long cap = default_round_cap(q, t);

  std::vector<int> order;
  for (int u = 0; u < g.node_count(); ++u)
    if (u != root && !kids[u].empty()) order.push_back(u);
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return depth[x] != depth[y] ? depth[x] > depth[y]
                                                            : x < y; });

  std::map<int, Relation> state = q.relations;
  std::map<int, int> cover_node = g.cover;
  ProtocolResult res;
  for (int u : order) {
    if (g.lambda[u].size() != 1)
      throw std::logic_error("internal decomposition node with several covers");
    int eu = g.lambda[u].front();
    StarSpec sp;
    sp.center_attrs = g.chi[u];
    sp.center_edges = {eu};
    sp.root_valued = {eu};
    for (int c : kids[u]) {
      for (const auto& [e, node] : cover_node) {
        if (node != c) continue;
        std::vector<int> iface;
        std::set_intersection(g.chi[c].begin(), g.chi[c].end(), g.chi[u].begin(),
                              g.chi[u].end(), std::back_inserter(iface));
        sp.leaf_iface[e] = iface;
      }
    }
    sp.keep = g.chi[u];
    sp.sink = a.owner.at(eu);
    state[eu] = run_star_phase(sp, state, q, t, a, res.trace, cap);
  }

  // residual query: edges still covered at the root's direct children (and at
  // the root itself), flushed to the answer player and finished centrally
  FaqQuery residual;
  residual.semiring = q.semiring;
  residual.free_vars = q.free_vars;
  Assignment ra;
  ra.answer_player = a.answer_player;
  for (const auto& [e, node] : cover_node) {
    if (node != root && g.parent[node] != root) continue;
    const Hyperedge* he = q.h.edge_by_id(e);
    residual.h.edges.push_back(*he);
    for (int v : he->vars) residual.h.domain[v] = q.h.domain.at(v);
    residual.relations[e] = state.at(e);
    ra.owner[e] = a.owner.at(e);
  }
  std::sort(residual.h.edges.begin(), residual.h.edges.end(),
            [](const Hyperedge& x, const Hyperedge& y) { return x.id < y.id; });
  ProtocolResult flush = trivial_protocol(residual, t, ra);
  res.trace.append_shifted(flush.trace, res.trace.rounds);
  res.answer = flush.answer;

  long n = static_cast<long>(q.max_relation_size());
  long phases = static_cast<long>(order.size());
  long bound = phases > 0 ? upper_estimate(t, phases, n, flush.bound_estimate)
                          : flush.bound_estimate;
  finish(res, q.semiring, std::max<long>(1, bound));
  return res;
}

void check_binary_boolean(const FaqQuery& q) {
  if (q.semiring.id != SemiringId::Boolean)
    throw std::invalid_argument("boolean semiring required");
  if (!q.free_vars.empty())
    throw std::invalid_argument("boolean conjunctive query has no free variables");
  if (q.h.r() > 2) throw std::invalid_argument("binary-arity hypergraph required");
}

}  // namespace

ProtocolResult star_bcq(const FaqQuery& q, const Topology& t, const Assignment& a) {
  q.validate();
  t.validate();
  check_binary_boolean(q);
  std::vector<int> common = q.h.edges.front().vars;
  for (const auto& e : q.h.edges) {
    std::vector<int> inter;
    std::set_intersection(common.begin(), common.end(), e.vars.begin(), e.vars.end(),
                          std::back_inserter(inter));
    common = std::move(inter);
  }
  if (common.empty()) throw std::invalid_argument("non-star input");

  int special = q.h.edges.front().id;
  for (const auto& e : q.h.edges) special = std::min(special, e.id);
  const Hyperedge* se = q.h.edge_by_id(special);

  StarSpec sp;
  sp.center_attrs = se->vars;
  sp.center_edges = {special};
  for (const auto& e : q.h.edges) {
    std::vector<int> iface;
    std::set_intersection(e.vars.begin(), e.vars.end(), se->vars.begin(),
                          se->vars.end(), std::back_inserter(iface));
    sp.leaf_iface[e.id] = iface;
  }
  sp.keep = {};
  sp.sink = a.answer_player;

  ProtocolResult res;
  long cap = default_round_cap(q, t);
  res.answer = run_star_phase(sp, q.relations, q, t, a, res.trace, cap);
  long n = static_cast<long>(q.max_relation_size());
  finish(res, q.semiring, std::max<long>(1, upper_estimate(t, 1, n, 0)));
  return res;
}

ProtocolResult star_faq(const FaqQuery& q, const Ghd& star, const Topology& t,
                        const Assignment& a) {
  q.validate();
  t.validate();
  std::string why;
  if (!ghd_valid(q.h, star, &why))
    throw std::invalid_argument("invalid decomposition: " + why);
  int root = star.root();
  for (int u = 0; u < star.node_count(); ++u)
    if (u != root && star.parent[u] != root)
      throw std::invalid_argument("non-star GHD");
  const auto& bag = star.chi[root];
  if (!std::includes(bag.begin(), bag.end(), q.free_vars.begin(), q.free_vars.end()))
    throw std::invalid_argument("free variables must lie in the center bag");

  StarSpec sp;
  sp.center_attrs = bag;
  sp.center_edges = star.lambda[root];
  for (const auto& [e, node] : star.cover) {
    if (node == root) {
      sp.root_valued.push_back(e);
      continue;
    }
    std::vector<int> iface;
    const auto& cb = star.chi[node];
    std::set_intersection(cb.begin(), cb.end(), bag.begin(), bag.end(),
                          std::back_inserter(iface));
    sp.leaf_iface[e] = iface;
  }
  sp.keep = q.free_vars;
  sp.sink = a.answer_player;

  ProtocolResult res;
  long cap = default_round_cap(q, t);
  res.answer = run_star_phase(sp, q.relations, q, t, a, res.trace, cap);
  long n = static_cast<long>(q.max_relation_size());
  finish(res, q.semiring, std::max<long>(1, upper_estimate(t, 1, n, 0)));
  return res;
}

ProtocolResult forest_bcq(const FaqQuery& q, const Topology& t, const Assignment& a) {
  check_binary_boolean(q);
  if (!is_acyclic(q.h)) throw std::invalid_argument("cyclic hypergraph");
  return elimination_protocol(q, t, a);
}

ProtocolResult general_bcq(const FaqQuery& q, const Topology& t, const Assignment& a) {
  check_binary_boolean(q);
  return elimination_protocol(q, t, a);
}

ProtocolResult faq_ss(const FaqQuery& q, const Topology& t, const Assignment& a) {
  q.validate();
  CoreForest cf = core_forest(q.h);
  if (!std::includes(cf.core_vertices.begin(), cf.core_vertices.end(),
                     q.free_vars.begin(), q.free_vars.end()))
    throw std::invalid_argument("free variables must lie in the core");
  return elimination_protocol(q, t, a);
}

// --- hash-partitioned star --------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

int ConsistentHashFamily::shard(const Relation& r, const Tuple& t, int edge_id) const {
  const auto& iface = interface_attrs.at(edge_id);
  auto pos = attr_positions(r.attrs, iface);
  std::set<Tuple> projections;
  for (const auto& [tup, v] : r.entries) projections.insert(pick(tup, pos));
  Tuple key = pick(t, pos);
  auto it = projections.find(key);
  long rank = it == projections.end()
                  ? static_cast<long>(projections.size())
                  : std::distance(projections.begin(), it);
  std::uint64_t offset = splitmix64(seed ^ (0x51edULL * (edge_id + 1)));
  return static_cast<int>((rank + static_cast<long>(offset % num_players)) %
                          num_players);
}

ConsistentHashFamily consistent_hash_family(const Hypergraph& h, const Ghd& star,
                                            int num_players, std::uint64_t seed) {
  if (num_players <= 0) throw std::invalid_argument("need at least one player");
  ConsistentHashFamily f;
  f.seed = seed;
  f.num_players = num_players;
  int root = star.root();
  for (const auto& e : h.edges) {
    auto it = star.cover.find(e.id);
    if (it == star.cover.end()) throw std::invalid_argument("uncovered edge");
    int node = it->second;
    if (node == root) {
      f.interface_attrs[e.id] = e.vars;  // root-bag relations: any hash is fine
    } else {
      int p = star.parent[node];
      std::vector<int> iface;
      std::set_intersection(star.chi[node].begin(), star.chi[node].end(),
                            star.chi[p].begin(), star.chi[p].end(),
                            std::back_inserter(iface));
      f.interface_attrs[e.id] = iface;
    }
  }
  return f;
}

bool hash_family_consistent(const ConsistentHashFamily& f, const FaqQuery& q) {
  for (const auto& [e, rel] : q.relations) {
    auto it = f.interface_attrs.find(e);
    if (it == f.interface_attrs.end()) return false;
    for (int a : it->second)
      if (rel.attr_pos(a) < 0) return false;
    auto pos = attr_positions(rel.attrs, it->second);
    std::map<Tuple, int> seen;
    for (const auto& [tup, v] : rel.entries) {
      int s = f.shard(rel, tup, e);
      if (s < 0 || s >= f.num_players) return false;
      Tuple key = pick(tup, pos);
      auto [sit, fresh] = seen.emplace(key, s);
      if (!fresh && sit->second != s) return false;
    }
  }
  return true;
}

ProtocolResult split_star_faq(const FaqQuery& q, const Topology& t,
                              const ConsistentHashFamily& hash) {
  q.validate();
  t.validate();
  if (!hash_family_consistent(hash, q))
    throw std::invalid_argument("hash family inconsistent with the query");
  if (static_cast<int>(t.terminals.size()) != hash.num_players)
    throw std::invalid_argument("one shard per terminal required");
  const Semiring& s = q.semiring;

  Ghd star = build_gyo_ghd(q.h);
  int root = star.root();
  for (int u = 0; u < star.node_count(); ++u)
    if (u != root && star.parent[u] != root)
      throw std::invalid_argument("non-star input");
  const auto& bag = star.chi[root];
  if (!std::includes(bag.begin(), bag.end(), q.free_vars.begin(), q.free_vars.end()))
    throw std::invalid_argument("free variables must lie in the center bag");

  // the conceptual input placement: shard index -> terminal player
  std::map<int, std::map<int, Relation>> shards;  // edge -> player -> shard
  for (const auto& [e, rel] : q.relations) {
    for (const auto& [tup, v] : rel.entries) {
      int p = t.terminals[hash.shard(rel, tup, e)];
      Relation& sh = shards[e][p];
      if (sh.attrs.empty()) {
        sh.attrs = rel.attrs;
        sh.domain_sizes = rel.domain_sizes;
      }
      sh.entries.push_back({tup, v});
    }
  }
  for (auto& [e, per_player] : shards)
    for (auto& [p, sh] : per_player) sh.normalize(s);

  long cap = default_round_cap(q, t);
  ProtocolResult res;
  int sink = t.terminals.front();

  // every holder of a center-relation shard announces its keys
  const std::vector<int>& center_edges = star.lambda[root];
  std::map<int, Relation> center_union;  // edge -> union of shard keys
  for (int e : center_edges) {
    Relation u = keys_only(q.relations.at(e));
    center_union[e] = u;  // identical at all players after the broadcasts below
    for (const auto& [p, sh] : shards[e]) {
      std::vector<std::uint8_t> payload = encode_relation(sh, Semiring::boolean(),
                                                          false);
      long bits = relation_bits(sh, Semiring::boolean(), false);
      SteinerPacking packing = packing_for(t, bits);
      std::map<int, std::vector<std::uint8_t>> received;
      SimulationTrace tr = broadcast_phase(t, p, payload, bits,
                                           {packing.trees.front()}, received, cap);
      res.trace.append_shifted(tr, res.trace.rounds);
    }
  }

  Relation cand;
  cand.entries.push_back({{}, 1});
  for (int e : center_edges) cand = join(cand, center_union[e], Semiring::boolean());
  cand = project_aggregate(cand, bag, Semiring::boolean());
  std::size_t m = cand.size();

  // factor vectors plus contribution counters
  int expected = 0;
  std::vector<std::vector<Value>> local(t.n(), std::vector<Value>(m, s.one));
  std::vector<std::vector<Value>> counts(t.n(), std::vector<Value>(m, 0));
  for (const auto& [e, node] : star.cover) {
    std::vector<int> iface;
    const auto& cb = star.chi[node];
    std::set_intersection(cb.begin(), cb.end(), bag.begin(), bag.end(),
                          std::back_inserter(iface));
    if (node == root) iface = q.h.edge_by_id(e)->vars;
    auto pos = attr_positions(bag, iface);
    const Relation& rel = q.relations.at(e);
    ++expected;
    for (std::size_t i = 0; i < m; ++i) {
      Tuple key = pick(cand.entries[i].first, pos);
      // consistency pins every matching tuple of this relation to one player
      Tuple probe(rel.arity(), 0);
      auto ppos = attr_positions(rel.attrs, iface);
      for (std::size_t j = 0; j < ppos.size(); ++j) probe[ppos[j]] = key[j];
      int holder = t.terminals[hash.shard(rel, probe, e)];
      auto sit = shards[e].find(holder);
      Value f = s.zero;
      if (sit != shards[e].end()) {
        auto idx = aggregate_index(sit->second, iface, s);
        auto fit = idx.find(key);
        if (fit != idx.end()) f = fit->second;
      }
      local[holder][i] = s.mul(local[holder][i], f);
      counts[holder][i] += 1;
    }
  }

  std::vector<Value> values, tally;
  if (m > 0) {
    SteinerPacking cpk = packing_for(t, static_cast<long>(m) * s.encode_bits);
    SimulationTrace tr1 = convergecast_phase(
        t, sink, cpk.trees, local, s.one, s.encode_bits,
        [&s](Value x, Value y) { return s.mul(x, y); }, values, cap);
    res.trace.append_shifted(tr1, res.trace.rounds);
    int cbits = bits_for_domain(q.h.k() + 2);
    SteinerPacking tpk = packing_for(t, static_cast<long>(m) * cbits);
    SimulationTrace tr2 = convergecast_phase(
        t, sink, tpk.trees, counts, 0, cbits,
        [](Value x, Value y) { return x + y; }, tally, cap);
    res.trace.append_shifted(tr2, res.trace.rounds);
  }

  Relation ans = schema_for(q.h, q.free_vars);
  auto keep_pos = attr_positions(bag, q.free_vars);
  for (std::size_t i = 0; i < m; ++i) {
    if (tally[i] != static_cast<Value>(expected)) continue;  // incomplete tuple
    if (s.is_zero(values[i])) continue;
    ans.entries.push_back({pick(cand.entries[i].first, keep_pos), values[i]});
  }
  ans.normalize(s);
  res.answer = std::move(ans);
  long n = static_cast<long>(q.max_relation_size());
  finish(res, s, std::max<long>(1, upper_estimate(t, 1, n, 0)));
  return res;
}

}  // namespace faqnet
