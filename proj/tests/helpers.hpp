#pragma once

// Shared random-instance generators for the test binaries. Everything is
// driven by a caller-owned mt19937_64 so corpora are reproducible by seed.

#include <algorithm>
#include <random>
#include <set>

#include "bounds.hpp"
#include "protocols.hpp"

namespace testgen {

using namespace faqnet;
using Rng = std::mt19937_64;

inline int pick_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline Relation random_relation(const Hypergraph& h, const Hyperedge& e,
                                const Semiring& s, Rng& rng, int max_n) {
  Relation r;
  r.attrs = e.vars;
  for (int v : e.vars) r.domain_sizes.push_back(h.domain.at(v));
  int n = pick_int(rng, 0, max_n);
  std::set<Tuple> seen;
  for (int i = 0; i < n; ++i) {
    Tuple t;
    for (int d : r.domain_sizes) t.push_back(pick_int(rng, 0, d - 1));
    if (!seen.insert(t).second) continue;
    Value v = s.one;
    if (s.id == SemiringId::Counting) v = 1 + rng() % 3;
    if (s.id == SemiringId::MinPlus) v = rng() % 5;
    r.entries.push_back({std::move(t), v});
  }
  r.normalize(s);
  return r;
}

inline FaqQuery make_query(Hypergraph h, const Semiring& s, Rng& rng, int max_n,
                           std::vector<int> free_vars = {}) {
  FaqQuery q;
  q.h = std::move(h);
  q.semiring = s;
  q.free_vars = std::move(free_vars);
  std::sort(q.free_vars.begin(), q.free_vars.end());
  for (const auto& e : q.h.edges)
    q.relations[e.id] = random_relation(q.h, e, s, rng, max_n);
  return q;
}

// Binary star: every edge contains variable 0.
inline Hypergraph random_star(Rng& rng) {
  Hypergraph h;
  int leaves = pick_int(rng, 2, 5);
  h.domain[0] = pick_int(rng, 2, 4);
  for (int i = 1; i <= leaves; ++i) {
    h.domain[i] = pick_int(rng, 2, 4);
    h.edges.push_back({i, {0, i}});
  }
  return h;
}

// Binary forest: edge i joins vertex i to an earlier vertex (or starts a new
// component).
inline Hypergraph random_forest(Rng& rng) {
  Hypergraph h;
  int verts = pick_int(rng, 3, 7);
  for (int v = 0; v < verts; ++v) h.domain[v] = pick_int(rng, 2, 4);
  int id = 1;
  for (int v = 1; v < verts; ++v) {
    if (v >= 2 && rng() % 5 == 0) continue;  // leave v isolated-rooted
    h.edges.push_back({id++, {pick_int(rng, 0, v - 1), v}});
  }
  if (h.edges.empty()) h.edges.push_back({1, {0, 1}});
  // drop vertices no surviving edge touches
  std::set<int> used;
  for (const auto& e : h.edges) used.insert(e.vars.begin(), e.vars.end());
  for (auto it = h.domain.begin(); it != h.domain.end();)
    it = used.count(it->first) ? std::next(it) : h.domain.erase(it);
  return h;
}

// Binary graph, cycles allowed, <=6 vertices.
inline Hypergraph random_binary_graph(Rng& rng) {
  Hypergraph h;
  int verts = pick_int(rng, 3, 6);
  for (int v = 0; v < verts; ++v) h.domain[v] = pick_int(rng, 2, 4);
  std::vector<std::pair<int, int>> all;
  for (int a = 0; a < verts; ++a)
    for (int b = a + 1; b < verts; ++b) all.emplace_back(a, b);
  std::shuffle(all.begin(), all.end(), rng);
  int want = pick_int(rng, verts - 1, std::min<int>(verts + 2, all.size()));
  int id = 1;
  // spanning-ish first so no vertex is left uncovered
  std::set<int> used;
  for (auto [a, b] : all) {
    bool fresh = !used.count(a) || !used.count(b);
    if (!fresh && id > want) continue;
    h.edges.push_back({id++, {a, b}});
    used.insert(a);
    used.insert(b);
    if (static_cast<int>(used.size()) == verts && id > want) break;
  }
  return h;
}

// Alpha-acyclic by construction: every new edge shares a subset of one
// existing edge's variables and adds fresh ones.
inline Hypergraph random_acyclic(Rng& rng, int max_vars = 8, int max_arity = 3) {
  Hypergraph h;
  int next_var = 0;
  auto fresh = [&]() {
    h.domain[next_var] = pick_int(rng, 2, 4);
    return next_var++;
  };
  Hyperedge first;
  first.id = 1;
  int a0 = pick_int(rng, 1, max_arity);
  for (int i = 0; i < a0; ++i) first.vars.push_back(fresh());
  h.edges.push_back(first);
  int edges = pick_int(rng, 1, 6);
  for (int id = 2; id <= edges + 1 && next_var < max_vars; ++id) {
    const auto& base = h.edges[rng() % h.edges.size()];
    Hyperedge e;
    e.id = id;
    int share = pick_int(rng, 1, static_cast<int>(base.vars.size()));
    std::vector<int> bv = base.vars;
    std::shuffle(bv.begin(), bv.end(), rng);
    e.vars.assign(bv.begin(), bv.begin() + share);
    int add = pick_int(rng, 0, max_arity - share);
    for (int i = 0; i < add && next_var < max_vars; ++i)
      e.vars.push_back(fresh());
    std::sort(e.vars.begin(), e.vars.end());
    e.vars.erase(std::unique(e.vars.begin(), e.vars.end()), e.vars.end());
    h.edges.push_back(e);
  }
  return h;
}

// Mixed-arity hypergraph, possibly cyclic.
inline Hypergraph random_any(Rng& rng) {
  if (rng() % 2) return random_acyclic(rng);
  return random_binary_graph(rng);
}

// Connected random topology; all or a random subset of nodes are terminals.
inline Topology random_topology(Rng& rng, int max_nodes = 8,
                                int min_terminals = 1) {
  Topology t;
  int n = pick_int(rng, 2, max_nodes);
  for (int i = 0; i < n; ++i) t.names.push_back("P" + std::to_string(i + 1));
  for (int v = 1; v < n; ++v)
    t.edges.emplace_back(pick_int(rng, 0, v - 1), v);
  std::vector<std::pair<int, int>> extra;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (std::find(t.edges.begin(), t.edges.end(), std::make_pair(a, b)) ==
          t.edges.end())
        extra.emplace_back(a, b);
  std::shuffle(extra.begin(), extra.end(), rng);
  int more = pick_int(rng, 0, static_cast<int>(extra.size()) / 2);
  t.edges.insert(t.edges.end(), extra.begin(), extra.begin() + more);
  std::sort(t.edges.begin(), t.edges.end());
  for (int v = 0; v < n; ++v)
    if (rng() % 3) t.terminals.push_back(v);
  while (static_cast<int>(t.terminals.size()) < std::max(min_terminals, 1)) {
    int v = pick_int(rng, 0, n - 1);
    if (!std::count(t.terminals.begin(), t.terminals.end(), v))
      t.terminals.push_back(v);
  }
  std::sort(t.terminals.begin(), t.terminals.end());
  t.capacity_bits = pick_int(rng, 1, 8);
  return t;
}

inline Assignment random_assignment(const FaqQuery& q, const Topology& t,
                                    Rng& rng) {
  Assignment a;
  for (const auto& e : q.h.edges)
    a.owner[e.id] = t.terminals[rng() % t.terminals.size()];
  a.answer_player = t.terminals[rng() % t.terminals.size()];
  return a;
}

inline const Semiring& random_semiring(Rng& rng) {
  switch (rng() % 4) {
    case 0: return Semiring::boolean();
    case 1: return Semiring::counting();
    case 2: return Semiring::f2();
    default: return Semiring::min_plus();
  }
}

struct OracleRun {
  bool ok = false;
  std::string why;
  ProtocolResult result;
  FaqQuery query;
  Topology topology;
  Assignment assignment;
};

// Builds an instance shaped for the protocol, runs it, compares against the
// brute-force evaluator.
inline OracleRun oracle_run(const std::string& protocol, std::uint64_t seed) {
  Rng rng(seed * 0x9e3779b97f4a7c15ull + 1);
  OracleRun out;
  bool boolean_only = protocol == "star_bcq" || protocol == "forest_bcq" ||
                      protocol == "general_bcq";
  const Semiring& s =
      boolean_only ? Semiring::boolean() : random_semiring(rng);

  Hypergraph h;
  if (protocol == "star_bcq" || protocol == "star_faq" ||
      protocol == "split_star_faq") {
    h = random_star(rng);
  } else if (protocol == "forest_bcq") {
    h = random_forest(rng);
  } else if (protocol == "general_bcq") {
    h = random_binary_graph(rng);
  } else {
    h = random_any(rng);
  }

  std::vector<int> free_vars;
  if (!boolean_only && rng() % 2) {
    // free variables must sit in the core bag for every protocol here
    CoreForest cf = core_forest(h);
    for (int v : cf.core_vertices)
      if (rng() % 2) free_vars.push_back(v);
  }
  out.query = make_query(std::move(h), s, rng, 8, free_vars);
  out.topology = random_topology(rng, 8, 2);
  out.assignment = random_assignment(out.query, out.topology, rng);

  try {
    if (protocol == "trivial") {
      out.result = trivial_protocol(out.query, out.topology, out.assignment);
    } else if (protocol == "star_bcq") {
      out.result = star_bcq(out.query, out.topology, out.assignment);
    } else if (protocol == "forest_bcq") {
      out.result = forest_bcq(out.query, out.topology, out.assignment);
    } else if (protocol == "general_bcq") {
      out.result = general_bcq(out.query, out.topology, out.assignment);
    } else if (protocol == "star_faq") {
      out.result = star_faq(out.query, build_gyo_ghd(out.query.h),
                            out.topology, out.assignment);
    } else if (protocol == "faq_ss") {
      out.result = faq_ss(out.query, out.topology, out.assignment);
    } else if (protocol == "split_star_faq") {
      auto hash = consistent_hash_family(
          out.query.h, build_gyo_ghd(out.query.h),
          static_cast<int>(out.topology.terminals.size()), rng());
      out.result = split_star_faq(out.query, out.topology, hash);
    } else {
      out.why = "unknown protocol";
      return out;
    }
  } catch (const std::exception& e) {
    out.why = std::string("protocol threw: ") + e.what();
    return out;
  }
  Relation expect = eval_faq_bruteforce(out.query);
  if (!relations_equal(out.result.answer, expect)) {
    out.why = "answer differs from brute force";
    return out;
  }
  if (!verify_trace(out.result.trace, out.topology)) {
    out.why = "trace failed verification";
    return out;
  }
  out.ok = true;
  return out;
}

}  // namespace testgen
