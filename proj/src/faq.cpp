#include "faq.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace faqnet {

void FaqQuery::validate() const {
  h.validate();
  for (const auto& e : h.edges) {
    auto it = relations.find(e.id);
    if (it == relations.end())
      throw std::invalid_argument("edge e" + std::to_string(e.id) + " has no relation");
    std::vector<int> attrs = it->second.attrs;
    std::sort(attrs.begin(), attrs.end());
    if (attrs != e.vars)
      throw std::invalid_argument("relation attrs differ from edge vars for e" +
                                  std::to_string(e.id));
    for (std::size_t i = 0; i < it->second.attrs.size(); ++i)
      if (it->second.domain_sizes[i] != h.domain.at(it->second.attrs[i]))
        throw std::invalid_argument("relation domain differs from hypergraph domain");
  }
  for (int v : free_vars)
    if (!h.domain.count(v)) throw std::invalid_argument("free variable not in query");
}

std::size_t FaqQuery::max_relation_size() const {
  std::size_t n = 0;
  for (const auto& [e, r] : relations) n = std::max(n, r.size());
  return n;
}

int FaqQuery::max_domain() const {
  int d = 1;
  for (const auto& [v, dom] : h.domain) d = std::max(d, dom);
  return d;
}

Value scalar_answer(const Relation& r, const Semiring& s) {
  if (r.entries.empty()) return s.zero;
  if (r.entries.size() == 1 && r.attrs.empty()) return r.entries[0].second;
  throw std::invalid_argument("relation is not a scalar");
}

bool relations_equal(const Relation& a, const Relation& b) {
  if (a.attrs != b.attrs) return false;
  return a.entries == b.entries;
}

Relation eval_faq_bruteforce(const FaqQuery& q, std::uint64_t cap) {
  q.validate();
  const Semiring& s = q.semiring;
  std::vector<int> vars = q.h.vertices();
  std::uint64_t space = 1;
  for (int v : vars) {
    space *= static_cast<std::uint64_t>(q.h.domain.at(v));
    if (space > cap) throw std::runtime_error("bruteforce cap exceeded");
  }
  // Fast per-edge lookup.
  std::map<int, std::map<Tuple, Value>> lut;
  for (const auto& e : q.h.edges) {
    const Relation& r = q.relations.at(e.id);
    for (const auto& [t, v] : r.entries)
      lut[e.id][project_tuple(r, t, e.vars)] = v;
  }

  Relation out;
  out.attrs = q.free_vars;
  for (int v : q.free_vars) out.domain_sizes.push_back(q.h.domain.at(v));
  std::map<Tuple, Value> acc;

  Tuple assign(vars.size(), 0);
  std::map<int, int> pos;
  for (std::size_t i = 0; i < vars.size(); ++i) pos[vars[i]] = static_cast<int>(i);

  for (std::uint64_t it = 0; it < space; ++it) {
    Value prod = s.one;
    bool dead = false;
    for (const auto& e : q.h.edges) {
      Tuple key;
      key.reserve(e.vars.size());
      for (int v : e.vars) key.push_back(assign[pos[v]]);
      auto fit = lut[e.id].find(key);
      if (fit == lut[e.id].end()) {
        dead = true;
        break;
      }
      prod = s.mul(prod, fit->second);
    }
    if (!dead && !s.is_zero(prod)) {
      Tuple key;
      for (int v : q.free_vars) key.push_back(assign[pos[v]]);
      auto [ait, fresh] = acc.emplace(key, prod);
      if (!fresh) ait->second = s.add(ait->second, prod);
    }
    // Odometer increment.
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (++assign[i] < q.h.domain.at(vars[i])) break;
      assign[i] = 0;
    }
    if (vars.empty()) break;
  }
  if (vars.empty()) {
    // Empty product space: single empty assignment with the empty product.
    Value prod = s.one;
    for (const auto& e : q.h.edges) (void)e;  // no edges possible without vars
    acc[{}] = prod;
  }
  for (auto& [t, v] : acc)
    if (!s.is_zero(v)) out.entries.emplace_back(t, v);
  out.normalize(s);
  return out;
}

Relation eval_faq_centralized(const FaqQuery& q, const Ghd& ghd) {
  q.validate();
  std::string why;
  if (!ghd_valid(q.h, ghd, &why)) throw std::invalid_argument("invalid GHD: " + why);
  const Semiring& s = q.semiring;
  std::set<int> free_set(q.free_vars.begin(), q.free_vars.end());
  int root = ghd.root();
  {
    const auto& bag = ghd.chi[root];
    for (int v : q.free_vars)
      if (!std::binary_search(bag.begin(), bag.end(), v))
        throw std::invalid_argument("free variable outside the root bag");
  }

  auto children = ghd.children();
  // Post-order traversal.
  std::vector<int> order, stack{root};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    order.push_back(u);
    for (int c : children[u]) stack.push_back(c);
  }
  std::reverse(order.begin(), order.end());

  std::vector<Relation> table(ghd.node_count());
  std::vector<bool> has(ghd.node_count(), false);
  auto absorb = [&](int node, const Relation& r) {
    if (!has[node]) {
      table[node] = r;
      has[node] = true;
    } else {
      table[node] = join(table[node], r, s);
    }
  };

  for (const auto& [eid, node] : ghd.cover) absorb(node, q.relations.at(eid));

  for (int u : order) {
    if (u == root) break;
    int p = ghd.parent[u];
    if (!has[u]) continue;  // bag with no relation and no surviving messages
    // Push down: keep only interface and free variables.
    std::vector<int> keep;
    for (int v : table[u].attrs) {
      bool in_parent = std::binary_search(ghd.chi[p].begin(), ghd.chi[p].end(), v);
      if (in_parent || free_set.count(v)) keep.push_back(v);
    }
    absorb(p, project_aggregate(table[u], keep, s));
  }
  if (!has[root]) {
    // No relations at all: the empty product, one per full assignment of the
    // (nonexistent) bound variables.
    Relation r;
    r.entries.emplace_back(Tuple{}, s.one);
    return project_aggregate(r, {}, s);
  }
  Relation out = project_aggregate(table[root], q.free_vars, s);
  out.normalize(s);
  return out;
}

Relation eval_faq(const FaqQuery& q) {
  return eval_faq_centralized(q, build_gyo_ghd(q.h, 0));
}

}  // namespace faqnet
