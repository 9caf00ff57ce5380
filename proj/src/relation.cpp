#include "relation.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace faqnet {

int Relation::attr_pos(int var) const {
  for (std::size_t i = 0; i < attrs.size(); ++i)
    if (attrs[i] == var) return static_cast<int>(i);
  return -1;
}

int Relation::domain_of(int var) const {
  int p = attr_pos(var);
  if (p < 0) throw std::invalid_argument("attribute not in relation");
  return domain_sizes[p];
}

void Relation::normalize(const Semiring& s) {
  for (auto& [t, v] : entries) {
    if (t.size() != attrs.size()) throw std::invalid_argument("tuple arity mismatch");
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] < 0 || t[i] >= domain_sizes[i])
        throw std::invalid_argument("tuple value out of domain");
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<Tuple, Value>> out;
  for (auto& e : entries) {
    if (!out.empty() && out.back().first == e.first)
      out.back().second = s.add(out.back().second, e.second);
    else
      out.push_back(e);
  }
  std::erase_if(out, [&](const auto& e) { return s.is_zero(e.second); });
  entries = std::move(out);
}

Tuple project_tuple(const Relation& r, const Tuple& t, const std::vector<int>& onto) {
  Tuple out;
  out.reserve(onto.size());
  for (int var : onto) {
    int p = r.attr_pos(var);
    if (p < 0) throw std::invalid_argument("projection attribute missing");
    out.push_back(t[p]);
  }
  return out;
}

std::map<Tuple, Value> aggregate_index(const Relation& r, const std::vector<int>& onto,
                                       const Semiring& s) {
  std::map<Tuple, Value> idx;
  for (const auto& [t, v] : r.entries) {
    Tuple key = project_tuple(r, t, onto);
    auto [it, fresh] = idx.emplace(key, v);
    if (!fresh) it->second = s.add(it->second, v);
  }
  return idx;
}

namespace {
void check_shared_domains(const Relation& a, const Relation& b) {
  for (std::size_t i = 0; i < a.attrs.size(); ++i) {
    int p = b.attr_pos(a.attrs[i]);
    if (p >= 0 && b.domain_sizes[p] != a.domain_sizes[i])
      throw std::invalid_argument("domain size mismatch on shared attribute");
  }
}

std::vector<int> shared_attrs(const Relation& a, const Relation& b) {
  std::vector<int> out;
  for (int v : a.attrs)
    if (b.attr_pos(v) >= 0) out.push_back(v);
  return out;
}
}  // namespace

Relation join(const Relation& a, const Relation& b, const Semiring& s) {
  check_shared_domains(a, b);
  Relation out;
  out.attrs = a.attrs;
  out.domain_sizes = a.domain_sizes;
  std::vector<int> b_extra;  // b attrs not in a
  for (std::size_t i = 0; i < b.attrs.size(); ++i)
    if (a.attr_pos(b.attrs[i]) < 0) {
      out.attrs.push_back(b.attrs[i]);
      out.domain_sizes.push_back(b.domain_sizes[i]);
      b_extra.push_back(b.attrs[i]);
    }
  std::vector<int> shared = shared_attrs(a, b);

  // Bucket b by its shared projection.
  std::map<Tuple, std::vector<const std::pair<Tuple, Value>*>> buckets;
  for (const auto& e : b.entries)
    buckets[project_tuple(b, e.first, shared)].push_back(&e);

  for (const auto& [ta, va] : a.entries) {
    auto it = buckets.find(project_tuple(a, ta, shared));
    if (it == buckets.end()) continue;
    for (const auto* eb : it->second) {
      Tuple t = ta;
      for (int var : b_extra) t.push_back(eb->first[b.attr_pos(var)]);
      out.entries.emplace_back(std::move(t), s.mul(va, eb->second));
    }
  }
  out.normalize(s);
  return out;
}

Relation semijoin(const Relation& a, const Relation& b) {
  check_shared_domains(a, b);
  std::vector<int> shared = shared_attrs(a, b);
  std::set<Tuple> keys;
  for (const auto& e : b.entries) keys.insert(project_tuple(b, e.first, shared));
  Relation out = a;
  std::erase_if(out.entries, [&](const auto& e) {
    return !keys.count(project_tuple(a, e.first, shared));
  });
  return out;
}

Relation project_aggregate(const Relation& r, const std::vector<int>& keep,
                           const Semiring& s) {
  Relation out;
  out.attrs = keep;
  for (int var : keep) out.domain_sizes.push_back(r.domain_of(var));
  for (auto& [key, v] : aggregate_index(r, keep, s))
    out.entries.emplace_back(key, v);
  std::erase_if(out.entries, [&](const auto& e) { return s.is_zero(e.second); });
  return out;
}

}  // namespace faqnet
