#include "protocols_detail.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <set>
#include <sstream>

namespace faqnet::detail {

void BitWriter::put(std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) {
    if (bits % 8 == 0) bytes.push_back(0);
    if ((v >> i) & 1) bytes.back() |= static_cast<std::uint8_t>(1u << (bits % 8));
    ++bits;
  }
}

std::uint64_t BitReader::get(int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i, ++pos) {
    if ((*bytes)[pos / 8] >> (pos % 8) & 1) v |= std::uint64_t{1} << i;
  }
  return v;
}

int bits_for_domain(int d) {
  int b = 1;
  while ((1 << b) < d) ++b;
  return b;
}

int tuple_bits(const Relation& schema) {
  int b = 0;
  for (int d : schema.domain_sizes) b += bits_for_domain(d);
  return b;
}

long relation_bits(const Relation& r, const Semiring& s, bool with_values) {
  return 32 + static_cast<long>(r.size()) *
                  (tuple_bits(r) + (with_values ? s.encode_bits : 0));
}

std::vector<std::uint8_t> encode_relation(const Relation& r, const Semiring& s,
                                          bool with_values) {
  BitWriter w;
  w.put(r.size(), 32);
  for (const auto& [t, v] : r.entries) {
    for (int i = 0; i < r.arity(); ++i) w.put(t[i], bits_for_domain(r.domain_sizes[i]));
    if (with_values) w.put(v, s.encode_bits);
  }
  return w.bytes;
}

Relation decode_relation(const std::vector<std::uint8_t>& bytes, const Relation& schema,
                         const Semiring& s, bool with_values) {
  BitReader rd{&bytes};
  Relation out;
  out.attrs = schema.attrs;
  out.domain_sizes = schema.domain_sizes;
  std::uint64_t count = rd.get(32);
  for (std::uint64_t i = 0; i < count; ++i) {
    Tuple t(schema.arity());
    for (int j = 0; j < schema.arity(); ++j)
      t[j] = static_cast<int>(rd.get(bits_for_domain(schema.domain_sizes[j])));
    Value v = with_values ? rd.get(s.encode_bits) : s.one;
    out.entries.emplace_back(std::move(t), v);
  }
  out.normalize(s);
  return out;
}

std::string digest(const Relation& r, const Semiring& s) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t x) {
    h ^= x;
    h *= 1099511628211ull;
  };
  mix(r.size());
  for (const auto& [t, v] : r.entries) {
    for (int x : t) mix(static_cast<std::uint64_t>(x) + 0x9e3779b9u);
    mix(v);
  }
  std::ostringstream os;
  os << std::hex << h << "/" << s.name();
  return os.str();
}

namespace {

struct Chunk {
  int stream = 0;
  std::vector<std::uint8_t> bytes;
  int bits = 0;
};

// Forwards fixed routes hop by hop; one queued chunk per neighbor per round.
class RouterProgram : public NodeProgram {
 public:
  RouterProgram(int self, std::map<int, int> next_hop,
                std::map<int, BitWriter>* delivered)
      : self_(self), next_hop_(std::move(next_hop)), delivered_(delivered) {}

  void seed(const Stream& s, int capacity_bits) {
    for (long off = 0; off < s.bits; off += capacity_bits) {
      int len = static_cast<int>(std::min<long>(capacity_bits, s.bits - off));
      BitReader rd{&s.payload};
      rd.pos = off;
      BitWriter w;
      for (int i = 0; i < len; ++i) w.put(rd.get(1), 1);
      dispatch({s.id, std::move(w.bytes), len});
    }
  }

  bool step(long, const Inbox& inbox, Outbox& outbox) override {
    for (const auto& [from, msg] : inbox)
      dispatch({msg.tag, msg.payload, msg.bit_len});
    bool idle = true;
    for (auto& [nbr, q] : queues_) {
      if (q.empty()) continue;
      Chunk c = std::move(q.front());
      q.pop_front();
      outbox[nbr] = Message{std::move(c.bytes), c.bits, c.stream};
      idle = idle && q.empty();
    }
    return idle;
  }

 private:
  void dispatch(Chunk c) {
    auto it = next_hop_.find(c.stream);
    if (it == next_hop_.end() || it->second == self_) {
      BitWriter& w = (*delivered_)[c.stream];
      BitReader rd{&c.bytes};
      for (int i = 0; i < c.bits; ++i) w.put(rd.get(1), 1);
      return;
    }
    queues_[it->second].push_back(std::move(c));
  }

  int self_;
  std::map<int, int> next_hop_;  // stream id -> next player (self = sink)
  std::map<int, std::deque<Chunk>> queues_;
  std::map<int, BitWriter>* delivered_;
};

}  // namespace

SimulationTrace route_phase(const Topology& t, const std::vector<Stream>& streams,
                            std::map<int, std::vector<std::uint8_t>>& delivered,
                            long round_cap) {
  std::map<int, BitWriter> sunk;
  std::vector<std::map<int, int>> hops(t.n());  // per player: stream -> next hop
  for (const Stream& s : streams) {
    std::vector<int> path = shortest_path(t, s.src, s.dst);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) hops[path[i]][s.id] = path[i + 1];
    hops[s.dst][s.id] = s.dst;
  }
  std::vector<std::unique_ptr<NodeProgram>> nodes;
  std::vector<RouterProgram*> routers;
  for (int u = 0; u < t.n(); ++u) {
    auto p = std::make_unique<RouterProgram>(u, hops[u], &sunk);
    routers.push_back(p.get());
    nodes.push_back(std::move(p));
  }
  for (const Stream& s : streams) {
    if (s.bits == 0) {
      sunk[s.id];  // delivered, empty
      continue;
    }
    if (s.src == s.dst) {
      BitWriter& w = sunk[s.id];
      BitReader rd{&s.payload};
      for (long i = 0; i < s.bits; ++i) w.put(rd.get(1), 1);
      continue;
    }
    routers[s.src]->seed(s, t.capacity_bits);
  }
  RunOptions opt;
  opt.round_cap = round_cap;
  SimulationTrace tr = run_simulation(t, nodes, opt);
  delivered.clear();
  for (auto& [id, w] : sunk) delivered[id] = std::move(w.bytes);
  return tr;
}

std::vector<std::vector<int>> tree_children(const Topology& t,
                                            const std::vector<int>& tree_edges,
                                            int root) {
  std::vector<std::vector<int>> adj(t.n());
  for (int ei : tree_edges) {
    auto [a, b] = t.edges[ei];
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<std::vector<int>> children(t.n());
  std::vector<int> seen(t.n(), 0), queue{root};
  seen[root] = 1;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    int u = queue[i];
    std::sort(adj[u].begin(), adj[u].end());
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        children[u].push_back(v);
        queue.push_back(v);
      }
  }
  return children;
}

namespace {

std::vector<int> tree_nodes(const Topology& t, const std::vector<int>& tree_edges) {
  std::set<int> s;
  for (int ei : tree_edges) {
    s.insert(t.edges[ei].first);
    s.insert(t.edges[ei].second);
  }
  return {s.begin(), s.end()};
}

// Floods chunks down one or more rooted trees; each (tree, child) pair is a
// private FIFO because the trees are edge-disjoint.
class FloodProgram : public NodeProgram {
 public:
  struct TreeRole {
    int tree = -1;
    std::vector<int> children;
    int parent = -1;
  };

  FloodProgram(int self, std::map<int, std::vector<std::uint8_t>>* store)
      : self_(self), store_(store) {}

  std::map<int, TreeRole> roles;  // tree id -> role
  std::map<int, int> tree_of_parent;  // neighbor -> tree id (for receives)

  void seed_chunk(int tree, std::vector<std::uint8_t> bytes, int bits) {
    absorb(tree, bytes, bits);
    for (int c : roles[tree].children) queues_[c].push_back({tree, bytes, bits});
  }

  bool step(long, const Inbox& inbox, Outbox& outbox) override {
    for (const auto& [from, msg] : inbox) {
      int tree = msg.tag;
      absorb(tree, msg.payload, msg.bit_len);
      for (int c : roles[tree].children)
        queues_[c].push_back({tree, msg.payload, msg.bit_len});
    }
    bool idle = true;
    for (auto& [nbr, q] : queues_) {
      if (q.empty()) continue;
      Chunk c = std::move(q.front());
      q.pop_front();
      outbox[nbr] = Message{std::move(c.bytes), c.bits, c.stream};
      idle = idle && q.empty();
    }
    return idle;
  }

  // ordered chunks per tree, appended into the shared store keyed by tree
  const std::map<int, std::vector<std::pair<std::vector<std::uint8_t>, int>>>&
  chunks() const {
    return chunks_;
  }

 private:
  void absorb(int tree, const std::vector<std::uint8_t>& bytes, int bits) {
    chunks_[tree].emplace_back(bytes, bits);
    (void)store_;
  }

  int self_;
  std::map<int, std::vector<std::uint8_t>>* store_;
  std::map<int, std::deque<Chunk>> queues_;
  std::map<int, std::vector<std::pair<std::vector<std::uint8_t>, int>>> chunks_;
};

}  // namespace

SimulationTrace broadcast_phase(const Topology& t, int source,
                                const std::vector<std::uint8_t>& payload, long bits,
                                const std::vector<std::vector<int>>& trees,
                                std::map<int, std::vector<std::uint8_t>>& received,
                                long round_cap) {
  received.clear();
  int T = static_cast<int>(trees.size());
  if (T == 0) throw std::invalid_argument("broadcast needs at least one tree");
  int B = t.capacity_bits;
  long num_chunks = (bits + B - 1) / B;

  std::vector<std::unique_ptr<NodeProgram>> nodes;
  std::vector<FloodProgram*> progs;
  for (int u = 0; u < t.n(); ++u) {
    auto p = std::make_unique<FloodProgram>(u, nullptr);
    progs.push_back(p.get());
    nodes.push_back(std::move(p));
  }
  std::vector<std::vector<int>> members(T);
  for (int j = 0; j < T; ++j) {
    members[j] = tree_nodes(t, trees[j]);
    if (!std::binary_search(members[j].begin(), members[j].end(), source))
      throw std::invalid_argument("broadcast source missing from a tree");
    auto children = tree_children(t, trees[j], source);
    for (int u : members[j]) {
      progs[u]->roles[j] = {j, children[u], -1};
    }
  }
  // chunk i rides tree i mod T
  for (long i = 0; i < num_chunks; ++i) {
    long off = i * B;
    int len = static_cast<int>(std::min<long>(B, bits - off));
    BitReader rd{&payload};
    rd.pos = off;
    BitWriter w;
    for (int b = 0; b < len; ++b) w.put(rd.get(1), 1);
    progs[source]->seed_chunk(static_cast<int>(i % T), std::move(w.bytes), len);
  }
  RunOptions opt;
  opt.round_cap = round_cap;
  SimulationTrace tr = run_simulation(t, nodes, opt);

  // reassemble at every node present in all trees
  for (int u = 0; u < t.n(); ++u) {
    bool everywhere = true;
    for (int j = 0; j < T; ++j)
      everywhere = everywhere &&
                   std::binary_search(members[j].begin(), members[j].end(), u);
    if (!everywhere) continue;
    const auto& per_tree = progs[u]->chunks();
    BitWriter w;
    std::vector<std::size_t> cursor(T, 0);
    for (long i = 0; i < num_chunks; ++i) {
      int j = static_cast<int>(i % T);
      auto it = per_tree.find(j);
      if (it == per_tree.end() || cursor[j] >= it->second.size())
        throw std::logic_error("broadcast reassembly short");
      const auto& [cb, clen] = it->second[cursor[j]++];
      BitReader rd{&cb};
      for (int b = 0; b < clen; ++b) w.put(rd.get(1), 1);
    }
    received[u] = std::move(w.bytes);
  }
  return tr;
}

namespace {

// Bottom-up pipelined combine along one or more sink-rooted trees. The element
// range is split contiguously across trees; within a tree, elements move in
// g-element slices, each slice released once every child has delivered it.
class CombineProgram : public NodeProgram {
 public:
  struct TreeState {
    int parent = -1;           // neighbor toward the sink; -1 at the sink
    int child_count = 0;
    long lo = 0, hi = 0;       // element range of this tree
    std::vector<Value> acc;    // running combine over [lo, hi)
    std::vector<int> done;     // per slice: children fully delivered
    long next_ready = 0;
  };

  CombineProgram(int self, Value identity, int elem_bits, const CombineFn* f, int B)
      : self_(self), identity_(identity), elem_bits_(elem_bits), f_(f), B_(B) {
    group_ = std::max(1, B / elem_bits);
  }

  std::map<int, TreeState> trees;     // tree id -> state
  std::map<int, int> tree_of_child;   // neighbor below us -> tree id

  void init_ready() {
    for (auto& [j, st] : trees) {
      long slices = slice_count(st);
      st.done.assign(static_cast<std::size_t>(slices), 0);
      advance(j, st);
    }
  }

  bool step(long, const Inbox& inbox, Outbox& outbox) override {
    for (const auto& [from, msg] : inbox) {
      int j = msg.tag;
      TreeState& st = trees.at(j);
      auto& buf = child_bits_[from];
      BitReader rd{&msg.payload};
      for (int i = 0; i < msg.bit_len; ++i) buf.put(rd.get(1), 1);
      drain_child(from, j, st, buf);
    }
    for (auto& [j, st] : trees) advance(j, st);
    bool idle = true;
    for (auto& [nbr, q] : queues_) {
      if (q.empty()) continue;
      Chunk c = std::move(q.front());
      q.pop_front();
      outbox[nbr] = Message{std::move(c.bytes), c.bits, c.stream};
      idle = idle && q.empty();
    }
    return idle;
  }

  const std::vector<Value>& result(int tree) const { return trees.at(tree).acc; }
  bool complete(int tree) const {
    const TreeState& st = trees.at(tree);
    return st.next_ready == slice_count(st);
  }

 private:
  long slice_count(const TreeState& st) const {
    long n = st.hi - st.lo;
    return (n + group_ - 1) / group_;
  }

  long slice_elems(const TreeState& st, long s) const {
    return std::min<long>(group_, st.hi - st.lo - s * group_);
  }

  void drain_child(int child, int j, TreeState& st, BitWriter& buf) {
    auto& next = child_slice_[child];
    for (;;) {
      if (next >= slice_count(st)) break;
      long need = slice_elems(st, next) * elem_bits_;
      if (buf.bits - drained_[child] < need) break;
      BitReader rd{&buf.bytes};
      rd.pos = drained_[child];
      for (long e = 0; e < slice_elems(st, next); ++e) {
        long idx = next * group_ + e;
        Value v = rd.get(elem_bits_);
        st.acc[idx] = (*f_)(st.acc[idx], v);
      }
      drained_[child] += need;
      st.done[static_cast<std::size_t>(next)]++;
      ++next;
    }
  }

  void advance(int j, TreeState& st) {
    while (st.next_ready < slice_count(st) &&
           st.done[static_cast<std::size_t>(st.next_ready)] == st.child_count) {
      emit(j, st, st.next_ready);
      ++st.next_ready;
    }
  }

  void emit(int j, TreeState& st, long s) {
    if (st.parent < 0) return;  // sink keeps the slice
    BitWriter w;
    for (long e = 0; e < slice_elems(st, s); ++e)
      w.put(st.acc[s * group_ + e], elem_bits_);
    for (long off = 0; off < w.bits; off += B_) {
      int len = static_cast<int>(std::min<long>(B_, w.bits - off));
      BitReader rd{&w.bytes};
      rd.pos = off;
      BitWriter part;
      for (int i = 0; i < len; ++i) part.put(rd.get(1), 1);
      queues_[st.parent].push_back({j, std::move(part.bytes), len});
    }
  }

  int self_;
  Value identity_;
  int elem_bits_, B_, group_ = 1;
  const CombineFn* f_;
  std::map<int, std::deque<Chunk>> queues_;
  std::map<int, BitWriter> child_bits_;  // raw bit stream per child neighbor
  std::map<int, long> drained_;
  std::map<int, long> child_slice_;
};

}  // namespace

SimulationTrace convergecast_phase(const Topology& t, int sink,
                                   const std::vector<std::vector<int>>& trees,
                                   const std::vector<std::vector<Value>>& local,
                                   Value identity, int elem_bits, const CombineFn& f,
                                   std::vector<Value>& out, long round_cap) {
  int T = static_cast<int>(trees.size());
  if (T == 0) throw std::invalid_argument("convergecast needs at least one tree");
  long total = local.empty() ? 0 : static_cast<long>(local[0].size());
  for (const auto& v : local)
    if (static_cast<long>(v.size()) != total)
      throw std::invalid_argument("local vectors must share a length");
  out.assign(static_cast<std::size_t>(total), identity);
  if (total == 0) return {};

  std::vector<std::unique_ptr<NodeProgram>> nodes;
  std::vector<CombineProgram*> progs;
  for (int u = 0; u < t.n(); ++u) {
    auto p = std::make_unique<CombineProgram>(u, identity, elem_bits, &f,
                                              t.capacity_bits);
    progs.push_back(p.get());
    nodes.push_back(std::move(p));
  }
  for (int j = 0; j < T; ++j) {
    long lo = j * total / T, hi = (j + 1) * total / T;
    auto members = tree_nodes(t, trees[j]);
    if (trees[j].empty()) members = {sink};
    if (!std::count(members.begin(), members.end(), sink))
      throw std::invalid_argument("convergecast sink missing from a tree");
    auto children = tree_children(t, trees[j], sink);
    for (int u : members) {
      CombineProgram::TreeState st;
      st.lo = lo;
      st.hi = hi;
      st.child_count = static_cast<int>(children[u].size());
      st.acc.assign(static_cast<std::size_t>(hi - lo), identity);
      for (long i = lo; i < hi; ++i)
        st.acc[static_cast<std::size_t>(i - lo)] = local[u][static_cast<std::size_t>(i)];
      // parent = the neighbor on the path toward the sink
      st.parent = -1;
      for (int w : members)
        for (int c : children[w])
          if (c == u) st.parent = w;
      progs[u]->trees[j] = std::move(st);
    }
  }
  for (auto* p : progs) p->init_ready();
  RunOptions opt;
  opt.round_cap = round_cap;
  SimulationTrace tr = run_simulation(t, nodes, opt);
  for (int j = 0; j < T; ++j) {
    long lo = j * total / T, hi = (j + 1) * total / T;
    if (hi == lo) continue;
    if (!progs[sink]->complete(j)) throw std::logic_error("convergecast incomplete");
    const auto& acc = progs[sink]->result(j);
    for (long i = lo; i < hi; ++i) out[static_cast<std::size_t>(i)] = acc[i - lo];
  }
  return tr;
}

SteinerPacking packing_for(const Topology& t, long n_bits) {
  long msgs = std::max<long>(1, (n_bits + t.capacity_bits - 1) / t.capacity_bits);
  SteinerPacking best;
  long best_est = -1;
  for (int delta = 1; delta <= t.n(); ++delta) {
    SteinerPacking p = steiner_packing(t, delta);
    if (p.trees.empty()) continue;
    long st = static_cast<long>(p.trees.size());
    long est = (msgs + st - 1) / st + delta;
    if (best_est < 0 || est < best_est) {
      best_est = est;
      best = std::move(p);
    }
  }
  if (best.trees.empty()) {
    // single spanning tree fallback
    best = steiner_packing(t, t.n());
  }
  if (best.trees.empty()) throw std::runtime_error("no steiner tree for terminals");
  return best;
}

long upper_estimate(const Topology& t, long y, long n_units, long mcf_rounds) {
  long best = -1;
  auto table = st_table(t);
  long B = t.capacity_bits;
  for (auto [delta, st] : table) {
    if (st <= 0) continue;
    long est = (n_units + B * st - 1) / (B * st) + delta;
    if (best < 0 || est < best) best = est;
  }
  if (best < 0) best = n_units;
  return y * best + mcf_rounds;
}

void finish(ProtocolResult& r, const Semiring& s, long bound_estimate) {
  r.rounds = r.trace.rounds;
  r.trace.answer_digest = digest(r.answer, s);
  r.bound_estimate = bound_estimate;
  r.constant_used =
      bound_estimate > 0 ? static_cast<double>(r.rounds) / bound_estimate : 0.0;
}

}  // namespace faqnet::detail

namespace faqnet {

using namespace detail;

long default_round_cap(const FaqQuery& q, const Topology& t) {
  long n = std::max<long>(1, static_cast<long>(q.max_relation_size()));
  long per_tuple = q.h.r() * bits_for_domain(std::max(2, q.max_domain())) +
                   q.semiring.encode_bits;
  long bits = 64 + n * per_tuple * std::max(1, q.h.k());
  long cap = 10L * q.h.k() * n + 1L * t.n() * t.n();
  return std::max(cap, 8 * bits / std::max(1, t.capacity_bits) + 8L * t.n());
}

Topology line_topology(int players, int capacity_bits) {
  Topology t;
  for (int i = 0; i < players; ++i) t.names.push_back("P" + std::to_string(i));
  for (int i = 0; i + 1 < players; ++i) t.edges.emplace_back(i, i + 1);
  for (int i = 0; i < players; ++i) t.terminals.push_back(i);
  t.capacity_bits = capacity_bits;
  return t;
}

ProtocolResult trivial_protocol(const FaqQuery& q, const Topology& t,
                                const Assignment& a) {
  q.validate();
  t.validate();
  bool with_values = q.semiring.encode_bits > 1;
  std::vector<Stream> streams;
  std::vector<std::pair<int, long>> demands;
  for (const auto& [edge, rel] : q.relations) {
    int owner = a.owner.at(edge);
    if (owner == a.answer_player) continue;
    Stream s;
    s.id = edge;
    s.src = owner;
    s.dst = a.answer_player;
    s.payload = encode_relation(rel, q.semiring, with_values);
    s.bits = relation_bits(rel, q.semiring, with_values);
    demands.emplace_back(owner, s.bits);
    streams.push_back(std::move(s));
  }
  ProtocolResult res;
  std::map<int, std::vector<std::uint8_t>> delivered;
  res.trace = route_phase(t, streams, delivered, default_round_cap(q, t));

  FaqQuery local = q;
  for (auto& [edge, bytes] : delivered)
    local.relations[edge] =
        decode_relation(bytes, q.relations.at(edge), q.semiring, with_values);
  Ghd g = build_gyo_ghd(local.h);
  const auto& root_bag = g.chi[g.root()];
  if (!std::includes(root_bag.begin(), root_bag.end(), local.free_vars.begin(),
                     local.free_vars.end())) {
    // free variables outside the canonical root bag: fall back to the one-bag
    // decomposition, which joins everything at the answer player
    Ghd flat;
    flat.parent = {-1};
    flat.chi = {{}};
    flat.lambda = {{}};
    for (const auto& e : local.h.edges) {
      flat.lambda[0].push_back(e.id);
      flat.cover[e.id] = 0;
      for (int v : e.vars) flat.chi[0].push_back(v);
    }
    std::sort(flat.chi[0].begin(), flat.chi[0].end());
    flat.chi[0].erase(std::unique(flat.chi[0].begin(), flat.chi[0].end()),
                      flat.chi[0].end());
    g = std::move(flat);
  }
  res.answer = eval_faq_centralized(local, g);
  McfResult mcf = mcf_schedule(t, demands, a.answer_player);
  finish(res, q.semiring, std::max<long>(1, mcf.formula_floor));
  return res;
}

ProtocolResult set_intersection_protocol(const std::map<int, std::vector<bool>>& vectors,
                                         const Topology& t, int sink) {
  t.validate();
  std::size_t len = 0;
  for (const auto& [p, v] : vectors) {
    if (p < 0 || p >= t.n()) throw std::invalid_argument("bad player in vectors");
    if (len == 0) len = v.size();
    if (v.size() != len) throw std::invalid_argument("vector lengths differ");
  }
  ProtocolResult res;
  res.answer.attrs = {0};
  res.answer.domain_sizes = {std::max<int>(1, static_cast<int>(len))};
  if (len == 0) {
    finish(res, Semiring::boolean(), 1);
    return res;
  }
  SteinerPacking packing = packing_for(t, static_cast<long>(len));
  std::vector<std::vector<Value>> local(t.n(), std::vector<Value>(len, 1));
  for (const auto& [p, v] : vectors)
    for (std::size_t i = 0; i < len; ++i) local[p][i] = v[i] ? 1 : 0;
  std::vector<Value> out;
  long cap = 1000 + 4L * static_cast<long>(len) + 10L * t.n() * t.n();
  res.trace = convergecast_phase(
      t, sink, packing.trees, local, 1, 1,
      [](Value a, Value b) { return a & b; }, out, cap);
  for (std::size_t i = 0; i < len; ++i)
    if (out[i]) res.answer.entries.push_back({{static_cast<int>(i)}, 1});
  finish(res, Semiring::boolean(), upper_estimate(t, 1, static_cast<long>(len), 0));
  return res;
}

// --- streaming semijoin chain -----------------------------------------------

namespace {

constexpr int kTagData = 0;
constexpr int kTagLast = 1;   // data value, final element of the stream
constexpr int kTagEmpty = 2;  // stream exhausted with no surviving value

// One hop of the chain: receives attribute values from `prev`, forwards the
// ones present in its own filter set to `next`. The source hop plays its
// prepared list instead.
class ChainProgram : public NodeProgram {
 public:
  struct Lane {
    int prev = -1;                 // -1: source lane
    int next = -1;                 // -1: sink lane
    std::set<int> filter;
    std::deque<std::pair<int, int>> queue;  // (value or -1 for bare marker, tag)
    bool done_in = false;
    std::vector<int> survivors;    // populated at the sink
  };

  explicit ChainProgram(int value_bits) : value_bits_(value_bits) {}

  std::map<int, Lane> lanes;        // lane id -> state
  std::map<int, int> lane_of_prev;  // neighbor we receive from -> lane id

  bool step(long, const Inbox& inbox, Outbox& outbox) override {
    for (const auto& [from, msg] : inbox) {
      Lane& ln = lanes.at(lane_of_prev.at(from));
      int tag = msg.tag;
      int v = -1;
      if (tag != kTagEmpty && msg.bit_len > 0) {
        BitReader rd{&msg.payload};
        v = static_cast<int>(rd.get(value_bits_));
      }
      bool survives = v >= 0 && ln.filter.count(v) > 0;
      bool last = tag != kTagData;
      if (ln.next < 0) {
        if (survives) ln.survivors.push_back(v);
        if (last) ln.done_in = true;
        continue;
      }
      if (survives)
        ln.queue.emplace_back(v, last ? kTagLast : kTagData);
      else if (last)
        ln.queue.emplace_back(-1, ln.queue.empty() ? kTagEmpty : kTagEmpty);
      if (last) ln.done_in = true;
    }
    bool idle = true;
    for (auto& [id, ln] : lanes) {
      if (ln.next < 0 || ln.queue.empty()) {
        idle = idle && ln.queue.empty();
        continue;
      }
      auto [v, tag] = ln.queue.front();
      ln.queue.pop_front();
      Message m;
      if (v >= 0) {
        BitWriter w;
        w.put(static_cast<std::uint64_t>(v), value_bits_);
        m.payload = std::move(w.bytes);
        m.bit_len = value_bits_;
      }
      m.tag = tag;
      outbox[ln.next] = std::move(m);
      idle = idle && ln.queue.empty();
    }
    return idle;
  }

 private:
  int value_bits_;
};

bool path_ok(const Topology& t, const std::vector<int>& order) {
  for (std::size_t i = 0; i + 1 < order.size(); ++i)
    if (t.edge_index(order[i], order[i + 1]) < 0) return false;
  return true;
}

// Directed edges of a player order, as (from, to) pairs.
std::set<std::pair<int, int>> directed_edges(const std::vector<int>& order) {
  std::set<std::pair<int, int>> s;
  for (std::size_t i = 0; i + 1 < order.size(); ++i)
    s.insert({order[i], order[i + 1]});
  return s;
}

}  // namespace

ProtocolResult line_pipeline_bcq(const FaqQuery& q, const Topology& t,
                                 const Assignment& a) {
  q.validate();
  t.validate();
  if (q.semiring.id != SemiringId::Boolean)
    throw std::invalid_argument("pipeline chain is a boolean protocol");
  // shared attribute: must appear in every hyperedge
  std::vector<int> shared = q.h.edges.front().vars;
  for (const auto& e : q.h.edges) {
    std::vector<int> inter;
    std::set_intersection(shared.begin(), shared.end(), e.vars.begin(), e.vars.end(),
                          std::back_inserter(inter));
    shared = std::move(inter);
  }
  if (shared.empty())
    throw std::invalid_argument("pipeline chain needs a common join attribute");
  int attr = shared.front();
  int dom = q.h.domain.at(attr);
  int value_bits = bits_for_domain(dom);

  // owners in hyperedge-id order, answer player last
  std::vector<int> owners;
  for (const auto& e : q.h.edges) {
    int p = a.owner.at(e.id);
    if (std::count(owners.begin(), owners.end(), p) > 0)
      throw std::invalid_argument("pipeline chain wants one relation per player");
    owners.push_back(p);
  }
  if (std::count(owners.begin(), owners.end(), a.answer_player) == 0)
    throw std::invalid_argument("answer player must hold a relation");
  std::vector<int> order;
  for (int p : owners)
    if (p != a.answer_player) order.push_back(p);
  std::sort(order.begin(), order.end());
  order.push_back(a.answer_player);
  bool is_path_graph = true;
  for (const auto& row : t.adjacency()) is_path_graph &= row.size() <= 2;

  // filter sets per player
  std::map<int, std::set<int>> filters;
  std::map<int, std::vector<int>> sorted_values;
  for (const auto& e : q.h.edges) {
    int p = a.owner.at(e.id);
    Relation proj = project_aggregate(q.relations.at(e.id), {attr}, q.semiring);
    for (const auto& [tup, v] : proj.entries) {
      filters[p].insert(tup[0]);
      sorted_values[p].push_back(tup[0]);
    }
  }

  std::vector<std::vector<int>> paths;
  if (!is_path_graph && !t.half_duplex && order.size() >= 3) {
    // Example-2.3 style split: two directed-edge-disjoint orderings sharing the
    // same first player and ending at the answer player.
    std::vector<int> middle(order.begin() + 1, order.end() - 1);
    std::sort(middle.begin(), middle.end());
    std::vector<int> alt;
    do {
      std::vector<int> cand{order.front()};
      cand.insert(cand.end(), middle.begin(), middle.end());
      cand.push_back(order.back());
      if (cand == order || !path_ok(t, cand)) continue;
      auto e1 = directed_edges(order), e2 = directed_edges(cand);
      bool disjoint = true;
      for (const auto& d : e2) disjoint = disjoint && !e1.count(d);
      if (disjoint && path_ok(t, order)) {
        alt = cand;
        break;
      }
    } while (std::next_permutation(middle.begin(), middle.end()));
    if (!alt.empty()) {
      paths = {order, alt};
    }
  }
  if (paths.empty()) {
    if (!path_ok(t, order))
      throw std::invalid_argument("owners do not lie on a path in id order");
    paths = {order};
  }

  // split the source stream by sorted position across the paths
  const std::vector<int>& src_vals = sorted_values[order.front()];
  std::size_t n_src = src_vals.size();
  std::vector<std::vector<int>> lane_stream(paths.size());
  std::size_t half = (n_src + paths.size() - 1) / paths.size();
  for (std::size_t i = 0; i < n_src; ++i)
    lane_stream[std::min(i / std::max<std::size_t>(1, half), paths.size() - 1)]
        .push_back(src_vals[i]);

  std::vector<std::unique_ptr<NodeProgram>> nodes;
  std::vector<ChainProgram*> progs;
  for (int u = 0; u < t.n(); ++u) {
    auto p = std::make_unique<ChainProgram>(value_bits);
    progs.push_back(p.get());
    nodes.push_back(std::move(p));
  }
  for (std::size_t lane = 0; lane < paths.size(); ++lane) {
    const auto& path = paths[lane];
    for (std::size_t i = 0; i < path.size(); ++i) {
      ChainProgram::Lane ln;
      ln.prev = i == 0 ? -1 : path[i - 1];
      ln.next = i + 1 < path.size() ? path[i + 1] : -1;
      ln.filter = filters[path[i]];
      if (i == 0) {
        // the source pre-filters its own stream and queues it up
        const auto& vals = lane_stream[lane];
        for (std::size_t j = 0; j < vals.size(); ++j)
          ln.queue.emplace_back(vals[j], j + 1 == vals.size() ? kTagLast : kTagData);
        if (vals.empty()) ln.queue.emplace_back(-1, kTagEmpty);
      }
      progs[path[i]]->lanes[static_cast<int>(lane)] = std::move(ln);
      if (i > 0)
        progs[path[i]]->lane_of_prev[path[i - 1]] = static_cast<int>(lane);
    }
  }
  RunOptions opt;
  opt.round_cap = default_round_cap(q, t);
  ProtocolResult res;
  res.trace = run_simulation(t, nodes, opt);

  std::set<int> surv;
  for (std::size_t lane = 0; lane < paths.size(); ++lane) {
    const auto& ln = progs[paths[lane].back()]->lanes.at(static_cast<int>(lane));
    surv.insert(ln.survivors.begin(), ln.survivors.end());
  }
  res.answer.attrs = {};
  res.answer.domain_sizes = {};
  if (!surv.empty()) res.answer.entries.push_back({{}, 1});
  long hops = static_cast<long>(order.size()) - 1;
  long longest = 0;
  for (const auto& s : lane_stream) longest = std::max<long>(longest, s.size());
  finish(res, q.semiring, std::max<long>(1, std::max<long>(longest, 1) + hops - 1));
  return res;
}

// --- matrix chains ----------------------------------------------------------

namespace {

std::vector<bool> mat_vec_f2(const std::vector<std::vector<bool>>& m,
                             const std::vector<bool>& x) {
  std::size_t n = m.size();
  std::vector<bool> y(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    bool acc = false;
    for (std::size_t j = 0; j < n; ++j) acc = acc ^ (m[i][j] && x[j]);
    y[i] = acc;
  }
  return y;
}

std::vector<std::vector<bool>> mat_mul_f2(const std::vector<std::vector<bool>>& a,
                                          const std::vector<std::vector<bool>>& b) {
  std::size_t n = a.size();
  std::vector<std::vector<bool>> c(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (a[i][k])
        for (std::size_t j = 0; j < n; ++j) c[i][j] = c[i][j] ^ b[k][j];
  return c;
}

std::vector<std::uint8_t> pack_bits(const std::vector<bool>& v, long& bits) {
  BitWriter w;
  for (bool b : v) w.put(b ? 1 : 0, 1);
  bits = w.bits;
  return w.bytes;
}

std::vector<bool> unpack_bits(const std::vector<std::uint8_t>& bytes, std::size_t n) {
  BitReader rd{&bytes};
  std::vector<bool> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rd.get(1) != 0;
  return v;
}

Relation vector_relation(const std::vector<bool>& y) {
  Relation r;
  r.attrs = {0};
  r.domain_sizes = {std::max<int>(1, static_cast<int>(y.size()))};
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i]) r.entries.push_back({{static_cast<int>(i)}, 1});
  return r;
}

void check_chain_inputs(const std::vector<bool>& x,
                        const std::vector<std::vector<std::vector<bool>>>& mats,
                        const Topology& t) {
  std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("empty vector");
  for (const auto& m : mats) {
    if (m.size() != n) throw std::invalid_argument("matrix dimension mismatch");
    for (const auto& row : m)
      if (row.size() != n) throw std::invalid_argument("matrix dimension mismatch");
  }
  if (t.n() != static_cast<int>(mats.size()) + 2)
    throw std::invalid_argument("chain wants k+2 players on a line");
  for (int i = 0; i + 1 < t.n(); ++i)
    if (t.edge_index(i, i + 1) < 0)
      throw std::invalid_argument("chain topology must be the standard line");
}

}  // namespace

std::vector<bool> matrix_chain_direct(
    const std::vector<bool>& x,
    const std::vector<std::vector<std::vector<bool>>>& mats) {
  std::vector<bool> y = x;
  for (const auto& m : mats) y = mat_vec_f2(m, y);
  return y;
}

ProtocolResult matrix_chain(const std::vector<bool>& x,
                            const std::vector<std::vector<std::vector<bool>>>& mats,
                            const Topology& t) {
  check_chain_inputs(x, mats, t);
  int k = static_cast<int>(mats.size());
  long N = static_cast<long>(x.size());
  long M = (N + t.capacity_bits - 1) / t.capacity_bits;
  long cap = 16 + 4 * (k + 1) * M + 4L * t.n();

  ProtocolResult res;
  std::vector<bool> y = x;
  for (int i = 0; i <= k; ++i) {
    long bits = 0;
    Stream s;
    s.id = i;
    s.src = i;
    s.dst = i + 1;
    s.payload = pack_bits(y, bits);
    s.bits = bits;
    std::map<int, std::vector<std::uint8_t>> delivered;
    SimulationTrace tr = route_phase(t, {s}, delivered, cap);
    res.trace.append_shifted(tr, res.trace.rounds);
    y = unpack_bits(delivered.at(i), x.size());
    if (i < k) y = mat_vec_f2(mats[i], y);
  }
  res.answer = vector_relation(y);
  finish(res, Semiring::f2(), (k + 1) * M);
  return res;
}

ProtocolResult matrix_chain_merge(const std::vector<bool>& x,
                                  const std::vector<std::vector<std::vector<bool>>>& mats,
                                  const Topology& t) {
  check_chain_inputs(x, mats, t);
  int k = static_cast<int>(mats.size());
  long N = static_cast<long>(x.size());
  long B = t.capacity_bits;
  long M = (N * N + B - 1) / B;
  long cap = 64 + 8 * M + 8L * t.n() + 8L * k;

  ProtocolResult res;
  if (k == 0) return matrix_chain(x, mats, t);

  // players 1..k hold matrix blocks; pairwise merge into the later player
  std::map<int, std::vector<std::vector<bool>>> block;
  for (int i = 1; i <= k; ++i) block[i] = mats[i - 1];
  std::vector<int> holders(k);
  std::iota(holders.begin(), holders.end(), 1);
  while (holders.size() > 1) {
    std::vector<Stream> streams;
    std::vector<int> next_holders;
    for (std::size_t j = 0; j + 1 < holders.size(); j += 2) {
      int lo = holders[j], hi = holders[j + 1];
      BitWriter w;
      for (const auto& row : block[lo])
        for (bool b : row) w.put(b ? 1 : 0, 1);
      streams.push_back({lo, lo, hi, std::move(w.bytes), w.bits});
      next_holders.push_back(hi);
    }
    if (holders.size() % 2) next_holders.push_back(holders.back());
    std::map<int, std::vector<std::uint8_t>> delivered;
    SimulationTrace tr = route_phase(t, streams, delivered, cap);
    res.trace.append_shifted(tr, res.trace.rounds);
    for (std::size_t j = 0; j + 1 < holders.size(); j += 2) {
      int lo = holders[j], hi = holders[j + 1];
      BitReader rd{&delivered.at(lo)};
      std::vector<std::vector<bool>> m(x.size(), std::vector<bool>(x.size()));
      for (auto& row : m)
        for (std::size_t c = 0; c < row.size(); ++c) row[c] = rd.get(1) != 0;
      // the later block applies after the earlier one: P_hi = B_hi * B_lo
      block[hi] = mat_mul_f2(block[hi], m);
      block.erase(lo);
    }
    holders = std::move(next_holders);
  }
  int final_holder = holders.front();

  // forward x from P0 to the surviving holder, multiply, deliver to P_{k+1}
  auto route_vec = [&](const std::vector<bool>& v, int src, int dst) {
    long bits = 0;
    Stream s{0, src, dst, {}, 0};
    s.payload = pack_bits(v, bits);
    s.bits = bits;
    std::map<int, std::vector<std::uint8_t>> delivered;
    SimulationTrace tr = route_phase(t, {s}, delivered, cap);
    res.trace.append_shifted(tr, res.trace.rounds);
    return unpack_bits(delivered.at(0), v.size());
  };
  std::vector<bool> y = route_vec(x, 0, final_holder);
  y = mat_vec_f2(block[final_holder], y);
  y = route_vec(y, final_holder, k + 1);

  res.answer = vector_relation(y);
  long iters = 0;
  for (int h = k; h > 1; h = (h + 1) / 2) ++iters;
  long nb = (N + B - 1) / B;
  finish(res, Semiring::f2(), iters * M + (k - 1) + nb + k - 1 + nb);
  return res;
}

}  // namespace faqnet
