#pragma once

// Internal plumbing shared by the protocol implementations: bit packing,
// relation serialization, and the three reusable phase programs (point-to-point
// routing, tree broadcast, combining convergecast).

#include <deque>
#include <functional>

#include "protocols.hpp"

namespace faqnet::detail {

struct BitWriter {
  std::vector<std::uint8_t> bytes;
  long bits = 0;
  void put(std::uint64_t v, int width);
};

struct BitReader {
  const std::vector<std::uint8_t>* bytes;
  long pos = 0;
  std::uint64_t get(int width);
};

int bits_for_domain(int d);                  // ceil(log2 d), min 1
int tuple_bits(const Relation& schema);      // key bits only
long relation_bits(const Relation& r, const Semiring& s, bool with_values);

// Serialized form: 32-bit entry count, then per entry the key bits and
// (optionally) the value bits. Attribute schema travels out of band.
std::vector<std::uint8_t> encode_relation(const Relation& r, const Semiring& s,
                                          bool with_values);
Relation decode_relation(const std::vector<std::uint8_t>& bytes, const Relation& schema,
                         const Semiring& s, bool with_values);

std::string digest(const Relation& r, const Semiring& s);

struct Stream {
  int id = 0;
  int src = 0;
  int dst = 0;
  std::vector<std::uint8_t> payload;
  long bits = 0;
};

// Store-and-forward routing of whole payloads along BFS shortest paths, B-bit
// chunks, FIFO per edge. Returns delivered payloads keyed by stream id.
SimulationTrace route_phase(const Topology& t, const std::vector<Stream>& streams,
                            std::map<int, std::vector<std::uint8_t>>& delivered,
                            long round_cap);

// Floods the payload from `source` over the given edge-disjoint trees (chunk i
// travels tree i mod T). Nodes present in every tree reassemble the payload.
SimulationTrace broadcast_phase(const Topology& t, int source,
                                const std::vector<std::uint8_t>& payload, long bits,
                                const std::vector<std::vector<int>>& trees,
                                std::map<int, std::vector<std::uint8_t>>& received,
                                long round_cap);

using CombineFn = std::function<Value(Value, Value)>;

// Element-wise combine of per-node vectors toward `sink`, chunk ranges split
// contiguously across the trees, slices pipelined bottom-up.
SimulationTrace convergecast_phase(const Topology& t, int sink,
                                   const std::vector<std::vector<int>>& trees,
                                   const std::vector<std::vector<Value>>& local,
                                   Value identity, int elem_bits, const CombineFn& f,
                                   std::vector<Value>& out, long round_cap);

// Edge-disjoint Steiner packing at the round-minimizing delta for n_items
// payload bits (falls back to delta = |V|).
SteinerPacking packing_for(const Topology& t, long n_bits);

std::vector<std::vector<int>> tree_children(const Topology& t,
                                            const std::vector<int>& tree_edges,
                                            int root);

long upper_estimate(const Topology& t, long y, long n_bits, long mcf_rounds);

void finish(ProtocolResult& r, const Semiring& s, long bound_estimate);

}  // namespace faqnet::detail
