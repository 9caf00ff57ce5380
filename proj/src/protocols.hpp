#pragma once

#include <functional>

#include "faq.hpp"
#include "simulator.hpp"

namespace faqnet {

struct ProtocolResult {
  Relation answer;
  long rounds = 0;
  SimulationTrace trace;
  long bound_estimate = 0;   // the matching bound formula value, constants = 1
  double constant_used = 0;  // measured rounds / bound_estimate (0 if estimate 0)
};

long default_round_cap(const FaqQuery& q, const Topology& t);

// All input relations are routed to the answer player, which evaluates the
// query locally.
ProtocolResult trivial_protocol(const FaqQuery& q, const Topology& t,
                                const Assignment& a);

// Every terminal holds an n-bit vector; the sink ends with the bitwise AND.
ProtocolResult set_intersection_protocol(const std::map<int, std::vector<bool>>& vectors,
                                         const Topology& t, int sink);

// Star BCQ: broadcast the special spoke relation, filter locally, intersect
// indicator vectors.
ProtocolResult star_bcq(const FaqQuery& q, const Topology& t, const Assignment& a);

// Streaming semijoin chain over a path (or a split pair of directed
// Hamiltonian paths when the topology allows it).
ProtocolResult line_pipeline_bcq(const FaqQuery& q, const Topology& t,
                                 const Assignment& a);

ProtocolResult forest_bcq(const FaqQuery& q, const Topology& t, const Assignment& a);

ProtocolResult general_bcq(const FaqQuery& q, const Topology& t, const Assignment& a);

// FAQ-SS over a star GHD: leaves push aggregated tables into an element-wise
// semiring product convergecast over the packing.
ProtocolResult star_faq(const FaqQuery& q, const Ghd& star, const Topology& t,
                        const Assignment& a);

// General FAQ-SS: GYO-GHD + MD transform, bottom-up star phases, trivial core
// flush, centralized finish.
ProtocolResult faq_ss(const FaqQuery& q, const Topology& t, const Assignment& a);

struct ConsistentHashFamily {
  std::uint64_t seed = 0;
  int num_players = 1;
  // node of the GHD covering each edge -> interface attrs hashed for that edge
  std::map<int, std::vector<int>> interface_attrs;  // edge id -> attrs
  int shard(const Relation& r, const Tuple& t, int edge_id) const;
};

ConsistentHashFamily consistent_hash_family(const Hypergraph& h, const Ghd& star,
                                            int num_players, std::uint64_t seed);

bool hash_family_consistent(const ConsistentHashFamily& f, const FaqQuery& q);

// FAQ-SS on a star with hash-partitioned relations: per-tuple counters plus a
// running product convergecast.
ProtocolResult split_star_faq(const FaqQuery& q, const Topology& t,
                              const ConsistentHashFamily& hash);

// F2 matrix-vector chain y_i = A_i y_{i-1} on a line of k+2 players.
ProtocolResult matrix_chain(const std::vector<bool>& x,
                            const std::vector<std::vector<std::vector<bool>>>& mats,
                            const Topology& t);

// Pairwise merge variant: log k matrix-merge iterations, then forward x.
ProtocolResult matrix_chain_merge(const std::vector<bool>& x,
                                  const std::vector<std::vector<std::vector<bool>>>& mats,
                                  const Topology& t);

std::vector<bool> matrix_chain_direct(const std::vector<bool>& x,
                                      const std::vector<std::vector<std::vector<bool>>>& mats);

Topology line_topology(int players, int capacity_bits);

}  // namespace faqnet
