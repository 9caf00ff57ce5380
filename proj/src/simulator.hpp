#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "topology.hpp"

namespace faqnet {

struct Message {
  std::vector<std::uint8_t> payload;
  int bit_len = 0;
  int tag = 0;
};

struct TraceEntry {
  long round = 0;
  int from = 0;
  int to = 0;
  int bits = 0;
  int tag = 0;
};

struct SimulationTrace {
  long rounds = 0;
  std::vector<TraceEntry> entries;
  std::vector<std::string> violations;
  std::string answer_digest;
  std::uint64_t saturations = 0;

  void append_shifted(const SimulationTrace& other, long round_offset);
};

// Inbox/outbox keyed by neighbor player index. A node may place at most one
// message per incident edge per round; payloads above the edge capacity are a
// protocol bug surfaced as a violation.
using Inbox = std::map<int, Message>;
using Outbox = std::map<int, Message>;

struct NodeProgram {
  virtual ~NodeProgram() = default;
  // Messages sent in round i are delivered into the inbox seen at round i+1.
  // Returns true when this node is done (it may revive on later input).
  virtual bool step(long round, const Inbox& inbox, Outbox& outbox) = 0;
};

struct RunOptions {
  long round_cap = 0;  // 0: derived as 10*k*N + |V|^2 by the caller
};

class CapacityViolation : public std::runtime_error {
 public:
  CapacityViolation(const std::string& what, long round, int from, int to)
      : std::runtime_error(what), round(round), from(from), to(to) {}
  long round;
  int from, to;
};

class RoundCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SimulationTrace run_simulation(const Topology& t,
                               std::vector<std::unique_ptr<NodeProgram>>& nodes,
                               const RunOptions& opt);

// Re-checks every capacity constraint and monotone round numbering.
bool verify_trace(const SimulationTrace& tr, const Topology& t);

std::string trace_csv(const SimulationTrace& tr, const Topology& t);

}  // namespace faqnet
