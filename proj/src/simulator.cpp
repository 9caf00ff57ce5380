#include "simulator.hpp"

#include <algorithm>
#include <sstream>

#include "semiring.hpp"

namespace faqnet {

void SimulationTrace::append_shifted(const SimulationTrace& other, long round_offset) {
  for (TraceEntry e : other.entries) {
    e.round += round_offset;
    entries.push_back(e);
  }
  rounds = std::max(rounds, round_offset + other.rounds);
  for (const auto& v : other.violations) violations.push_back(v);
  saturations += other.saturations;
}

SimulationTrace run_simulation(const Topology& t,
                               std::vector<std::unique_ptr<NodeProgram>>& nodes,
                               const RunOptions& opt) {
  t.validate();
  if (static_cast<int>(nodes.size()) != t.n())
    throw std::invalid_argument("one program per player required");
  long cap = opt.round_cap > 0 ? opt.round_cap : 1000L * t.n() * t.n() + 1000;

  SimulationTrace tr;
  std::uint64_t sat0 = saturation_events();
  std::vector<Inbox> inboxes(t.n());
  for (long round = 1;; ++round) {
    if (round > cap) throw RoundCapExceeded("round cap exceeded");
    std::vector<Outbox> outboxes(t.n());
    bool all_done = true;
    for (int u = 0; u < t.n(); ++u) {
      bool done = nodes[u]->step(round, inboxes[u], outboxes[u]);
      all_done = all_done && done;
    }
    std::vector<Inbox> next(t.n());
    bool traffic = false;
    for (int u = 0; u < t.n(); ++u) {
      for (auto& [v, msg] : outboxes[u]) {
        if (t.edge_index(u, v) < 0)
          throw CapacityViolation("send on nonexistent edge", round, u, v);
        if (msg.bit_len > t.capacity_bits)
          throw CapacityViolation("message exceeds edge capacity", round, u, v);
        if (t.half_duplex && outboxes[v].count(u))
          throw CapacityViolation("half-duplex edge used in both directions",
                                  round, u, v);
        tr.entries.push_back({round, u, v, msg.bit_len, msg.tag});
        next[v][u] = std::move(msg);
        traffic = true;
      }
    }
    if (traffic) tr.rounds = round;
    inboxes = std::move(next);
    if (all_done && !traffic) break;
  }
  tr.saturations = saturation_events() - sat0;
  return tr;
}

bool verify_trace(const SimulationTrace& tr, const Topology& t) {
  long last_round = 0;
  std::map<std::tuple<long, int, int>, int> per_edge_round;
  for (const auto& e : tr.entries) {
    if (e.round <= 0 || e.round < last_round) return false;
    last_round = std::max(last_round, e.round);
    if (e.bits < 0 || e.bits > t.capacity_bits) return false;
    if (t.edge_index(e.from, e.to) < 0) return false;
    if (++per_edge_round[{e.round, e.from, e.to}] > 1) return false;
    if (t.half_duplex && per_edge_round.count({e.round, e.to, e.from})) return false;
  }
  if (last_round > tr.rounds) return false;
  return tr.violations.empty();
}

std::string trace_csv(const SimulationTrace& tr, const Topology& t) {
  std::ostringstream os;
  os << "round,edge_a,edge_b,direction,bits,tag\n";
  for (const auto& e : tr.entries) {
    int a = std::min(e.from, e.to), b = std::max(e.from, e.to);
    os << e.round << "," << t.names[a] << "," << t.names[b] << ","
       << (e.from == a ? "ab" : "ba") << "," << e.bits << "," << e.tag << "\n";
  }
  os << "# rounds=" << tr.rounds << " answer=" << tr.answer_digest
     << " saturations=" << tr.saturations << "\n";
  return os.str();
}

}  // namespace faqnet
