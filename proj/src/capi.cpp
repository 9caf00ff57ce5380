#include "faqnet.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "bounds.hpp"
#include "io.hpp"
#include "protocols.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

struct faqnet_session {
  std::string error;
  std::string result;
};

namespace {

using namespace faqnet;

constexpr std::uint64_t kOracleCap = 1u << 20;

// Scoped error mapping: parse stage -> 2, setup stage -> 3, run stage -> 4.
template <typename Fn>
int guarded(faqnet_session* s, const char** out, Fn&& fn) {
  if (!s) return FAQNET_ERR_INCOMPATIBLE;
  s->error.clear();
  s->result.clear();
  try {
    int rc = fn(s->result);
    if (out) *out = s->result.c_str();
    return rc;
  } catch (const ParseError& e) {
    s->error = e.what();
    return FAQNET_ERR_PARSE;
  } catch (const CapacityViolation& e) {
    s->error = e.what();
    return FAQNET_ERR_CAPACITY;
  } catch (const RoundCapExceeded& e) {
    s->error = e.what();
    return FAQNET_ERR_CAPACITY;
  } catch (const std::exception& e) {
    s->error = e.what();
    return FAQNET_ERR_INCOMPATIBLE;
  }
}

struct LoadedSpec {
  FaqQuery q;
  NameTable vars;
  Topology t;
};

LoadedSpec load_spec(const char* query_path, const char* topology_path,
                     const char* semiring) {
  if (!query_path || !topology_path)
    throw ParseError("query and topology paths are required", 0);
  const Semiring& s =
      Semiring::by_name(semiring && *semiring ? semiring : "boolean");
  LoadedSpec ls;
  try {
    ls.q = load_query(query_path, s, &ls.vars);
    ls.t = parse_topology(read_file(topology_path));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(e.what(), 0);
  }
  return ls;
}

Assignment resolve_assignment(const std::string& spec, const FaqQuery& q,
                              const Topology& t) {
  Assignment a;
  if (spec.empty() || spec == "round-robin") {
    if (t.terminals.empty()) throw std::invalid_argument("no terminals");
    std::size_t i = 0;
    for (const auto& e : q.h.edges)
      a.owner[e.id] = t.terminals[i++ % t.terminals.size()];
    a.answer_player = t.terminals.front();
    return a;
  }
  if (spec == "worst-case-cut") {
    HardInstance inst;
    for (const auto& e : q.h.edges) inst.pad_edges.push_back(e.id);
    return cut_assignment(t, inst);
  }
  // explicit file: `e<id> <node>` lines plus one `answer <node>` line
  std::istringstream is(read_file(spec));
  std::string line;
  int ln = 0;
  bool saw_answer = false;
  while (std::getline(is, line)) {
    ++ln;
    std::istringstream ls(line);
    std::string head, node;
    if (!(ls >> head)) continue;
    if (head[0] == '#') continue;
    if (!(ls >> node)) throw ParseError("expected a node name", ln);
    int p;
    try {
      p = t.player(node);
    } catch (const std::exception&) {
      throw ParseError("unknown node '" + node + "'", ln);
    }
    if (head == "answer") {
      a.answer_player = p;
      saw_answer = true;
    } else {
      std::string id = head[0] == 'e' ? head.substr(1) : head;
      try {
        a.owner[std::stoi(id)] = p;
      } catch (const std::exception&) {
        throw ParseError("bad edge id '" + head + "'", ln);
      }
    }
  }
  if (!saw_answer) throw ParseError("missing answer line", ln);
  for (const auto& e : q.h.edges)
    if (!a.owner.count(e.id))
      throw ParseError("no owner for edge e" + std::to_string(e.id), ln);
  return a;
}

ProtocolResult dispatch(const std::string& name, const FaqQuery& q,
                        const Topology& t, const Assignment& a,
                        std::uint64_t seed) {
  if (name == "trivial") return trivial_protocol(q, t, a);
  if (name == "line_pipeline") return line_pipeline_bcq(q, t, a);
  if (name == "star_bcq") return star_bcq(q, t, a);
  if (name == "forest_bcq") return forest_bcq(q, t, a);
  if (name == "general_bcq") return general_bcq(q, t, a);
  if (name == "star_faq") return star_faq(q, build_gyo_ghd(q.h), t, a);
  if (name == "faq_ss") return faq_ss(q, t, a);
  if (name == "split_star_faq") {
    auto hash = consistent_hash_family(
        q.h, build_gyo_ghd(q.h), static_cast<int>(t.terminals.size()), seed);
    return split_star_faq(q, t, hash);
  }
  throw std::invalid_argument("unknown protocol '" + name + "'");
}

// "match" / "mismatch" / "skipped" (oracle infeasible)
std::string oracle_verdict(const FaqQuery& q, const Relation& answer) {
  Relation expect;
  try {
    expect = eval_faq_bruteforce(q, kOracleCap);
  } catch (const std::exception&) {
    return "skipped";
  }
  return relations_equal(answer, expect) ? "match" : "mismatch";
}

json bounds_json(const BoundsInput& b) {
  json st = json::object();
  for (const auto& [delta, sz] : b.st) st[std::to_string(delta)] = sz;
  return {{"y", b.y},      {"n2", b.n2},         {"d", b.d},
          {"r", b.r},      {"N", b.N},           {"B", b.B},
          {"mincut", b.mincut}, {"st_table", st}, {"mcf_rounds", b.mcf_rounds}};
}

void write_hard_files(const std::string& out_dir, const HardInstance& inst,
                      const Topology& t, const Assignment& a,
                      const NameTable& vars, const json& meta) {
  fs::create_directories(out_dir);
  fs::path dir(out_dir);
  write_file((dir / "query.hg").string(),
             write_hypergraph(inst.query.h, vars, inst.query.free_vars));
  for (const auto& [id, rel] : inst.query.relations)
    write_file((dir / ("e" + std::to_string(id) + ".rel")).string(),
               write_relation(rel, vars, inst.query.semiring));
  std::ostringstream as;
  for (const auto& [id, p] : a.owner)
    as << "e" << id << " " << t.names[static_cast<std::size_t>(p)] << "\n";
  as << "answer " << t.names[static_cast<std::size_t>(a.answer_player)] << "\n";
  write_file((dir / "owners.assign").string(), as.str());
  write_file((dir / "instance.json").string(), meta.dump(2) + "\n");
}

}  // namespace

extern "C" {

faqnet_session* faqnet_session_new(void) { return new faqnet_session{}; }

void faqnet_session_free(faqnet_session* s) { delete s; }

const char* faqnet_last_error(const faqnet_session* s) {
  return s ? s->error.c_str() : "";
}

int faqnet_analyze(faqnet_session* s, const char* query_path,
                   const char* topology_path, const char* semiring,
                   const char** out) {
  return guarded(s, out, [&](std::string& res) {
    LoadedSpec ls = load_spec(query_path, topology_path, semiring);
    Assignment a = resolve_assignment("round-robin", ls.q, ls.t);
    WidthResult w = internal_node_width(ls.q.h);
    CoreForest cf = core_forest(ls.q.h);
    MinCutResult mc = min_cut(ls.t);
    BoundsInput b = bounds_input(ls.q, ls.t, a);
    json j = {{"acyclic", is_acyclic(ls.q.h)},
              {"y", w.y},
              {"witness_ghd", w.witness.serialize()},
              {"n2", static_cast<long>(cf.core_vertices.size())},
              {"degeneracy", degeneracy(ls.q.h)},
              {"max_arity", ls.q.h.r()},
              {"mincut", mc.value},
              {"bounds_input", bounds_json(b)}};
    res = j.dump(2) + "\n";
    return FAQNET_OK;
  });
}

int faqnet_run(faqnet_session* s, const char* query_path,
               const char* topology_path, const char* protocol,
               const char* semiring, const char* assignment, uint64_t seed,
               const char* out_dir, int capacity_bits, int half_duplex,
               const char** out) {
  return guarded(s, out, [&](std::string& res) {
    LoadedSpec ls = load_spec(query_path, topology_path, semiring);
    if (capacity_bits > 0) ls.t.capacity_bits = capacity_bits;
    ls.t.half_duplex = half_duplex != 0;
    std::string proto = protocol && *protocol ? protocol : "trivial";
    Assignment a =
        resolve_assignment(assignment ? assignment : "", ls.q, ls.t);
    ProtocolResult pr = dispatch(proto, ls.q, ls.t, a, seed);
    std::string verdict = oracle_verdict(ls.q, pr.answer);
    GapReport g = gap_report(ls.q, ls.t, a, pr.rounds);
    g.query_label = fs::path(query_path).stem().string();
    g.topology_label = fs::path(topology_path).stem().string();
    g.protocol_label = proto;
    if (out_dir && *out_dir) {
      fs::create_directories(out_dir);
      fs::path dir(out_dir);
      write_file((dir / "trace.csv").string(), trace_csv(pr.trace, ls.t));
      write_file((dir / "answer.rel").string(),
                 write_relation(pr.answer, ls.vars, ls.q.semiring));
      write_file((dir / "gaps.csv").string(),
                 gap_csv_header() + "\n" + gap_csv_row(g) + "\n");
    }
    json j = {{"protocol", proto},
              {"rounds", pr.rounds},
              {"bound_estimate", pr.bound_estimate},
              {"constant_used", pr.constant_used},
              {"upper", g.upper},
              {"lower", g.lower},
              {"oracle", verdict},
              {"trace_valid", verify_trace(pr.trace, ls.t)},
              {"answer_entries", static_cast<long>(pr.answer.entries.size())}};
    res = j.dump(2) + "\n";
    return verdict == "mismatch" ? FAQNET_ERR_MISMATCH : FAQNET_OK;
  });
}

int faqnet_hard(faqnet_session* s, const char* kind, const char* query_path,
                const char* topology_path, int m, long n, uint64_t seed,
                const char* out_dir, const char** out) {
  return guarded(s, out, [&](std::string& res) {
    LoadedSpec ls = load_spec(query_path, topology_path, "boolean");
    std::string k = kind && *kind ? kind : "forest";
    TribesInstance tr = gen_tribes(m, n, seed, true);
    HardInstance inst;
    if (k == "forest") {
      inst = embed_forest(ls.q.h, tr);
    } else if (k == "core") {
      inst = embed_core(ls.q.h, tr);
    } else if (k == "hypergraph") {
      inst = embed_hypergraph(ls.q.h, md_ghd(ls.q.h, build_gyo_ghd(ls.q.h)), tr);
    } else {
      throw std::invalid_argument("unknown embedding kind '" + k + "'");
    }
    Assignment a = cut_assignment(ls.t, inst);
    std::string verdict = "skipped";
    try {
      Relation r = eval_faq_bruteforce(inst.query, kOracleCap);
      bool nonzero =
          !inst.query.semiring.is_zero(scalar_answer(r, inst.query.semiring));
      verdict = nonzero == inst.tribes.value ? "match" : "mismatch";
    } catch (const std::exception&) {
    }
    json j = {{"kind", k},
              {"m", inst.tribes.m},
              {"n", inst.tribes.n},
              {"effective_n", inst.effective_n},
              {"tribes_value", inst.tribes.value},
              {"s_edges", inst.s_edges},
              {"t_edges", inst.t_edges},
              {"pad_edges", inst.pad_edges},
              {"oracle", verdict}};
    if (out_dir && *out_dir) write_hard_files(out_dir, inst, ls.t, a, ls.vars, j);
    res = j.dump(2) + "\n";
    return verdict == "mismatch" ? FAQNET_ERR_MISMATCH : FAQNET_OK;
  });
}

int faqnet_mcm(faqnet_session* s, int k, int n, const char* variant,
               uint64_t seed, int capacity_bits, const char** out) {
  return guarded(s, out, [&](std::string& res) {
    if (k <= 0 || n <= 0) throw std::invalid_argument("k and n must be positive");
    std::mt19937_64 rng(seed);
    std::vector<bool> x(static_cast<std::size_t>(n));
    for (auto&& b : x) b = rng() & 1;
    std::vector<std::vector<std::vector<bool>>> mats(
        static_cast<std::size_t>(k),
        std::vector<std::vector<bool>>(static_cast<std::size_t>(n),
                                       std::vector<bool>(static_cast<std::size_t>(n))));
    for (auto& mat : mats)
      for (auto& row : mat)
        for (auto&& b : row) b = rng() & 1;
    Topology t = line_topology(k + 2, capacity_bits > 0 ? capacity_bits : 1);
    std::string v = variant && *variant ? variant : "pipeline";
    ProtocolResult pr;
    if (v == "pipeline") {
      pr = matrix_chain(x, mats, t);
    } else if (v == "merge") {
      pr = matrix_chain_merge(x, mats, t);
    } else {
      throw std::invalid_argument("unknown variant '" + v + "'");
    }
    std::vector<bool> want = matrix_chain_direct(x, mats);
    std::vector<bool> got(static_cast<std::size_t>(n), false);
    for (const auto& [tup, val] : pr.answer.entries)
      if (val) got[static_cast<std::size_t>(tup[0])] = true;
    bool ok = got == want;
    json j = {{"variant", v}, {"k", k},       {"n", n},
              {"rounds", pr.rounds},          {"correct", ok},
              {"trace_valid", true}};
    res = j.dump(2) + "\n";
    return ok ? FAQNET_OK : FAQNET_ERR_MISMATCH;
  });
}

int faqnet_bounds(faqnet_session* s, const char* query_path,
                  const char* topology_path, const char* protocol,
                  const char* semiring, const char* assignment, uint64_t seed,
                  int capacity_bits, const char** out) {
  return guarded(s, out, [&](std::string& res) {
    LoadedSpec ls = load_spec(query_path, topology_path, semiring);
    if (capacity_bits > 0) ls.t.capacity_bits = capacity_bits;
    std::string proto = protocol && *protocol ? protocol : "trivial";
    Assignment a =
        resolve_assignment(assignment ? assignment : "", ls.q, ls.t);
    ProtocolResult pr = dispatch(proto, ls.q, ls.t, a, seed);
    GapReport g = gap_report(ls.q, ls.t, a, pr.rounds);
    g.query_label = fs::path(query_path).stem().string();
    g.topology_label = fs::path(topology_path).stem().string();
    g.protocol_label = proto;
    res = gap_csv_header() + "\n" + gap_csv_row(g) + "\n";
    return FAQNET_OK;
  });
}

}  // extern "C"
