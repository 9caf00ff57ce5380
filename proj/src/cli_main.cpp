#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "faqnet.h"

namespace {

struct Opts {
  std::string query, topology, protocol = "trivial", semiring = "boolean";
  std::string assignment = "round-robin", out, duplex = "full";
  std::string kind = "forest", variant = "pipeline";
  std::uint64_t seed = 0;
  int capacity_bits = 0;  // 0 = keep the .topo value
  int m = 2;
  long n = 16;
  int k = 4, dim = 8;
};

int finish(faqnet_session* s, int rc, const char* out) {
  if (out && *out) std::fputs(out, stdout);
  if (rc != 0) {
    const char* msg = faqnet_last_error(s);
    if (msg && *msg) std::fprintf(stderr, "error: %s\n", msg);
  }
  faqnet_session_free(s);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed join-query round experiments"};
  app.require_subcommand(1);
  Opts o;

  auto add_common = [&](CLI::App* c, bool needs_query) {
    auto* q = c->add_option("--query", o.query, "hypergraph file (.hg)");
    auto* t = c->add_option("--topology", o.topology, "network file (.topo)");
    if (needs_query) {
      q->required();
      t->required();
    }
    c->add_option("--capacity-bits", o.capacity_bits,
                  "override per-edge bits per round");
    c->add_option("--duplex", o.duplex, "full or half")
        ->check(CLI::IsMember({"full", "half"}));
    c->add_option("--seed", o.seed, "rng seed");
  };

  auto* analyze = app.add_subcommand("analyze", "query/topology structure report");
  add_common(analyze, true);
  analyze->add_option("--semiring", o.semiring, "boolean|counting|f2|min_plus");

  auto* run = app.add_subcommand("run", "simulate a protocol");
  add_common(run, true);
  run->add_option("--protocol", o.protocol,
                  "trivial|line_pipeline|star_bcq|forest_bcq|general_bcq|"
                  "star_faq|faq_ss|split_star_faq");
  run->add_option("--semiring", o.semiring, "boolean|counting|f2|min_plus");
  run->add_option("--assignment", o.assignment,
                  "file path, worst-case-cut, or round-robin");
  run->add_option("--out", o.out, "directory for trace/answer/gap files");

  auto* hard = app.add_subcommand("hard", "generate a hard instance");
  add_common(hard, true);
  hard->add_option("--kind", o.kind, "forest|core|hypergraph");
  hard->add_option("-m", o.m, "number of set pairs");
  hard->add_option("-n", o.n, "set universe size");
  hard->add_option("--out", o.out, "directory for instance files");

  auto* mcm = app.add_subcommand("mcm", "GF(2) matrix-chain benchmark");
  mcm->add_option("-k", o.k, "chain length")->required();
  mcm->add_option("-n", o.dim, "matrix dimension")->required();
  mcm->add_option("--variant", o.variant, "pipeline|merge");
  mcm->add_option("--capacity-bits", o.capacity_bits, "bits per edge per round");
  mcm->add_option("--seed", o.seed, "rng seed");

  auto* bounds = app.add_subcommand("bounds", "gap-report CSV row");
  add_common(bounds, true);
  bounds->add_option("--protocol", o.protocol, "protocol to measure");
  bounds->add_option("--semiring", o.semiring, "boolean|counting|f2|min_plus");
  bounds->add_option("--assignment", o.assignment,
                     "file path, worst-case-cut, or round-robin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : FAQNET_ERR_PARSE;
  }

  faqnet_session* s = faqnet_session_new();
  const char* out = nullptr;
  int half = o.duplex == "half" ? 1 : 0;

  int rc = FAQNET_ERR_PARSE;
  if (analyze->parsed()) {
    rc = faqnet_analyze(s, o.query.c_str(), o.topology.c_str(),
                        o.semiring.c_str(), &out);
  } else if (run->parsed()) {
    rc = faqnet_run(s, o.query.c_str(), o.topology.c_str(), o.protocol.c_str(),
                    o.semiring.c_str(), o.assignment.c_str(), o.seed,
                    o.out.empty() ? nullptr : o.out.c_str(), o.capacity_bits,
                    half, &out);
  } else if (hard->parsed()) {
    rc = faqnet_hard(s, o.kind.c_str(), o.query.c_str(), o.topology.c_str(),
                     o.m, o.n, o.seed, o.out.empty() ? nullptr : o.out.c_str(),
                     &out);
  } else if (mcm->parsed()) {
    rc = faqnet_mcm(s, o.k, o.dim, o.variant.c_str(), o.seed,
                    o.capacity_bits > 0 ? o.capacity_bits : 1, &out);
  } else if (bounds->parsed()) {
    rc = faqnet_bounds(s, o.query.c_str(), o.topology.c_str(),
                       o.protocol.c_str(), o.semiring.c_str(),
                       o.assignment.c_str(), o.seed, o.capacity_bits, &out);
  }
  return finish(s, rc, out);
}
