#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace faqnet;

namespace {

bool scalar_truth(const FaqQuery& q) {
  Relation r = eval_faq_bruteforce(q);
  return !q.semiring.is_zero(scalar_answer(r, q.semiring));
}

Hypergraph binary_clique(int n, int dom) {
  Hypergraph h;
  for (int v = 0; v < n; ++v) h.domain[v] = dom;
  int id = 1;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) h.edges.push_back({id++, {a, b}});
  return h;
}

}  // namespace

TEST_CASE("upper bound arithmetic") {
  BoundsInput b;
  b.y = 1;
  b.N = 100;
  b.B = 1;
  b.st = {{3, 1}};
  b.mcf_rounds = 0;
  CHECK(upper_bound_bcq(b) == 103);  // ceil(100/1) + 3

  b.st = {{2, 3}, {3, 4}};
  // min(ceil(100/3)+2, ceil(100/4)+3) = min(36, 28) = 28
  CHECK(upper_bound_bcq(b) == 28);

  b.y = 2;
  b.mcf_rounds = 7;
  CHECK(upper_bound_bcq(b) == 2 * 28 + 7);

  b.B = 4;
  b.st = {{3, 1}};
  CHECK(upper_bound_bcq(b) == 2 * (25 + 3) + 7);
}

TEST_CASE("lower bound arithmetic") {
  BoundsInput b;
  b.y = 2;
  b.n2 = 0;
  b.d = 1;
  b.r = 2;
  b.N = 100;
  b.mincut = 1;
  // ceil((y*d + n2) * N / (d*r*mincut)) = ceil(200/2)
  CHECK(lower_bound_bcq(b) == 100);

  b.n2 = 5;
  b.d = 3;
  b.mincut = 2;
  // ceil((2*3+5)*100 / (3*2*2)) = ceil(1100/12) = 92
  CHECK(lower_bound_bcq(b) == 92);
}

TEST_CASE("tribes generator is deterministic and hard mode caps overlap") {
  TribesInstance a = gen_tribes(3, 32, 5, true);
  TribesInstance b = gen_tribes(3, 32, 5, true);
  CHECK(a.pairs == b.pairs);
  CHECK(a.value == b.value);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    TribesInstance tr = gen_tribes(3, 24, seed, true);
    bool expect = true;
    for (const auto& [s, t] : tr.pairs) {
      std::vector<int> inter;
      std::set_intersection(s.begin(), s.end(), t.begin(), t.end(),
                            std::back_inserter(inter));
      CHECK(inter.size() <= 1);
      expect = expect && !inter.empty();
    }
    CHECK(tr.value == expect);
  }
}

TEST_CASE("forest embedding preserves the tribes value") {
  testgen::Rng rng(61);
  for (int i = 0; i < 15; ++i) {
    Hypergraph h = testgen::random_forest(rng);
    int fanout = 0;
    std::map<int, int> deg;
    for (const auto& e : h.edges)
      for (int v : e.vars) fanout = std::max(fanout, ++deg[v]);
    if (fanout < 2) continue;
    TribesInstance tr = gen_tribes(1, 6, i, i % 2 == 0);
    HardInstance inst = embed_forest(h, tr);
    CAPTURE(i);
    CHECK(scalar_truth(inst.query) == tr.value);
    CHECK(inst.s_edges.size() == 1);
    CHECK(inst.t_edges.size() == 1);
  }
}

TEST_CASE("sparse-core embedding uses an independent set") {
  // triangle core: independent-set mode
  Hypergraph tri = binary_clique(3, 4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TribesInstance tr = gen_tribes(1, 10, seed, true);
    HardInstance inst = embed_core(tri, tr);
    CHECK(inst.kind == EmbeddingKind::IndependentSet);
    CHECK(scalar_truth(inst.query) == tr.value);
  }
}

TEST_CASE("dense-core embedding rides vertex-disjoint cycles") {
  // clique on 12 vertices: average pair-degree 11 > 10 switches to cycles
  Hypergraph dense = binary_clique(12, 4);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TribesInstance tr = gen_tribes(2, 9, seed, true);
    HardInstance inst = embed_core(dense, tr);
    CHECK(inst.kind == EmbeddingKind::Cycle);
    CHECK(inst.effective_n == 9);  // 3x3 square
    CHECK(scalar_truth(inst.query) ==
          inst.tribes.value);  // value recomputed over the shrunk universe
  }
}

TEST_CASE("decomposition embedding covers mixed arity") {
  testgen::Rng rng(71);
  int done = 0;
  for (int i = 0; i < 30 && done < 10; ++i) {
    Hypergraph h = testgen::random_acyclic(rng, 7, 3);
    TribesInstance tr = gen_tribes(1, 6, i, true);
    HardInstance inst;
    try {
      inst = embed_hypergraph(h, md_ghd(h, build_gyo_ghd(h)), tr);
    } catch (const std::invalid_argument&) {
      continue;  // too few internal nodes for one pair
    }
    CAPTURE(i);
    CHECK(scalar_truth(inst.query) == tr.value);
    ++done;
  }
  CHECK(done == 10);
}

TEST_CASE("cut assignment separates the set carriers") {
  testgen::Rng rng(83);
  for (int i = 0; i < 10; ++i) {
    Topology t = testgen::random_topology(rng, 7, 2);
    Hypergraph h = testgen::random_forest(rng);
    int fanout = 0;
    std::map<int, int> deg;
    for (const auto& e : h.edges)
      for (int v : e.vars) fanout = std::max(fanout, ++deg[v]);
    if (fanout < 2) continue;
    HardInstance inst = embed_forest(h, gen_tribes(1, 8, i, true));
    Assignment a;
    try {
      a = cut_assignment(t, inst);
    } catch (const std::invalid_argument&) {
      continue;  // all terminals on one witness side
    }
    MinCutResult mc = min_cut(t);
    std::set<int> side_a(mc.side_a.begin(), mc.side_a.end());
    for (int e : inst.s_edges) CHECK(side_a.count(a.owner.at(e)) == 1);
    for (int e : inst.t_edges) CHECK(side_a.count(a.owner.at(e)) == 0);
    for (const auto& [e, p] : a.owner)
      CHECK(std::count(t.terminals.begin(), t.terminals.end(), p) == 1);
  }
}

TEST_CASE("bounds input on the reference star and line") {
  // star query R(A,B..E), line of four players
  FaqQuery q;
  q.semiring = Semiring::boolean();
  for (int v = 0; v < 5; ++v) q.h.domain[v] = 4;
  for (int id = 1; id <= 4; ++id) q.h.edges.push_back({id, {0, id}});
  testgen::Rng rng(1);
  for (const auto& e : q.h.edges)
    q.relations[e.id] = testgen::random_relation(q.h, e, q.semiring, rng, 4);
  Topology t = line_topology(4, 1);
  Assignment a;
  for (int id = 1; id <= 4; ++id) a.owner[id] = id - 1;
  a.answer_player = 1;
  BoundsInput b = bounds_input(q, t, a);
  CHECK(b.y == 1);
  CHECK(b.mincut == 1);
  CHECK(b.r == 2);
  CHECK(b.d == 1);
  CHECK(b.B == 1);
  CHECK(b.st.at(3) == 1);
  CHECK(upper_bound_bcq(b) >= lower_bound_bcq(b));
}

TEST_CASE("gap csv round") {
  GapReport g;
  g.query_label = "q";
  g.topology_label = "t";
  g.protocol_label = "p";
  g.input.y = 1;
  g.input.N = 10;
  g.upper = 13;
  g.lower = 4;
  g.measured = 11;
  g.ratio_up = 11.0 / 13;
  g.ratio_low = 11.0 / 4;
  std::string header = gap_csv_header();
  std::string row = gap_csv_row(g);
  CHECK(std::count(header.begin(), header.end(), ',') ==
        std::count(row.begin(), row.end(), ','));
  CHECK(row.substr(0, 4) == "q,t,");
  CHECK(row.find(",p,") != std::string::npos);
}
