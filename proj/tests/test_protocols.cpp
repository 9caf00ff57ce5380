#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace faqnet;

namespace {

Topology clique(int n, int bits) {
  Topology t;
  for (int i = 0; i < n; ++i) t.names.push_back("P" + std::to_string(i + 1));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) t.edges.emplace_back(a, b);
  for (int i = 0; i < n; ++i) t.terminals.push_back(i);
  t.capacity_bits = bits;
  return t;
}

// four matching unary relations over one shared variable, |each| = n
FaqQuery chain_query(int n) {
  FaqQuery q;
  q.semiring = Semiring::boolean();
  q.h.domain[0] = n;
  for (int id = 1; id <= 4; ++id) q.h.edges.push_back({id, {0}});
  Relation r;
  r.attrs = {0};
  r.domain_sizes = {n};
  for (int v = 0; v < n; ++v) r.entries.push_back({{v}, 1});
  r.normalize(q.semiring);
  for (int id = 1; id <= 4; ++id) q.relations[id] = r;
  return q;
}

Assignment path_assignment() {
  Assignment a;
  for (int id = 1; id <= 4; ++id) a.owner[id] = id - 1;
  a.answer_player = 3;
  return a;
}

}  // namespace

TEST_CASE("streaming chain takes N+2 rounds on the line") {
  for (int n : {8, 32, 128}) {
    Topology t = line_topology(4, 16);
    FaqQuery q = chain_query(n);
    ProtocolResult r = line_pipeline_bcq(q, t, path_assignment());
    CHECK(r.rounds == n + 2);
    CHECK(scalar_answer(r.answer, q.semiring) == 1);
    CHECK(verify_trace(r.trace, t));
  }
}

TEST_CASE("split chain takes N/2+2 rounds on the clique") {
  for (int n : {8, 32}) {
    Topology t = clique(4, 16);
    FaqQuery q = chain_query(n);
    ProtocolResult r = line_pipeline_bcq(q, t, path_assignment());
    CHECK(r.rounds == n / 2 + 2);
    CHECK(scalar_answer(r.answer, q.semiring) == 1);
    CHECK(verify_trace(r.trace, t));
  }
}

TEST_CASE("an empty head relation drains in path-length rounds") {
  Topology t = line_topology(4, 16);
  FaqQuery q = chain_query(8);
  q.relations[1].entries.clear();
  ProtocolResult r = line_pipeline_bcq(q, t, path_assignment());
  CHECK(scalar_answer(r.answer, q.semiring) == 0);
  CHECK(r.rounds == 3);
}

TEST_CASE("each protocol matches the brute-force oracle") {
  for (const char* p : {"trivial", "star_bcq", "forest_bcq", "general_bcq",
                        "star_faq", "faq_ss", "split_star_faq"}) {
    CAPTURE(p);
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      CAPTURE(seed);
      testgen::OracleRun r = testgen::oracle_run(p, seed);
      CHECK_MESSAGE(r.ok, r.why);
    }
  }
}

TEST_CASE("star FAQ under the boolean semiring equals star BCQ") {
  testgen::Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    FaqQuery q = testgen::make_query(testgen::random_star(rng),
                                     Semiring::boolean(), rng, 6);
    Topology t = testgen::random_topology(rng, 6, 2);
    Assignment a = testgen::random_assignment(q, t, rng);
    ProtocolResult fa = star_faq(q, build_gyo_ghd(q.h), t, a);
    ProtocolResult bc = star_bcq(q, t, a);
    CHECK(relations_equal(fa.answer, bc.answer));
  }
}

TEST_CASE("hash-split star agrees with the unsplit protocol") {
  testgen::Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    FaqQuery q = testgen::make_query(testgen::random_star(rng),
                                     testgen::random_semiring(rng), rng, 6);
    Topology t = testgen::random_topology(rng, 6, 2);
    Assignment a = testgen::random_assignment(q, t, rng);
    auto hash = consistent_hash_family(
        q.h, build_gyo_ghd(q.h), static_cast<int>(t.terminals.size()), rng());
    REQUIRE(hash_family_consistent(hash, q));
    ProtocolResult split = split_star_faq(q, t, hash);
    ProtocolResult whole = star_faq(q, build_gyo_ghd(q.h), t, a);
    CHECK(relations_equal(split.answer, whole.answer));
  }
}

TEST_CASE("hash shards are balanced for distinct keys") {
  testgen::Rng rng(13);
  FaqQuery q = testgen::make_query(testgen::random_star(rng),
                                   Semiring::boolean(), rng, 8);
  auto hash = consistent_hash_family(q.h, build_gyo_ghd(q.h), 3, 99);
  for (const auto& [e, rel] : q.relations) {
    std::map<int, int> load;
    std::set<Tuple> keys;
    for (const auto& [tup, v] : rel.entries) {
      Tuple key = project_tuple(rel, tup, hash.interface_attrs.at(e));
      if (keys.insert(key).second) ++load[hash.shard(rel, tup, e)];
    }
    if (keys.size() < 3) continue;
    int lo = 1 << 30, hi = 0;
    for (int p = 0; p < 3; ++p) {
      lo = std::min(lo, load[p]);
      hi = std::max(hi, load[p]);
    }
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("set intersection convergecast") {
  Topology t = clique(4, 2);
  std::map<int, std::vector<bool>> vecs;
  for (int p = 0; p < 4; ++p)
    vecs[p] = {true, p != 2, false, true, p % 2 == 0};
  ProtocolResult r = set_intersection_protocol(vecs, t, 0);
  std::vector<int> survivors;
  for (const auto& [tup, v] : r.answer.entries) survivors.push_back(tup[0]);
  CHECK(survivors == std::vector<int>{0, 3});
  CHECK(verify_trace(r.trace, t));
}

TEST_CASE("trivial protocol succeeds on arbitrary instances") {
  testgen::Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    FaqQuery q = testgen::make_query(testgen::random_any(rng),
                                     testgen::random_semiring(rng), rng, 6);
    Topology t = testgen::random_topology(rng, 6, 1);
    Assignment a = testgen::random_assignment(q, t, rng);
    ProtocolResult r = trivial_protocol(q, t, a);
    CHECK(relations_equal(r.answer, eval_faq_bruteforce(q)));
  }
}

TEST_CASE("matrix chain doubles rounds when the chain doubles") {
  std::map<int, long> rounds;
  testgen::Rng rng(21);
  for (int k : {4, 8, 16}) {
    std::vector<bool> x(8);
    for (auto&& b : x) b = rng() % 2;
    std::vector<std::vector<std::vector<bool>>> mats(
        k, std::vector<std::vector<bool>>(8, std::vector<bool>(8)));
    for (auto& m : mats)
      for (auto& row : m)
        for (auto&& b : row) b = rng() % 2;
    ProtocolResult r = matrix_chain(x, mats, line_topology(k + 2, 8));
    std::vector<bool> want = matrix_chain_direct(x, mats);
    std::vector<bool> got(8, false);
    for (const auto& [tup, v] : r.answer.entries) got[tup[0]] = true;
    CHECK(got == want);
    rounds[k] = r.rounds;
  }
  auto ratio = [&](int k) {
    return static_cast<double>(rounds[2 * k]) / rounds[k];
  };
  CHECK(ratio(4) >= 1.8);
  CHECK(ratio(4) <= 2.2);
  CHECK(ratio(8) >= 1.8);
  CHECK(ratio(8) <= 2.2);
}

TEST_CASE("pairwise merge beats the pipeline on long thin chains") {
  testgen::Rng rng(33);
  int k = 64, n = 4;
  std::vector<bool> x(n);
  for (auto&& b : x) b = rng() % 2;
  std::vector<std::vector<std::vector<bool>>> mats(
      k, std::vector<std::vector<bool>>(n, std::vector<bool>(n)));
  for (auto& m : mats)
    for (auto& row : m)
      for (auto&& b : row) b = rng() % 2;
  Topology t = line_topology(k + 2, 1);
  ProtocolResult pipe = matrix_chain(x, mats, t);
  ProtocolResult merge = matrix_chain_merge(x, mats, t);
  std::vector<bool> want = matrix_chain_direct(x, mats);
  for (const ProtocolResult* r : {&pipe, &merge}) {
    std::vector<bool> got(n, false);
    for (const auto& [tup, v] : r->answer.entries) got[tup[0]] = true;
    CHECK(got == want);
  }
  CHECK(merge.rounds < pipe.rounds);
}

TEST_CASE("identity chain returns the input vector") {
  int n = 6, k = 3;
  std::vector<bool> x = {true, false, true, true, false, false};
  std::vector<std::vector<std::vector<bool>>> mats(
      k, std::vector<std::vector<bool>>(n, std::vector<bool>(n, false)));
  for (auto& m : mats)
    for (int i = 0; i < n; ++i) m[i][i] = true;
  ProtocolResult r = matrix_chain(x, mats, line_topology(k + 2, 4));
  std::vector<bool> got(n, false);
  for (const auto& [tup, v] : r.answer.entries) got[tup[0]] = true;
  CHECK(got == x);
}
