#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "helpers.hpp"
#include "io.hpp"

using namespace faqnet;
namespace fs = std::filesystem;

namespace {

NameTable letters(int n) {
  NameTable t;
  for (int i = 0; i < n; ++i) t.names.push_back(std::string(1, 'A' + i));
  return t;
}

}  // namespace

TEST_CASE("hypergraph text round-trips byte for byte") {
  std::string text =
      "vars A:4 B:4 C:2\n"
      "edge e1 A B\n"
      "edge e2 B C\n"
      "free A\n";
  ParsedHypergraph p = parse_hypergraph(text);
  CHECK(p.vars.names == std::vector<std::string>{"A", "B", "C"});
  CHECK(p.h.k() == 2);
  CHECK(p.free_vars == std::vector<int>{0});
  CHECK(write_hypergraph(p.h, p.vars, p.free_vars) == text);
  // comments and blank lines are tolerated on the way in
  ParsedHypergraph q =
      parse_hypergraph("# q\n\nvars A:4 B:4 C:2\nedge e1 A B\nedge e2 B C\nfree A\n");
  CHECK(write_hypergraph(q.h, q.vars, q.free_vars) == text);
}

TEST_CASE("hypergraph parse errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    try {
      parse_hypergraph(text);
    } catch (const ParseError& e) {
      return e.line;
    }
    return -1;
  };
  CHECK(line_of("vars A\n") == 1);              // missing domain
  CHECK(line_of("vars A:4\nedge e1 B\n") == 2); // unknown variable
  CHECK(line_of("edge e1 A\n") == 1);           // edge before vars
  CHECK(line_of("vars A:4\nbogus x\n") == 2);
  CHECK(line_of("vars A:0\n") == 1);            // empty domain
}

TEST_CASE("relation text round-trips") {
  NameTable vars = letters(3);
  const Semiring& s = Semiring::counting();
  std::string text =
      "A,C\n"
      "3,4\n"
      "0,1|2\n"
      "2,3|7\n";
  Relation r = parse_relation(text, vars, s);
  CHECK(r.attrs == std::vector<int>{0, 2});
  CHECK(r.size() == 2);
  CHECK(write_relation(r, vars, s) == text);

  // unsorted rows normalize to the same bytes
  Relation r2 = parse_relation("A,C\n3,4\n2,3|7\n0,1|2\n", vars, s);
  CHECK(write_relation(r2, vars, s) == text);

  // nullary scalar relation
  Relation r0 = parse_relation("\n\n|5\n", vars, s);
  CHECK(r0.arity() == 0);
  CHECK(r0.entries.at(0).second == 5);
}

TEST_CASE("relation parse errors") {
  NameTable vars = letters(2);
  const Semiring& s = Semiring::boolean();
  auto line_of = [&](const std::string& text) {
    try {
      parse_relation(text, vars, s);
    } catch (const ParseError& e) {
      return e.line;
    }
    return -1;
  };
  CHECK(line_of("A\n2\n0,1|1\n") == 3);   // arity mismatch
  CHECK(line_of("A\n2\n5|1\n") == 3);     // out of domain
  CHECK(line_of("A\n2\n0|banana\n") == 3);
  CHECK(line_of("Z\n2\n") == 1);          // unknown attribute
  CHECK(line_of("A\n2,2\n") == 2);        // domain count mismatch
  CHECK(line_of("A\n") == 1);             // truncated file
}

TEST_CASE("topology text round-trips") {
  std::string text =
      "P1 P2 P3\n"
      "terminals P1 P3\n"
      "edge P1 P2\n"
      "edge P2 P3\n"
      "capacity 4\n";
  Topology t = parse_topology(text);
  CHECK(t.n() == 3);
  CHECK(t.terminals == std::vector<int>{0, 2});
  CHECK(t.capacity_bits == 4);
  CHECK(write_topology(t) == text);
  CHECK_THROWS_AS(parse_topology("P1 P2\nterminals P1\nedge P1 P9\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_topology("P1 P2\nedge P1 P2\n"), ParseError);  // no terminals
  CHECK_THROWS_AS(parse_topology("P1 P2\nterminals P1\nedge P1 P1\n"),
                  ParseError);
}

TEST_CASE("load_query reads one relation file per edge") {
  fs::path dir = fs::temp_directory_path() / "faqnet_io_test";
  fs::create_directories(dir);
  const Semiring& s = Semiring::boolean();
  write_file((dir / "q.hg").string(),
             "vars A:3 B:3\nedge e1 A B\nedge e2 B\n");
  write_file((dir / "e1.rel").string(), "A,B\n3,3\n0,1|1\n1,1|1\n");
  write_file((dir / "e2.rel").string(), "B\n3\n1|1\n");
  NameTable vars;
  FaqQuery q = load_query((dir / "q.hg").string(), s, &vars);
  CHECK(q.h.k() == 2);
  CHECK(q.relations.at(1).size() == 2);
  CHECK(q.relations.at(2).size() == 1);
  CHECK(vars.name(1) == "B");
  Relation ans = eval_faq_bruteforce(q);
  CHECK(scalar_answer(ans, s) == 1);

  fs::remove(dir / "e2.rel");
  CHECK_THROWS(load_query((dir / "q.hg").string(), s));
  fs::remove_all(dir);
}

TEST_CASE("random instances survive write/parse/write") {
  testgen::Rng rng(2024);
  for (int i = 0; i < 40; ++i) {
    Hypergraph h = testgen::random_any(rng);
    NameTable vars = letters(static_cast<int>(h.domain.size()));
    std::vector<int> fv;
    std::string hg = write_hypergraph(h, vars, fv);
    ParsedHypergraph back = parse_hypergraph(hg);
    CHECK(write_hypergraph(back.h, back.vars, back.free_vars) == hg);

    const Semiring& s = testgen::random_semiring(rng);
    for (const auto& e : h.edges) {
      Relation r = testgen::random_relation(h, e, s, rng, 6);
      std::string text = write_relation(r, vars, s);
      CHECK(write_relation(parse_relation(text, vars, s), vars, s) == text);
    }

    Topology t = testgen::random_topology(rng, 6, 1);
    std::string topo = write_topology(t);
    CHECK(write_topology(parse_topology(topo)) == topo);
  }
}
