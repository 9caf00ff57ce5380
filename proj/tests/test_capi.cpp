#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "faqnet.h"

namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path dir;
  std::string hg, topo;

  Fixture() {
    dir = fs::temp_directory_path() / "faqnet_capi_test";
    fs::create_directories(dir);
    write("q.hg",
          "vars A:4 B:4 C:4\n"
          "edge e1 A B\n"
          "edge e2 A C\n");
    write("e1.rel", "A,B\n4,4\n0,1|1\n1,2|1\n");
    write("e2.rel", "A,C\n4,4\n0,3|1\n2,2|1\n");
    write("g.topo",
          "P1 P2 P3\n"
          "terminals P1 P2 P3\n"
          "edge P1 P2\n"
          "edge P2 P3\n"
          "capacity 4\n");
    hg = (dir / "q.hg").string();
    topo = (dir / "g.topo").string();
  }
  ~Fixture() { fs::remove_all(dir); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream(dir / name) << content;
  }
};

bool contains(const char* hay, const std::string& needle) {
  return hay && std::string(hay).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("analyze over the C surface") {
  Fixture f;
  faqnet_session* s = faqnet_session_new();
  const char* out = nullptr;
  int rc = faqnet_analyze(s, f.hg.c_str(), f.topo.c_str(), "boolean", &out);
  CHECK(rc == FAQNET_OK);
  CHECK(contains(out, "\"acyclic\": true"));
  CHECK(contains(out, "\"y\": 1"));
  CHECK(std::string(faqnet_last_error(s)).empty());
  faqnet_session_free(s);
}

TEST_CASE("run writes artifacts and reports an oracle match") {
  Fixture f;
  faqnet_session* s = faqnet_session_new();
  const char* out = nullptr;
  fs::path outdir = f.dir / "run_out";
  int rc = faqnet_run(s, f.hg.c_str(), f.topo.c_str(), "star_bcq", "boolean",
                      "round-robin", 1, outdir.string().c_str(), 0, 0, &out);
  CHECK(rc == FAQNET_OK);
  CHECK(contains(out, "\"oracle\": \"match\""));
  CHECK(fs::exists(outdir / "trace.csv"));
  CHECK(fs::exists(outdir / "answer.rel"));
  CHECK(fs::exists(outdir / "gaps.csv"));
  faqnet_session_free(s);
}

TEST_CASE("error codes distinguish parse from incompatibility") {
  Fixture f;
  faqnet_session* s = faqnet_session_new();
  const char* out = nullptr;
  CHECK(faqnet_analyze(s, "/nonexistent.hg", f.topo.c_str(), "boolean", &out) ==
        FAQNET_ERR_PARSE);
  CHECK(!std::string(faqnet_last_error(s)).empty());
  CHECK(faqnet_run(s, f.hg.c_str(), f.topo.c_str(), "no_such_protocol",
                   "boolean", "round-robin", 0, nullptr, 0, 0,
                   &out) == FAQNET_ERR_INCOMPATIBLE);
  // a malformed query file is a parse error
  f.write("bad.hg", "edge e1 A\n");
  CHECK(faqnet_analyze(s, (f.dir / "bad.hg").string().c_str(), f.topo.c_str(),
                       "boolean", &out) == FAQNET_ERR_PARSE);
  faqnet_session_free(s);
}

TEST_CASE("mcm over the C surface") {
  faqnet_session* s = faqnet_session_new();
  const char* out = nullptr;
  CHECK(faqnet_mcm(s, 4, 8, "pipeline", 3, 8, &out) == FAQNET_OK);
  CHECK(contains(out, "\"correct\": true"));
  CHECK(faqnet_mcm(s, 4, 8, "zigzag", 3, 8, &out) == FAQNET_ERR_INCOMPATIBLE);
  faqnet_session_free(s);
}

TEST_CASE("bounds returns a csv row") {
  Fixture f;
  faqnet_session* s = faqnet_session_new();
  const char* out = nullptr;
  int rc = faqnet_bounds(s, f.hg.c_str(), f.topo.c_str(), "trivial", "boolean",
                         "round-robin", 0, 0, &out);
  CHECK(rc == FAQNET_OK);
  CHECK(contains(out, "query,topology,"));
  CHECK(contains(out, ",trivial,"));
  faqnet_session_free(s);
}

TEST_CASE("hard generates a verified instance") {
  Fixture f;
  // a star with two leaves sharing A gives one degree-2 vertex for the pair
  faqnet_session* s = faqnet_session_new();
  const char* out = nullptr;
  fs::path outdir = f.dir / "hard_out";
  int rc = faqnet_hard(s, "forest", f.hg.c_str(), f.topo.c_str(), 1, 8, 5,
                       outdir.string().c_str(), &out);
  CHECK(rc == FAQNET_OK);
  CHECK(contains(out, "\"oracle\": \"match\""));
  CHECK(fs::exists(outdir / "query.hg"));
  CHECK(fs::exists(outdir / "owners.assign"));
  CHECK(fs::exists(outdir / "instance.json"));
  faqnet_session_free(s);
}
