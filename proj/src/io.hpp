#pragma once

#include <stdexcept>

#include "faq.hpp"
#include "topology.hpp"

namespace faqnet {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line(line) {}
  int line;
};

// Variable ids are positions in the .hg `vars` line; names only exist at the
// text-format boundary.
struct NameTable {
  std::vector<std::string> names;
  int id(const std::string& name) const;
  const std::string& name(int id) const;
};

struct ParsedHypergraph {
  Hypergraph h;
  NameTable vars;
  std::vector<int> free_vars;  // optional `free` line
};

ParsedHypergraph parse_hypergraph(const std::string& text);
std::string write_hypergraph(const Hypergraph& h, const NameTable& vars,
                             const std::vector<int>& free_vars = {});

Relation parse_relation(const std::string& text, const NameTable& vars,
                        const Semiring& s);
std::string write_relation(const Relation& r, const NameTable& vars,
                           const Semiring& s);

Topology parse_topology(const std::string& text);
std::string write_topology(const Topology& t);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Loads `<dir>/<name>.hg` plus one `e<id>.rel` per hyperedge from the same
// directory (dir defaults to the .hg file's parent).
FaqQuery load_query(const std::string& hg_path, const Semiring& s,
                    NameTable* vars_out = nullptr);

}  // namespace faqnet
