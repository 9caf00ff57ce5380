#include "io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace faqnet {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string& tok, int line) {
  try {
    std::size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected an integer, got '" + tok + "'", line);
  }
}

int parse_edge_id(const std::string& tok, int line) {
  std::string t = tok;
  if (!t.empty() && (t[0] == 'e' || t[0] == 'E')) t = t.substr(1);
  return parse_int(t, line);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

bool skippable(const std::string& line) {
  std::string t = trim(line);
  return t.empty() || t[0] == '#';
}

}  // namespace

int NameTable::id(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end())
    throw std::invalid_argument("unknown variable '" + name + "'");
  return static_cast<int>(it - names.begin());
}

const std::string& NameTable::name(int id) const {
  if (id < 0 || id >= static_cast<int>(names.size()))
    throw std::invalid_argument("variable id out of range");
  return names[static_cast<std::size_t>(id)];
}

ParsedHypergraph parse_hypergraph(const std::string& text) {
  ParsedHypergraph out;
  bool saw_vars = false;
  int ln = 0;
  for (const std::string& raw : lines_of(text)) {
    ++ln;
    if (skippable(raw)) continue;
    auto toks = split_ws(raw);
    if (toks[0] == "vars") {
      if (saw_vars) throw ParseError("duplicate vars line", ln);
      saw_vars = true;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        auto parts = split_on(toks[i], ':');
        if (parts.size() != 2)
          throw ParseError("expected name:domain, got '" + toks[i] + "'", ln);
        int dom = parse_int(parts[1], ln);
        if (dom <= 0) throw ParseError("domain size must be positive", ln);
        out.vars.names.push_back(parts[0]);
        out.h.domain[static_cast<int>(out.vars.names.size()) - 1] = dom;
      }
    } else if (toks[0] == "edge") {
      if (!saw_vars) throw ParseError("edge before vars line", ln);
      if (toks.size() < 3) throw ParseError("edge needs an id and variables", ln);
      Hyperedge e;
      e.id = parse_edge_id(toks[1], ln);
      for (std::size_t i = 2; i < toks.size(); ++i) {
        try {
          e.vars.push_back(out.vars.id(toks[i]));
        } catch (const std::exception& ex) {
          throw ParseError(ex.what(), ln);
        }
      }
      std::sort(e.vars.begin(), e.vars.end());
      e.vars.erase(std::unique(e.vars.begin(), e.vars.end()), e.vars.end());
      out.h.edges.push_back(std::move(e));
    } else if (toks[0] == "free") {
      for (std::size_t i = 1; i < toks.size(); ++i) {
        try {
          out.free_vars.push_back(out.vars.id(toks[i]));
        } catch (const std::exception& ex) {
          throw ParseError(ex.what(), ln);
        }
      }
      std::sort(out.free_vars.begin(), out.free_vars.end());
    } else {
      throw ParseError("unknown directive '" + toks[0] + "'", ln);
    }
  }
  if (!saw_vars) throw ParseError("missing vars line", 1);
  try {
    out.h.validate();
  } catch (const std::exception& ex) {
    throw ParseError(ex.what(), ln);
  }
  return out;
}

std::string write_hypergraph(const Hypergraph& h, const NameTable& vars,
                             const std::vector<int>& free_vars) {
  std::ostringstream os;
  os << "vars";
  for (std::size_t i = 0; i < vars.names.size(); ++i)
    os << " " << vars.names[i] << ":" << h.domain.at(static_cast<int>(i));
  os << "\n";
  for (const auto& e : h.edges) {
    os << "edge e" << e.id;
    for (int v : e.vars) os << " " << vars.name(v);
    os << "\n";
  }
  if (!free_vars.empty()) {
    os << "free";
    for (int v : free_vars) os << " " << vars.name(v);
    os << "\n";
  }
  return os.str();
}

Relation parse_relation(const std::string& text, const NameTable& vars,
                        const Semiring& s) {
  Relation r;
  int ln = 0, stage = 0;
  for (const std::string& raw : lines_of(text)) {
    ++ln;
    std::string t0 = trim(raw);
    if (!t0.empty() && t0[0] == '#') continue;
    // the two header lines may legitimately be empty (nullary relation)
    if (stage == 2 && t0.empty()) continue;
    if (stage == 0) {
      if (!t0.empty())
        for (const auto& tok : split_on(t0, ',')) {
          try {
            r.attrs.push_back(vars.id(trim(tok)));
          } catch (const std::exception& ex) {
            throw ParseError(ex.what(), ln);
          }
        }
      stage = 1;
    } else if (stage == 1) {
      if (!t0.empty())
        for (const auto& tok : split_on(t0, ','))
          r.domain_sizes.push_back(parse_int(trim(tok), ln));
      if (r.domain_sizes.size() != r.attrs.size())
        throw ParseError("domain count does not match attribute count", ln);
      stage = 2;
    } else {
      auto parts = split_on(raw, '|');
      if (parts.size() != 2)
        throw ParseError("expected 'v1,...,vk|value'", ln);
      Tuple t;
      std::string key = trim(parts[0]);
      if (!key.empty())
        for (const auto& tok : split_on(key, ','))
          t.push_back(parse_int(trim(tok), ln));
      if (t.size() != r.attrs.size())
        throw ParseError("tuple arity mismatch", ln);
      Value v;
      try {
        v = s.parse(trim(parts[1]));
      } catch (const std::exception& ex) {
        throw ParseError(ex.what(), ln);
      }
      r.entries.push_back({std::move(t), v});
    }
  }
  if (stage < 2) throw ParseError("relation file needs attribute and domain lines", ln);
  try {
    r.normalize(s);
  } catch (const std::exception& ex) {
    throw ParseError(ex.what(), ln);
  }
  return r;
}

std::string write_relation(const Relation& r, const NameTable& vars,
                           const Semiring& s) {
  std::ostringstream os;
  for (std::size_t i = 0; i < r.attrs.size(); ++i)
    os << (i ? "," : "") << vars.name(r.attrs[i]);
  os << "\n";
  for (std::size_t i = 0; i < r.domain_sizes.size(); ++i)
    os << (i ? "," : "") << r.domain_sizes[i];
  os << "\n";
  for (const auto& [t, v] : r.entries) {
    for (std::size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i];
    os << "|" << s.format(v) << "\n";
  }
  return os.str();
}

Topology parse_topology(const std::string& text) {
  Topology t;
  t.capacity_bits = 1;
  int ln = 0;
  bool saw_nodes = false, saw_terminals = false;
  for (const std::string& raw : lines_of(text)) {
    ++ln;
    if (skippable(raw)) continue;
    auto toks = split_ws(raw);
    if (!saw_nodes) {
      t.names = toks;
      saw_nodes = true;
      continue;
    }
    auto pl = [&](const std::string& name) {
      try {
        return t.player(name);
      } catch (const std::exception&) {
        throw ParseError("unknown node '" + name + "'", ln);
      }
    };
    if (toks[0] == "terminals") {
      saw_terminals = true;
      for (std::size_t i = 1; i < toks.size(); ++i)
        t.terminals.push_back(pl(toks[i]));
      std::sort(t.terminals.begin(), t.terminals.end());
      t.terminals.erase(std::unique(t.terminals.begin(), t.terminals.end()),
                        t.terminals.end());
    } else if (toks[0] == "edge") {
      if (toks.size() != 3) throw ParseError("edge needs two endpoints", ln);
      int a = pl(toks[1]), b = pl(toks[2]);
      if (a == b) throw ParseError("self loop", ln);
      t.edges.emplace_back(std::min(a, b), std::max(a, b));
    } else if (toks[0] == "capacity") {
      if (toks.size() != 2) throw ParseError("capacity needs one value", ln);
      t.capacity_bits = parse_int(toks[1], ln);
      if (t.capacity_bits <= 0) throw ParseError("capacity must be positive", ln);
    } else {
      throw ParseError("unknown directive '" + toks[0] + "'", ln);
    }
  }
  if (!saw_nodes) throw ParseError("missing node-name line", 1);
  if (!saw_terminals) throw ParseError("missing terminals line", ln);
  std::sort(t.edges.begin(), t.edges.end());
  t.edges.erase(std::unique(t.edges.begin(), t.edges.end()), t.edges.end());
  try {
    t.validate();
  } catch (const std::exception& ex) {
    throw ParseError(ex.what(), ln);
  }
  return t;
}

std::string write_topology(const Topology& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.names.size(); ++i)
    os << (i ? " " : "") << t.names[i];
  os << "\nterminals";
  for (int p : t.terminals) os << " " << t.names[static_cast<std::size_t>(p)];
  os << "\n";
  for (auto [a, b] : t.edges)
    os << "edge " << t.names[static_cast<std::size_t>(a)] << " "
       << t.names[static_cast<std::size_t>(b)] << "\n";
  os << "capacity " << t.capacity_bits << "\n";
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

FaqQuery load_query(const std::string& hg_path, const Semiring& s,
                    NameTable* vars_out) {
  namespace fs = std::filesystem;
  ParsedHypergraph ph = parse_hypergraph(read_file(hg_path));
  FaqQuery q;
  q.h = ph.h;
  q.free_vars = ph.free_vars;
  q.semiring = s;
  fs::path dir = fs::path(hg_path).parent_path();
  for (const auto& e : q.h.edges) {
    fs::path rel = dir / ("e" + std::to_string(e.id) + ".rel");
    q.relations[e.id] = parse_relation(read_file(rel.string()), ph.vars, s);
  }
  if (vars_out) *vars_out = ph.vars;
  q.validate();
  return q;
}

}  // namespace faqnet
