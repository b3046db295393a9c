#pragma once

#include <charconv>
#include <limits>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "deepwl/structure.hpp"

namespace dwl {

inline constexpr std::string_view kStructureHeader = "deepwl-structure v1";

namespace detail {

inline std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

inline std::uint64_t parse_count(std::string_view tok, std::size_t line) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, "expected a non-negative integer, got '" + std::string(tok) + "'");
  return value;
}

inline Symbol parse_symbol(std::string_view tok, std::size_t line) {
  if (tok != "-")
    for (char c : tok)
      if (c != '0' && c != '1') throw ParseError(line, "symbol must be '-' or a binary string, got '" + std::string(tok) + "'");
  return Symbol::from_text(tok);
}

}  // namespace detail

inline Structure load_structure(std::string_view text) {
  std::map<Symbol, std::vector<VertexPair>> rels;
  std::optional<std::uint64_t> n;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = detail::split_tokens(line);
    if (tok.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!header_seen) {
      if (tok.size() != 2 || tok[0] != "deepwl-structure" || tok[1] != "v1")
        throw ParseError(line_no, "expected header 'deepwl-structure v1'");
      header_seen = true;
    } else if (tok[0] == "rel") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'rel <bits>'");
      Symbol s = detail::parse_symbol(tok[1], line_no);
      if (!rels.emplace(s, std::vector<VertexPair>{}).second)
        throw ParseError(line_no, "duplicate relation symbol " + s.text());
    } else if (tok[0] == "n") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'n <count>'");
      if (n) throw ParseError(line_no, "vertex count given twice");
      n = detail::parse_count(tok[1], line_no);
      if (*n > std::numeric_limits<Vertex>::max()) throw ParseError(line_no, "vertex count too large");
    } else if (tok[0] == "edge") {
      if (tok.size() != 4) throw ParseError(line_no, "expected 'edge <bits> <u> <v>'");
      if (!n) throw ParseError(line_no, "edge before vertex count");
      Symbol s = detail::parse_symbol(tok[1], line_no);
      auto it = rels.find(s);
      if (it == rels.end()) throw ParseError(line_no, "edge under undeclared symbol " + s.text());
      auto u = detail::parse_count(tok[2], line_no), v = detail::parse_count(tok[3], line_no);
      if (u >= *n || v >= *n) throw ParseError(line_no, "vertex index out of range (n=" + std::to_string(*n) + ")");
      it->second.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
    } else {
      throw ParseError(line_no, "unknown directive '" + std::string(tok[0]) + "'");
    }
    if (end == text.size()) break;
  }
  if (!header_seen) throw ParseError(line_no == 0 ? 1 : line_no, "missing header 'deepwl-structure v1'");
  if (!n) throw ParseError(line_no, "missing vertex count");
  std::map<Symbol, Relation> out;
  for (auto& [s, pairs] : rels) out.emplace(s, make_relation(std::move(pairs)));
  return Structure(*n, std::move(out));
}

inline std::string save_structure(const Structure& a) {
  std::ostringstream out;
  out << kStructureHeader << '\n';
  for (const auto& [sym, rel] : a.relations()) out << "rel " << sym.text() << '\n';
  out << "n " << a.size() << '\n';
  for (const auto& [sym, rel] : a.relations())
    for (auto [u, v] : rel) out << "edge " << sym.text() << ' ' << u << ' ' << v << '\n';
  return out.str();
}

inline Structure read_structure_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_structure(buf.str());
}

inline void write_structure_file(const std::string& path, const Structure& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << save_structure(a);
}

}  // namespace dwl
