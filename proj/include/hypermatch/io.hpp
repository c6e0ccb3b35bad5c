#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hypermatch/hypergraph.hpp"

namespace hypermatch {

/// Malformed hypergraph or partition text; carries the 1-based line number
/// (0 when the problem is not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ParseOptions {
  bool duplicate_edge_is_error = false;
  LinkIndexPolicy link_policy{};
};

struct ParsedHypergraph {
  Hypergraph graph;
  std::vector<std::string> warnings;
};

/// Format: optional '#' comment lines, header "k n", then one edge per line.
/// Blank lines are ignored.
ParsedHypergraph parse_hypergraph(std::string_view text, const ParseOptions& options = {});

/// Header plus edges in canonical order, LF line endings.
std::string serialize_hypergraph(const Hypergraph& h);

/// Format: header "d", then n lines "vertex part" (0-based parts).
VertexPartition parse_partition(std::string_view text, std::size_t n);
std::string serialize_partition(const VertexPartition& p);

std::string read_file(const std::string& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace hypermatch
