#include "hypermatch/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace hypermatch {

namespace {

struct LineReader {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line_no = 0;

  /// Next line that is neither blank nor a comment.
  bool next(std::string_view& out) {
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      auto first = line.find_first_not_of(" \t");
      if (first == std::string_view::npos || line[first] == '#') continue;
      out = line;
      return true;
    }
    return false;
  }
};

std::vector<std::uint64_t> parse_numbers(std::string_view line, std::size_t line_no) {
  std::vector<std::uint64_t> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), value);
    if (ec != std::errc() || (ptr != line.data() + line.size() && *ptr != ' ' && *ptr != '\t'))
      throw ParseError(line_no, "expected non-negative integers, got '" + std::string(line) + "'");
    i = static_cast<std::size_t>(ptr - line.data());
    out.push_back(value);
  }
  return out;
}

}  // namespace

ParsedHypergraph parse_hypergraph(std::string_view text, const ParseOptions& options) {
  LineReader reader{text};
  std::string_view line;
  if (!reader.next(line)) throw ParseError(0, "missing header line 'k n'");
  auto header = parse_numbers(line, reader.line_no);
  if (header.size() != 2) throw ParseError(reader.line_no, "header must be 'k n'");
  if (header[0] < 2 || header[0] > 64) throw ParseError(reader.line_no, "uniformity k must be in [2, 64]");
  if (header[1] > std::numeric_limits<Vertex>::max()) throw ParseError(reader.line_no, "vertex count too large");
  const auto k = static_cast<std::size_t>(header[0]);
  const auto n = static_cast<std::size_t>(header[1]);

  ParsedHypergraph out;
  std::vector<std::vector<Vertex>> edges;
  std::set<std::vector<Vertex>> seen;
  while (reader.next(line)) {
    auto nums = parse_numbers(line, reader.line_no);
    if (nums.size() != k)
      throw ParseError(reader.line_no,
                       "edge has " + std::to_string(nums.size()) + " vertices, expected " + std::to_string(k));
    std::vector<Vertex> e;
    e.reserve(k);
    for (auto v : nums) {
      if (v >= n) throw ParseError(reader.line_no, "vertex " + std::to_string(v) + " out of range [0, " + std::to_string(n) + ")");
      e.push_back(static_cast<Vertex>(v));
    }
    std::sort(e.begin(), e.end());
    if (std::adjacent_find(e.begin(), e.end()) != e.end())
      throw ParseError(reader.line_no, "edge repeats a vertex");
    if (!seen.insert(e).second) {
      if (options.duplicate_edge_is_error) throw ParseError(reader.line_no, "duplicate edge");
      out.warnings.push_back("line " + std::to_string(reader.line_no) + ": duplicate edge ignored");
      continue;
    }
    edges.push_back(std::move(e));
  }
  out.graph = Hypergraph(static_cast<int>(k), n, std::move(edges), options.link_policy);
  return out;
}

std::string serialize_hypergraph(const Hypergraph& h) {
  std::string out = std::to_string(h.k()) + " " + std::to_string(h.n()) + "\n";
  for (std::size_t e = 0; e < h.edge_count(); ++e) {
    auto ev = h.edge(e);
    for (std::size_t i = 0; i < ev.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(ev[i]);
    }
    out += '\n';
  }
  return out;
}

VertexPartition parse_partition(std::string_view text, std::size_t n) {
  LineReader reader{text};
  std::string_view line;
  if (!reader.next(line)) throw ParseError(0, "missing partition header 'd'");
  auto header = parse_numbers(line, reader.line_no);
  if (header.size() != 1 || header[0] == 0) throw ParseError(reader.line_no, "partition header must be a positive 'd'");
  const auto d = static_cast<std::size_t>(header[0]);
  std::vector<int> assignment(n, -1);
  std::size_t assigned = 0;
  while (reader.next(line)) {
    auto nums = parse_numbers(line, reader.line_no);
    if (nums.size() != 2) throw ParseError(reader.line_no, "expected 'vertex part'");
    if (nums[0] >= n) throw ParseError(reader.line_no, "vertex " + std::to_string(nums[0]) + " out of range");
    if (nums[1] >= d) throw ParseError(reader.line_no, "part " + std::to_string(nums[1]) + " out of range");
    auto& slot = assignment[static_cast<std::size_t>(nums[0])];
    if (slot != -1) throw ParseError(reader.line_no, "vertex " + std::to_string(nums[0]) + " assigned twice");
    slot = static_cast<int>(nums[1]);
    ++assigned;
  }
  if (assigned != n)
    throw ParseError(0, "partition assigns " + std::to_string(assigned) + " of " + std::to_string(n) + " vertices");
  try {
    return VertexPartition(d, std::move(assignment));
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, e.what());
  }
}

std::string serialize_partition(const VertexPartition& p) {
  std::string out = std::to_string(p.d()) + "\n";
  for (std::size_t v = 0; v < p.n(); ++v)
    out += std::to_string(v) + " " + std::to_string(p.part_of(static_cast<Vertex>(v))) + "\n";
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move output into '" + path + "': " + ec.message());
  }
}

}  // namespace hypermatch
