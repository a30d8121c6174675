#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "vdf/errors.hpp"

namespace vdf {

// Vertices are dense 1-based ids. 0 never names a vertex; it is the
// in-memory encoding of an empty slot.
using Vertex = std::uint32_t;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  static Edge canonical(Vertex a, Vertex b) { return a < b ? Edge{a, b} : Edge{b, a}; }

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Bounded-degree graph given by its incidence function g : V x [d] -> V u {bottom}.
///
/// Neighbors occupy the slots of a vertex in ascending id order, and empty
/// slots trail the occupied ones. Instances are immutable once built; every
/// constructor path validates symmetry, the degree bound, and simplicity.
class BoundedDegreeGraph {
 public:
  BoundedDegreeGraph() = default;

  /// Builds from per-vertex neighbor lists, lists[v - 1] holding Gamma(v) in
  /// any order. Throws ValidationError.
  static BoundedDegreeGraph from_lists(std::size_t vertex_count, unsigned degree_bound,
                                       std::vector<std::vector<Vertex>> lists) {
    if (vertex_count == 0 || degree_bound == 0) {
      throw UsageError("graph needs at least one vertex and a positive degree bound");
    }
    if (lists.size() != vertex_count) {
      throw UsageError("expected one neighbor list per vertex");
    }
    BoundedDegreeGraph g;
    g.vertex_count_ = vertex_count;
    g.degree_bound_ = degree_bound;
    g.slots_.assign(vertex_count * degree_bound, 0);
    g.degrees_.assign(vertex_count, 0);
    for (std::size_t idx = 0; idx < vertex_count; ++idx) {
      const Vertex v = static_cast<Vertex>(idx + 1);
      auto& list = lists[idx];
      for (Vertex u : list) {
        if (u == 0 || u > vertex_count) {
          throw ValidationError(ValidationKind::range, "vertex " + std::to_string(v) +
                                                           " lists unknown neighbor " +
                                                           std::to_string(u));
        }
        if (u == v) {
          throw ValidationError(ValidationKind::self_loop,
                                "vertex " + std::to_string(v) + " lists itself");
        }
      }
      std::sort(list.begin(), list.end());
      if (std::adjacent_find(list.begin(), list.end()) != list.end()) {
        throw ValidationError(ValidationKind::multi_edge,
                              "vertex " + std::to_string(v) + " lists a neighbor twice");
      }
      if (list.size() > degree_bound) {
        throw ValidationError(ValidationKind::degree,
                              "vertex " + std::to_string(v) + " has degree " +
                                  std::to_string(list.size()) + " > " +
                                  std::to_string(degree_bound));
      }
      std::copy(list.begin(), list.end(), g.slots_.begin() + idx * degree_bound);
      g.degrees_[idx] = static_cast<unsigned>(list.size());
    }
    for (Vertex v = 1; v <= vertex_count; ++v) {
      for (Vertex u : g.neighbors(v)) {
        const auto back = g.neighbors(u);
        if (!std::binary_search(back.begin(), back.end(), v)) {
          throw ValidationError(ValidationKind::asymmetry,
                                std::to_string(v) + " lists " + std::to_string(u) +
                                    " but not vice versa");
        }
      }
    }
    return g;
  }

  static BoundedDegreeGraph from_edges(std::size_t vertex_count, unsigned degree_bound,
                                       std::span<const Edge> edges) {
    std::vector<std::vector<Vertex>> lists(vertex_count);
    for (const Edge& e : edges) {
      if (e.u == 0 || e.v == 0 || e.u > vertex_count || e.v > vertex_count) {
        throw ValidationError(ValidationKind::range, "edge endpoint out of range");
      }
      lists[e.u - 1].push_back(e.v);
      lists[e.v - 1].push_back(e.u);
    }
    return from_lists(vertex_count, degree_bound, std::move(lists));
  }

  std::size_t vertex_count() const { return vertex_count_; }
  unsigned degree_bound() const { return degree_bound_; }

  bool contains(Vertex v) const { return v >= 1 && v <= vertex_count_; }

  /// g(v, slot) for slot in [1, d]; nullopt encodes bottom.
  std::optional<Vertex> incidence(Vertex v, unsigned slot) const {
    check_vertex(v);
    if (slot == 0 || slot > degree_bound_) {
      throw UsageError("slot " + std::to_string(slot) + " outside [1, " +
                       std::to_string(degree_bound_) + "]");
    }
    const Vertex u = slots_[(v - 1) * std::size_t{degree_bound_} + (slot - 1)];
    if (u == 0) return std::nullopt;
    return u;
  }

  unsigned degree(Vertex v) const {
    check_vertex(v);
    return degrees_[v - 1];
  }

  std::span<const Vertex> neighbors(Vertex v) const {
    check_vertex(v);
    return {slots_.data() + (v - 1) * std::size_t{degree_bound_}, degrees_[v - 1]};
  }

  bool has_edge(Vertex a, Vertex b) const {
    if (!contains(a) || !contains(b)) return false;
    const auto nb = neighbors(a);
    return std::binary_search(nb.begin(), nb.end(), b);
  }

  /// Canonical edge list: u < v, sorted lexicographically.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (Vertex v = 1; v <= vertex_count_; ++v) {
      for (Vertex u : neighbors(v)) {
        if (v < u) out.push_back({v, u});
      }
    }
    return out;
  }

  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (unsigned deg : degrees_) twice += deg;
    return twice / 2;
  }

  friend bool operator==(const BoundedDegreeGraph&, const BoundedDegreeGraph&) = default;

 private:
  void check_vertex(Vertex v) const {
    if (!contains(v)) {
      throw UsageError("vertex " + std::to_string(v) + " outside [1, " +
                       std::to_string(vertex_count_) + "]");
    }
  }

  std::size_t vertex_count_ = 0;
  unsigned degree_bound_ = 0;
  std::vector<Vertex> slots_;
  std::vector<unsigned> degrees_;
};

namespace detail {

inline std::string_view trim_ws(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits on spaces/tabs, skipping empty tokens.
inline std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Visits each line with its 1-based number; a trailing newline does not
// produce an extra empty line.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    fn(++line_no, text.substr(pos, end - pos));
    pos = end + 1;
  }
}

}  // namespace detail

/// Parses the text graph format:
///   n d
///   v: u1 u2 ... uk      (one line per vertex, k <= d; omitted lines mean isolated)
inline BoundedDegreeGraph load_graph(std::string_view text) {
  std::optional<std::pair<std::size_t, unsigned>> header;
  std::vector<std::vector<Vertex>> lists;
  std::vector<bool> seen;

  detail::for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    const auto line = detail::trim_ws(raw);
    if (line.empty()) return;
    if (!header) {
      const auto parts = detail::tokens(line);
      if (parts.size() != 2) throw ParseError(line_no, "expected header \"n d\"");
      const auto n = detail::parse_number<std::size_t>(parts[0]);
      const auto d = detail::parse_number<unsigned>(parts[1]);
      if (!n || !d || *n == 0 || *d == 0) {
        throw ParseError(line_no, "header needs positive integers n and d");
      }
      header.emplace(*n, *d);
      lists.resize(*n);
      seen.assign(*n, false);
      return;
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError(line_no, "missing ':'");
    const auto v = detail::parse_number<std::size_t>(detail::trim_ws(line.substr(0, colon)));
    if (!v || *v == 0 || *v > header->first) {
      throw ParseError(line_no, "vertex id outside [1, n]");
    }
    if (seen[*v - 1]) throw ParseError(line_no, "vertex listed twice");
    seen[*v - 1] = true;
    for (auto tok : detail::tokens(line.substr(colon + 1))) {
      const auto u = detail::parse_number<std::size_t>(tok);
      if (!u) throw ParseError(line_no, "bad neighbor id '" + std::string(tok) + "'");
      if (*u == 0 || *u > header->first) {
        throw ValidationError(ValidationKind::range,
                              "neighbor " + std::to_string(*u) + " outside [1, n]");
      }
      lists[*v - 1].push_back(static_cast<Vertex>(*u));
    }
  });
  if (!header) throw ParseError(1, "empty graph file");
  return BoundedDegreeGraph::from_lists(header->first, header->second, std::move(lists));
}

/// Canonical serialization; load_graph(store_graph(g)) == g, and canonical
/// files round-trip byte for byte.
inline std::string store_graph(const BoundedDegreeGraph& g) {
  std::string out = std::to_string(g.vertex_count()) + " " + std::to_string(g.degree_bound()) + "\n";
  for (Vertex v = 1; v <= g.vertex_count(); ++v) {
    out += std::to_string(v);
    out += ':';
    for (Vertex u : g.neighbors(v)) {
      out += ' ';
      out += std::to_string(u);
    }
    out += '\n';
  }
  return out;
}

}  // namespace vdf
