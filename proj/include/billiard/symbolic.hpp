#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "billiard/types.hpp"

namespace billiard {

// Time-ordered collision labels. Abstract sequences carry no times.
struct SymbolicSequence {
  std::vector<Pair> entries;
  std::optional<std::vector<double>> times;

  std::size_t size() const noexcept { return entries.size(); }

  // Throws InvalidPair for out-of-range or degenerate pairs, and
  // std::invalid_argument for non-increasing times.
  void validate(int n_balls) const;

  static SymbolicSequence from_segment(const TrajectorySegment& seg);

  // Literal form "(1,2);(1,3);(2,3)" with one-based ball labels. An empty
  // string is the empty sequence.
  static SymbolicSequence parse(std::string_view literal, int n_balls);
  std::string to_string() const;
};

struct CollisionGraph {
  int n_vertices = 0;
  std::vector<Pair> edges;

  int components() const;
  bool connected() const { return components() == 1; }
};

CollisionGraph collision_graph(int n_balls, const SymbolicSequence& seq, std::size_t prefix_len);

struct EssentialEdgeSet {
  // Zero-based positions in the sequence, increasing; N-1 entries.
  std::vector<std::size_t> indices;
  // component_profile[k] = number of components after the first k edges,
  // for k = 0 .. size.
  std::vector<int> component_profile;

  bool contains(std::size_t k) const;
};

// Positions where the growing collision graph loses a component. Throws
// NotConnected (carrying the final count) if the whole graph is disconnected.
EssentialEdgeSet essential_indices(int n_balls, const SymbolicSequence& seq);

// Same computation on a prefix, without the connectivity requirement.
EssentialEdgeSet essential_indices_prefix(int n_balls, const SymbolicSequence& seq, std::size_t prefix_len);

struct PathStep {
  std::size_t edge = 0;
  // +1 when the path walks from edge.first to edge.second, -1 otherwise.
  int direction = 1;
};

// The unique path from `from` to `to` inside the spanning forest formed by
// the essential edges of the first prefix_len entries. Empty optional if the
// two balls are not yet connected.
std::optional<std::vector<PathStep>> forest_path(int n_balls, const SymbolicSequence& seq, std::size_t prefix_len,
                                                 int from, int to);

}  // namespace billiard
