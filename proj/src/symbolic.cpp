#include "billiard/symbolic.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <stdexcept>

#include "billiard/error.hpp"

namespace billiard {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n), rank_(n, 0), count_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  // Returns true when a and b were in different sets.
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    --count_;
    return true;
  }

  int count() const noexcept { return count_; }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
  int count_;
};

void check_pair(const Pair& p, int n_balls) {
  if (p.first < 0 || p.second >= n_balls || p.first >= p.second) {
    throw InvalidPair("pair (" + std::to_string(p.first + 1) + "," + std::to_string(p.second + 1) +
                      ") is not valid for N=" + std::to_string(n_balls));
  }
}

}  // namespace

void SymbolicSequence::validate(int n_balls) const {
  for (const auto& p : entries) check_pair(p, n_balls);
  if (times) {
    if (times->size() != entries.size()) throw std::invalid_argument("sequence times do not match entries");
    for (std::size_t k = 1; k < times->size(); ++k) {
      if (!((*times)[k] > (*times)[k - 1])) throw std::invalid_argument("sequence times must increase strictly");
    }
  }
}

SymbolicSequence SymbolicSequence::from_segment(const TrajectorySegment& seg) {
  SymbolicSequence s;
  std::vector<double> t;
  for (const auto& e : seg.events) {
    s.entries.push_back(e.pair);
    t.push_back(e.time);
  }
  s.times = std::move(t);
  return s;
}

SymbolicSequence SymbolicSequence::parse(std::string_view literal, int n_balls) {
  SymbolicSequence s;
  auto trim = [](std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
    return v;
  };
  literal = trim(literal);
  if (literal.empty()) return s;

  auto read_int = [](std::string_view v) {
    int value = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, value);
    if (ec != std::errc() || ptr != end) throw std::invalid_argument("bad ball label '" + std::string(v) + "'");
    return value;
  };

  std::size_t pos = 0;
  while (pos <= literal.size()) {
    const std::size_t semi = literal.find(';', pos);
    std::string_view item = trim(literal.substr(pos, semi == std::string_view::npos ? literal.npos : semi - pos));
    if (item.size() < 5 || item.front() != '(' || item.back() != ')') {
      throw std::invalid_argument("malformed pair literal '" + std::string(item) + "'");
    }
    item = item.substr(1, item.size() - 2);
    const std::size_t comma = item.find(',');
    if (comma == std::string_view::npos) throw std::invalid_argument("pair literal needs a comma");
    const int a = read_int(trim(item.substr(0, comma)));
    const int b = read_int(trim(item.substr(comma + 1)));
    if (a == b) throw InvalidPair("pair (" + std::to_string(a) + "," + std::to_string(b) + ") repeats a ball");
    const Pair p = Pair::make(a - 1, b - 1);
    check_pair(p, n_balls);
    s.entries.push_back(p);
    if (semi == std::string_view::npos) break;
    pos = semi + 1;
  }
  return s;
}

std::string SymbolicSequence::to_string() const {
  std::string out;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (k > 0) out += ';';
    out += '(' + std::to_string(entries[k].first + 1) + ',' + std::to_string(entries[k].second + 1) + ')';
  }
  return out;
}

int CollisionGraph::components() const {
  DisjointSets sets(n_vertices);
  for (const auto& e : edges) sets.unite(e.first, e.second);
  return sets.count();
}

CollisionGraph collision_graph(int n_balls, const SymbolicSequence& seq, std::size_t prefix_len) {
  if (prefix_len > seq.size()) throw std::invalid_argument("collision_graph: prefix longer than sequence");
  CollisionGraph g{n_balls, {}};
  for (std::size_t k = 0; k < prefix_len; ++k) {
    check_pair(seq.entries[k], n_balls);
    g.edges.push_back(seq.entries[k]);
  }
  return g;
}

bool EssentialEdgeSet::contains(std::size_t k) const {
  return std::binary_search(indices.begin(), indices.end(), k);
}

EssentialEdgeSet essential_indices_prefix(int n_balls, const SymbolicSequence& seq, std::size_t prefix_len) {
  if (prefix_len > seq.size()) throw std::invalid_argument("essential_indices: prefix longer than sequence");
  EssentialEdgeSet out;
  DisjointSets sets(n_balls);
  out.component_profile.push_back(sets.count());
  for (std::size_t k = 0; k < prefix_len; ++k) {
    const Pair& p = seq.entries[k];
    check_pair(p, n_balls);
    if (sets.unite(p.first, p.second)) out.indices.push_back(k);
    out.component_profile.push_back(sets.count());
  }
  return out;
}

EssentialEdgeSet essential_indices(int n_balls, const SymbolicSequence& seq) {
  EssentialEdgeSet out = essential_indices_prefix(n_balls, seq, seq.size());
  if (out.component_profile.back() != 1) throw NotConnected(out.component_profile.back());
  return out;
}

std::optional<std::vector<PathStep>> forest_path(int n_balls, const SymbolicSequence& seq, std::size_t prefix_len,
                                                 int from, int to) {
  const EssentialEdgeSet ess = essential_indices_prefix(n_balls, seq, prefix_len);
  // Depth-first search over the forest; parents recorded per vertex.
  std::vector<std::vector<std::size_t>> incident(n_balls);
  for (std::size_t k : ess.indices) {
    incident[seq.entries[k].first].push_back(k);
    incident[seq.entries[k].second].push_back(k);
  }
  std::vector<int> parent(n_balls, -1);
  std::vector<std::size_t> via(n_balls, 0);
  std::vector<bool> seen(n_balls, false);
  std::vector<int> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    for (std::size_t k : incident[a]) {
      const Pair& p = seq.entries[k];
      const int b = p.first == a ? p.second : p.first;
      if (seen[b]) continue;
      seen[b] = true;
      parent[b] = a;
      via[b] = k;
      stack.push_back(b);
    }
  }
  if (!seen[to]) return std::nullopt;

  std::vector<PathStep> reversed;
  for (int b = to; b != from; b = parent[b]) {
    const int a = parent[b];
    const Pair& p = seq.entries[via[b]];
    reversed.push_back(PathStep{via[b], p.first == a ? 1 : -1});
  }
  return std::vector<PathStep>(reversed.rbegin(), reversed.rend());
}

}  // namespace billiard
