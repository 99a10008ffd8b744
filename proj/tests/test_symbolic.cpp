#include <gtest/gtest.h>

#include <queue>
#include <random>
#include <stdexcept>

#include "billiard/error.hpp"
#include "billiard/symbolic.hpp"

using namespace billiard;

namespace {

// Component count by breadth-first search on an adjacency matrix.
int bfs_components(int n, const std::vector<Pair>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (const Pair& e : edges) {
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  std::vector<bool> seen(n, false);
  int count = 0;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++count;
    std::queue<int> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      for (int b : adj[a]) {
        if (!seen[b]) {
          seen[b] = true;
          q.push(b);
        }
      }
    }
  }
  return count;
}

SymbolicSequence random_sequence(int n, int len, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ball(0, n - 1);
  SymbolicSequence s;
  while (static_cast<int>(s.entries.size()) < len) {
    const int a = ball(rng), b = ball(rng);
    if (a != b) s.entries.push_back(Pair::make(a, b));
  }
  return s;
}

}  // namespace

TEST(Symbolic, ParseAndPrintRoundTrip) {
  const SymbolicSequence s = SymbolicSequence::parse("(1,2);(1,3); (3,2)", 3);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.entries[0], (Pair{0, 1}));
  EXPECT_EQ(s.entries[2], (Pair{1, 2}));
  EXPECT_EQ(s.to_string(), "(1,2);(1,3);(2,3)");
  EXPECT_EQ(SymbolicSequence::parse("", 3).size(), 0u);
}

TEST(Symbolic, ParseRejectsBadLabels) {
  EXPECT_THROW(SymbolicSequence::parse("(1,4)", 3), InvalidPair);
  EXPECT_THROW(SymbolicSequence::parse("(2,2)", 3), InvalidPair);
  EXPECT_THROW(SymbolicSequence::parse("(0,1)", 3), InvalidPair);
  EXPECT_THROW(SymbolicSequence::parse("(1;2)", 3), std::invalid_argument);
  EXPECT_THROW(SymbolicSequence::parse("(a,2)", 3), std::invalid_argument);
}

TEST(Symbolic, ValidateChecksTimes) {
  SymbolicSequence s = SymbolicSequence::parse("(1,2);(2,3)", 3);
  s.times = std::vector<double>{1.0, 1.0};
  EXPECT_THROW(s.validate(3), std::invalid_argument);
  s.times = std::vector<double>{1.0, 2.0};
  EXPECT_NO_THROW(s.validate(3));
}

TEST(Symbolic, ThreeBallExample) {
  const SymbolicSequence s = SymbolicSequence::parse("(1,2);(1,3);(2,3)", 3);
  const EssentialEdgeSet e = essential_indices(3, s);
  EXPECT_EQ(e.indices, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(e.component_profile, (std::vector<int>{3, 2, 1, 1}));
  EXPECT_TRUE(collision_graph(3, s, 3).connected());
  EXPECT_FALSE(collision_graph(3, s, 1).connected());
}

TEST(Symbolic, RepeatedPairIsNotConnected) {
  const SymbolicSequence s = SymbolicSequence::parse("(1,2);(1,2)", 3);
  try {
    essential_indices(3, s);
    FAIL() << "expected NotConnected";
  } catch (const NotConnected& e) {
    EXPECT_EQ(e.components(), 2);
  }
  EXPECT_EQ(essential_indices_prefix(3, s, 2).indices, (std::vector<std::size_t>{0}));
}

TEST(Symbolic, EmptySequenceHasAllSingletons) {
  const EssentialEdgeSet e = essential_indices_prefix(4, SymbolicSequence{}, 0);
  EXPECT_TRUE(e.indices.empty());
  EXPECT_EQ(e.component_profile, (std::vector<int>{4}));
}

// 1000 random sequences against the breadth-first oracle.
TEST(Symbolic, EssentialSetMatchesBfsOracle) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> nballs(2, 8), length(0, 25);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = nballs(rng);
    const SymbolicSequence s = random_sequence(n, length(rng), rng);
    const EssentialEdgeSet e = essential_indices_prefix(n, s, s.size());
    std::vector<Pair> prefix;
    int prev = n;
    std::vector<std::size_t> expected;
    ASSERT_EQ(e.component_profile.front(), n);
    for (std::size_t k = 0; k < s.size(); ++k) {
      prefix.push_back(s.entries[k]);
      const int now = bfs_components(n, prefix);
      ASSERT_EQ(e.component_profile[k + 1], now);
      if (now < prev) expected.push_back(k);
      prev = now;
    }
    EXPECT_EQ(e.indices, expected);
    EXPECT_EQ(static_cast<int>(e.indices.size()), n - e.component_profile.back());
    EXPECT_EQ(collision_graph(n, s, s.size()).components(), bfs_components(n, s.entries));
    if (e.component_profile.back() == 1) {
      EXPECT_EQ(static_cast<int>(essential_indices(n, s).indices.size()), n - 1);
    } else {
      EXPECT_THROW(essential_indices(n, s), NotConnected);
    }
  }
}

TEST(Symbolic, ForestPathWalksEssentialEdges) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 6;
    const SymbolicSequence s = random_sequence(n, 15, rng);
    const EssentialEdgeSet e = essential_indices_prefix(n, s, s.size());
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const auto path = forest_path(n, s, s.size(), a, b);
        if (!path) continue;
        int at = a;
        for (const PathStep& step : *path) {
          EXPECT_TRUE(e.contains(step.edge));
          const Pair& p = s.entries[step.edge];
          if (step.direction == 1) {
            ASSERT_EQ(at, p.first);
            at = p.second;
          } else {
            ASSERT_EQ(at, p.second);
            at = p.first;
          }
        }
        EXPECT_EQ(at, b);
      }
    }
  }
}
