#include "dpd/graph.hpp"

#include <algorithm>
#include <stdexcept>

#include "dpd/errors.hpp"
#include "dpd/rng.hpp"

namespace dpd {
namespace {

void check_graph(const Graph& g) {
  if (g.n < 1) throw std::invalid_argument("graph: needs at least one vertex");
  for (const auto& [a, b] : g.edges)
    if (a < 0 || b < 0 || a >= g.n || b >= g.n || a == b)
      throw std::invalid_argument("graph: edge endpoints out of range or self-loop");
}

std::vector<std::vector<int>> adjacency(const Graph& g) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.n));
  for (const auto& [a, b] : g.edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return adj;
}

}  // namespace

Graph generate_erdos_renyi(int n, double p, std::uint64_t seed, int max_retries) {
  if (n < 1) throw std::invalid_argument("graph: n must be >= 1");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("graph: p must lie in [0, 1]");
  if (max_retries < 1) throw std::invalid_argument("graph: max_retries must be >= 1");
  SplitMix64 rng(seed);
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Graph g;
    g.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.next_double() < p) g.edges.emplace_back(i, j);
    if (is_connected(g)) return g;
  }
  throw GenerationError("graph: no connected sample within retry budget");
}

bool is_connected(const Graph& g) {
  check_graph(g);
  const auto adj = adjacency(g);
  std::vector<char> seen(static_cast<std::size_t>(g.n), 0);
  std::vector<int> queue{0};
  seen[0] = 1;
  int reached = 1;
  while (!queue.empty()) {
    const int v = queue.back();
    queue.pop_back();
    for (int w : adj[static_cast<std::size_t>(v)])
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        queue.push_back(w);
      }
  }
  return reached == g.n;
}

std::vector<int> neighbors(const Graph& g, int i) {
  check_graph(g);
  if (i < 0 || i >= g.n) throw std::invalid_argument("graph: vertex out of range");
  return adjacency(g)[static_cast<std::size_t>(i)];
}

}  // namespace dpd
