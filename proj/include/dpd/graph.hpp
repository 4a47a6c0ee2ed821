#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace dpd {

// Undirected simple graph on vertices 0..n-1. Edges are stored once, as
// (min, max) pairs.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
};

// Draws each unordered pair independently with probability p (pairs scanned
// in lexicographic order, one draw per pair) and resamples, advancing the
// same PRNG stream, until the result is connected. Throws GenerationError
// once max_retries attempts all came out disconnected.
Graph generate_erdos_renyi(int n, double p, std::uint64_t seed, int max_retries = 1000);

// Breadth-first reachability of every vertex from vertex 0 (true for n = 1).
bool is_connected(const Graph& g);

// Ascending, duplicate-free list of the vertices adjacent to i.
std::vector<int> neighbors(const Graph& g, int i);

}  // namespace dpd
