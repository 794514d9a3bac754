#pragma once

// Point storage, Euclidean distances and neighborhood graphs (k-NN, Rips).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tomato/error.hpp"

namespace tomato {

/// Dense row-major n x D matrix, one row per point (event).
class EventMatrix {
 public:
  EventMatrix() = default;

  EventMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    detail::require(cols >= 1, Errc::invalid_argument,
                    "event matrix needs at least one column");
  }

  EventMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    detail::require(cols >= 1, Errc::invalid_argument,
                    "event matrix needs at least one column");
    detail::require(data_.size() == rows * cols, Errc::dimension_mismatch,
                    "event matrix data has " + std::to_string(data_.size()) +
                        " values, expected " + std::to_string(rows * cols));
    for (std::size_t i = 0; i < data_.size(); ++i) {
      detail::require(std::isfinite(data_[i]), Errc::invalid_argument,
                      "non-finite value in row " + std::to_string(i / cols) +
                          ", column " + std::to_string(i % cols));
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const EventMatrix&, const EventMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 1;
  std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  detail::require(a.size() == b.size(), Errc::dimension_mismatch,
                  "distance between points of dimension " + std::to_string(a.size()) +
                      " and " + std::to_string(b.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

/// Undirected simple graph over point indices. Adjacency lists are sorted,
/// duplicate-free, symmetric and free of self-loops.
class NeighborhoodGraph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  NeighborhoodGraph() = default;
  explicit NeighborhoodGraph(std::size_t n) : adjacency_(n) {}

  static NeighborhoodGraph from_edges(std::size_t n, std::span<const Edge> edges) {
    NeighborhoodGraph g(n);
    for (const auto& [a, b] : edges) {
      detail::require(a < n && b < n, Errc::invalid_argument,
                      "edge (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") out of range for " + std::to_string(n) + " vertices");
      if (a == b) continue;
      g.adjacency_[a].push_back(b);
      g.adjacency_[b].push_back(a);
    }
    g.normalize();
    return g;
  }

  std::size_t size() const noexcept { return adjacency_.size(); }

  std::span<const std::size_t> neighbors(std::size_t i) const { return adjacency_[i]; }

  bool has_edge(std::size_t a, std::size_t b) const {
    const auto& adj = adjacency_[a];
    return std::binary_search(adj.begin(), adj.end(), b);
  }

  std::size_t edge_count() const noexcept {
    std::size_t total = 0;
    for (const auto& adj : adjacency_) total += adj.size();
    return total / 2;
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i < adjacency_.size(); ++i) {
      for (std::size_t j : adjacency_[i]) {
        if (i < j) out.emplace_back(i, j);
      }
    }
    return out;
  }

  friend bool operator==(const NeighborhoodGraph&, const NeighborhoodGraph&) = default;

 private:
  void normalize() {
    for (auto& adj : adjacency_) {
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
  }

  std::vector<std::vector<std::size_t>> adjacency_;
};

/// The k nearest neighbors of every point (the point itself excluded),
/// ordered by (distance, index).
struct KnnTable {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::size_t> index;  // n x k
  std::vector<double> distance;    // n x k

  std::span<const std::size_t> neighbors(std::size_t i) const { return {index.data() + i * k, k}; }
  std::span<const double> distances(std::size_t i) const { return {distance.data() + i * k, k}; }
};

inline KnnTable knn_table(const EventMatrix& points, std::size_t k) {
  const std::size_t n = points.rows();
  detail::require(k >= 1 && n >= 1 && k <= n - 1, Errc::invalid_argument,
                  "k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(n == 0 ? 0 : n - 1) + "]");
  KnnTable table{n, k, std::vector<std::size_t>(n * k), std::vector<double>(n * k)};
  std::vector<std::pair<double, std::size_t>> candidates(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) candidates[c++] = {squared_distance(points.row(i), points.row(j)), j};
    }
    // Pair ordering breaks distance ties by lower index.
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end());
    for (std::size_t m = 0; m < k; ++m) {
      table.index[i * k + m] = candidates[m].second;
      table.distance[i * k + m] = std::sqrt(candidates[m].first);
    }
  }
  return table;
}

/// Symmetrized k-NN graph: i ~ j when either selects the other.
inline NeighborhoodGraph knn_graph(const KnnTable& table) {
  std::vector<NeighborhoodGraph::Edge> edges;
  edges.reserve(table.n * table.k);
  for (std::size_t i = 0; i < table.n; ++i) {
    for (std::size_t j : table.neighbors(i)) edges.emplace_back(i, j);
  }
  return NeighborhoodGraph::from_edges(table.n, edges);
}

inline constexpr std::size_t kDefaultGraphK = 10;

inline NeighborhoodGraph knn_graph(const EventMatrix& points, std::size_t k = kDefaultGraphK) {
  return knn_graph(knn_table(points, k));
}

/// Rips graph: i ~ j iff distance(i, j) < radius.
inline NeighborhoodGraph rips_graph(const EventMatrix& points, double radius) {
  detail::require(radius > 0.0 && !std::isnan(radius), Errc::invalid_argument,
                  "rips radius must be positive");
  const std::size_t n = points.rows();
  std::vector<NeighborhoodGraph::Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (distance(points.row(i), points.row(j)) < radius) edges.emplace_back(i, j);
    }
  }
  return NeighborhoodGraph::from_edges(n, edges);
}

/// Number of connected components.
inline std::size_t connected_components(const NeighborhoodGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack;
  std::size_t count = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++count;
    seen[s] = true;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w : graph.neighbors(v)) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
  }
  return count;
}

}  // namespace tomato
