#pragma once

// Topological mode analysis: directed-tree mode seeking on a neighborhood
// graph followed by prominence-thresholded merging of the trees.
//
// Vertices are swept in decreasing density order. A vertex without higher
// neighbors founds a tree; any other vertex joins the tree of its highest
// neighbor and may trigger merges between the trees its upper star touches.
// With tau = +inf the recorded (birth, death) pairs form the 0-dimensional
// superlevel-set persistence diagram of the graph filtration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tomato/density.hpp"
#include "tomato/error.hpp"
#include "tomato/geometry.hpp"

namespace tomato {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct DiagramPoint {
  double birth = 0.0;
  double death = -kInf;  // -inf: the component never dies
  std::size_t peak = 0;  // vertex whose density is the birth value

  bool essential() const noexcept { return std::isinf(death); }
  double lifetime(double min_density) const {
    return birth - (essential() ? min_density : death);
  }

  friend bool operator==(const DiagramPoint&, const DiagramPoint&) = default;
};

struct PersistenceDiagram {
  std::vector<DiagramPoint> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  std::size_t essential_count() const {
    return static_cast<std::size_t>(std::count_if(
        points.begin(), points.end(), [](const DiagramPoint& p) { return p.essential(); }));
  }
};

struct ClusterLabeling {
  std::vector<std::size_t> labels;  // per point, in [0, count())
  std::vector<std::size_t> roots;   // per cluster, peak vertex

  std::size_t count() const noexcept { return roots.size(); }
};

/// Either a prominence threshold tau (+inf: full persistence, 0: no merging)
/// or a requested number of clusters.
struct TomatoParams {
  double tau = kInf;
  std::optional<std::size_t> n_clusters;

  static TomatoParams with_tau(double tau) { return {tau, std::nullopt}; }
  static TomatoParams with_clusters(std::size_t k) { return {kInf, k}; }
};

struct TomatoResult {
  ClusterLabeling clustering;
  PersistenceDiagram diagram;  // always the full (tau = +inf) diagram
  double tau = kInf;           // threshold used for the final labels
  std::size_t components = 0;  // connected components of the graph
  bool count_mismatch = false; // n_clusters requested but not achieved
};

namespace detail {

// Strict total order: a ranks above b when denser, ties to the lower index.
struct DensityOrder {
  const std::vector<double>* f;
  bool operator()(std::size_t a, std::size_t b) const {
    const double fa = (*f)[a];
    const double fb = (*f)[b];
    return fa > fb || (fa == fb && a < b);
  }
};

// Union-find whose classes remember their peak (densest member).
class PeakForest {
 public:
  explicit PeakForest(std::size_t n) : parent_(n), size_(n, 1), peak_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    std::iota(peak_.begin(), peak_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t v) {
    std::size_t root = v;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[v] != root) {
      const std::size_t next = parent_[v];
      parent_[v] = root;
      v = next;
    }
    return root;
  }

  std::size_t peak(std::size_t cls) const { return peak_[cls]; }

  // Unites two classes; the surviving peak is chosen by the caller.
  std::size_t unite(std::size_t a, std::size_t b, std::size_t survivor_peak) {
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    peak_[a] = survivor_peak;
    return a;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
  std::vector<std::size_t> peak_;
};

inline void check_inputs(const NeighborhoodGraph& graph, const DensityEstimate& density) {
  require(graph.size() >= 1, Errc::empty_input, "clustering an empty point set");
  require(graph.size() == density.size(), Errc::misaligned,
          "graph has " + std::to_string(graph.size()) + " vertices but density has " +
              std::to_string(density.size()) + " values");
  for (std::size_t i = 0; i < density.size(); ++i) {
    require(std::isfinite(density.values[i]), Errc::invalid_argument,
            "non-finite density at point " + std::to_string(i));
  }
}

struct SweepOutput {
  ClusterLabeling clustering;
  PersistenceDiagram diagram;
};

inline SweepOutput sweep(const NeighborhoodGraph& graph, const std::vector<double>& f,
                         double tau) {
  const std::size_t n = graph.size();
  const DensityOrder higher{&f};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), higher);

  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  PeakForest forest(n);
  PersistenceDiagram diagram;
  std::vector<std::size_t> star;

  auto kill = [&](std::size_t dying_peak, double at) {
    diagram.points.push_back({f[dying_peak], at, dying_peak});
  };
  // Merges two classes; the one with the lower peak dies at density `at`.
  auto merge = [&](std::size_t a, std::size_t b, double at) {
    const std::size_t pa = forest.peak(a);
    const std::size_t pb = forest.peak(b);
    const bool a_wins = rank[pa] < rank[pb];
    kill(a_wins ? pb : pa, at);
    return forest.unite(a, b, a_wins ? pa : pb);
  };

  for (const std::size_t i : order) {
    star.clear();
    for (std::size_t j : graph.neighbors(i)) {
      if (rank[j] < rank[i]) star.push_back(j);
    }
    if (star.empty()) continue;  // i is a peak: its own singleton class

    const std::size_t highest =
        *std::min_element(star.begin(), star.end(),
                          [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
    forest.unite(forest.find(highest), forest.find(i), forest.peak(forest.find(highest)));

    // Trees met by the upper star whose own peak is less than tau above f_i.
    for (std::size_t j : star) {
      const std::size_t cj = forest.find(j);
      const std::size_t ci = forest.find(i);
      if (cj != ci && f[forest.peak(cj)] - f[i] < tau) merge(cj, ci, f[i]);
    }

    // The tree of i itself joins the highest-peaked tree above it.
    const std::size_t ci = forest.find(i);
    std::optional<std::size_t> top;
    for (std::size_t j : star) {
      const std::size_t cj = forest.find(j);
      if (cj == ci || rank[forest.peak(cj)] > rank[forest.peak(ci)]) continue;
      if (!top || rank[forest.peak(cj)] < rank[forest.peak(*top)]) top = cj;
    }
    if (top && f[forest.peak(ci)] - f[i] < tau) merge(ci, *top, f[i]);
  }

  // Labels follow the peak rank so cluster 0 holds the densest point.
  ClusterLabeling clustering;
  clustering.labels.assign(n, 0);
  std::vector<std::size_t> label_of_class(n, n);
  for (const std::size_t v : order) {
    const std::size_t c = forest.find(v);
    if (label_of_class[c] == n) {
      label_of_class[c] = clustering.roots.size();
      clustering.roots.push_back(forest.peak(c));
      diagram.points.push_back({f[forest.peak(c)], -kInf, forest.peak(c)});
    }
    clustering.labels[v] = label_of_class[c];
  }
  return {std::move(clustering), std::move(diagram)};
}

}  // namespace detail

/// Neighbors of i ranked above it (denser, or equally dense with lower index).
inline std::vector<std::size_t> upper_star(const NeighborhoodGraph& graph,
                                           const DensityEstimate& density, std::size_t i) {
  detail::check_inputs(graph, density);
  detail::require(i < graph.size(), Errc::invalid_argument,
                  "vertex " + std::to_string(i) + " out of range");
  const detail::DensityOrder higher{&density.values};
  std::vector<std::size_t> out;
  for (std::size_t j : graph.neighbors(i)) {
    if (higher(j, i)) out.push_back(j);
  }
  return out;
}

/// Birth minus death per diagram point, essential deaths replaced by
/// `min_density`; sorted descending.
inline std::vector<double> prominences(const PersistenceDiagram& diagram, double min_density) {
  std::vector<double> out;
  out.reserve(diagram.size());
  for (const auto& p : diagram.points) out.push_back(p.lifetime(min_density));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/// Threshold separating the k most prominent peaks from the rest. Essential
/// points always survive, so they rank above every finite lifetime.
inline double tau_for_clusters(const PersistenceDiagram& diagram, std::size_t k) {
  const std::size_t essential = diagram.essential_count();
  if (k <= essential) return kInf;
  std::vector<double> finite;
  for (const auto& p : diagram.points) {
    if (!p.essential()) finite.push_back(p.birth - p.death);
  }
  std::sort(finite.begin(), finite.end(), std::greater<>());
  const std::size_t m = k - essential;
  if (m >= finite.size()) return 0.0;
  return 0.5 * (finite[m - 1] + finite[m]);
}

inline TomatoResult tomato_cluster(const NeighborhoodGraph& graph, const DensityEstimate& density,
                                   const TomatoParams& params = {}) {
  detail::check_inputs(graph, density);
  detail::require(params.tau >= 0.0, Errc::invalid_argument, "tau must be nonnegative");
  if (params.n_clusters) {
    detail::require(*params.n_clusters >= 1, Errc::invalid_argument,
                    "n_clusters must be positive");
  }

  auto full = detail::sweep(graph, density.values, kInf);
  TomatoResult result;
  result.components = full.diagram.essential_count();
  result.tau = params.n_clusters ? tau_for_clusters(full.diagram, *params.n_clusters) : params.tau;
  if (std::isinf(result.tau)) {
    result.clustering = std::move(full.clustering);
  } else {
    result.clustering = detail::sweep(graph, density.values, result.tau).clustering;
  }
  result.diagram = std::move(full.diagram);
  if (params.n_clusters) result.count_mismatch = result.clustering.count() != *params.n_clusters;
  return result;
}

}  // namespace tomato
