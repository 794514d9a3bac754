#pragma once

// Persistence-diagram analysis: automatic choice of the cluster count and an
// exact eps-matching test between two diagrams.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "tomato/error.hpp"
#include "tomato/tomato.hpp"

namespace tomato {

enum class GroupMode { single_group, two_groups };

struct DetectionResult {
  std::size_t k = 0;
  double tau_line = 0.0;                // mean lifetime; the line is y = x - tau_line
  GroupMode mode = GroupMode::single_group;
  std::vector<std::size_t> candidates;  // diagram indices strictly below the line
  std::vector<int> group;               // per candidate: 1 = rightmost group, 0 = other
  std::vector<std::size_t> selected;    // diagram indices counted in k
  double centroid_gap = 0.0;            // distance between the two birth centroids
  double max_spread = 0.0;              // largest birth range inside one group
  double separation = kInf;             // min selected lifetime / max unselected lifetime
  bool low_confidence = false;
};

namespace detail {

struct TwoMeans {
  std::vector<int> assignment;  // 1 = group with larger centroid
  double low = 0.0;
  double high = 0.0;
};

// Lloyd iterations in 1-D seeded with the extremes; deterministic.
inline TwoMeans two_means(const std::vector<double>& x) {
  TwoMeans out;
  out.assignment.assign(x.size(), 0);
  if (x.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  out.low = *lo_it;
  out.high = *hi_it;
  if (out.low == out.high) return out;
  out.assignment.assign(x.size(), -1);
  for (int iter = 0; iter < 1000; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const int g = std::abs(x[i] - out.high) < std::abs(x[i] - out.low) ? 1 : 0;
      changed = changed || g != out.assignment[i];
      out.assignment[i] = g;
    }
    double sum[2] = {0.0, 0.0};
    std::size_t cnt[2] = {0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
      sum[out.assignment[i]] += x[i];
      ++cnt[out.assignment[i]];
    }
    // Seeds are the extremes, so neither group can empty out.
    out.low = sum[0] / static_cast<double>(cnt[0]);
    out.high = sum[1] / static_cast<double>(cnt[1]);
    if (!changed) break;
  }
  return out;
}

}  // namespace detail

inline DetectionResult detect_n_clusters(const PersistenceDiagram& diagram, double min_density) {
  detail::require(!diagram.empty(), Errc::empty_input, "cannot detect clusters on an empty diagram");
  const std::size_t n = diagram.size();
  std::vector<double> life(n);
  for (std::size_t i = 0; i < n; ++i) life[i] = diagram.points[i].lifetime(min_density);

  DetectionResult out;
  out.tau_line = std::accumulate(life.begin(), life.end(), 0.0) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (life[i] > out.tau_line) out.candidates.push_back(i);
  }
  if (out.candidates.empty()) {
    // All lifetimes equal the mean: keep every point of maximal lifetime.
    const double top = *std::max_element(life.begin(), life.end());
    for (std::size_t i = 0; i < n; ++i) {
      if (life[i] == top) out.candidates.push_back(i);
    }
  }

  std::vector<double> births;
  for (std::size_t i : out.candidates) births.push_back(diagram.points[i].birth);
  const auto split = detail::two_means(births);
  out.group = split.assignment;
  out.centroid_gap = split.high - split.low;
  for (int g = 0; g < 2; ++g) {
    double lo = kInf, hi = -kInf;
    for (std::size_t c = 0; c < births.size(); ++c) {
      if (out.group[c] != g) continue;
      lo = std::min(lo, births[c]);
      hi = std::max(hi, births[c]);
    }
    if (lo <= hi) out.max_spread = std::max(out.max_spread, hi - lo);
  }

  // A birth gap below the mean lifetime is within the jitter of peak heights
  // and does not indicate a second group.
  const bool split_groups = out.centroid_gap > out.max_spread && out.centroid_gap > out.tau_line;
  out.mode = split_groups ? GroupMode::two_groups : GroupMode::single_group;
  if (out.mode == GroupMode::single_group) std::fill(out.group.begin(), out.group.end(), 1);
  for (std::size_t c = 0; c < out.candidates.size(); ++c) {
    if (out.group[c] == 1) out.selected.push_back(out.candidates[c]);
  }
  out.k = out.selected.size();

  double min_selected = kInf;
  for (std::size_t i : out.selected) min_selected = std::min(min_selected, life[i]);
  std::vector<bool> is_selected(n, false);
  for (std::size_t i : out.selected) is_selected[i] = true;
  double max_other = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_selected[i]) max_other = std::max(max_other, life[i]);
  }
  out.separation = max_other > 0.0 ? min_selected / max_other : kInf;
  out.low_confidence = out.separation < 2.0;
  return out;
}

namespace detail {

// Kuhn's augmenting-path bipartite matching; true iff every left vertex is matched.
inline bool has_perfect_matching(const std::vector<std::vector<std::size_t>>& adj,
                                 std::size_t right_size) {
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> match_right(right_size, none);
  std::vector<char> visited;
  auto augment = [&](auto&& self, std::size_t u) -> bool {
    for (std::size_t v : adj[u]) {
      if (visited[v]) continue;
      visited[v] = 1;
      if (match_right[v] == none || self(self, match_right[v])) {
        match_right[v] = u;
        return true;
      }
    }
    return false;
  };
  for (std::size_t u = 0; u < adj.size(); ++u) {
    visited.assign(right_size, 0);
    if (!augment(augment, u)) return false;
  }
  return true;
}

}  // namespace detail

/// True iff the bottleneck distance between the diagrams is at most eps:
/// every point is paired with a point of the other diagram within eps in
/// sup-norm, or has lifetime at most 2 eps and is sent to the diagonal.
/// Essential points only pair with essential points (birth within eps).
inline bool match_diagrams(const PersistenceDiagram& a, const PersistenceDiagram& b, double eps) {
  detail::require(eps >= 0.0, Errc::invalid_argument, "eps must be nonnegative");
  const auto& pa = a.points;
  const auto& pb = b.points;
  const std::size_t na = pa.size();
  const std::size_t nb = pb.size();

  auto close = [eps](const DiagramPoint& p, const DiagramPoint& q) {
    if (p.essential() != q.essential()) return false;
    if (std::abs(p.birth - q.birth) > eps) return false;
    return p.essential() || std::abs(p.death - q.death) <= eps;
  };
  auto near_diagonal = [eps](const DiagramPoint& p) {
    return !p.essential() && p.birth - p.death <= 2.0 * eps;
  };

  // Left: points of a, then diagonal slots for points of b.
  // Right: points of b, then diagonal slots for points of a.
  std::vector<std::vector<std::size_t>> adj(na + nb);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      if (close(pa[i], pb[j])) adj[i].push_back(j);
    }
    if (near_diagonal(pa[i])) adj[i].push_back(nb + i);
  }
  for (std::size_t j = 0; j < nb; ++j) {
    if (near_diagonal(pb[j])) adj[na + j].push_back(j);
    for (std::size_t i = 0; i < na; ++i) adj[na + j].push_back(nb + i);
  }
  return detail::has_perfect_matching(adj, na + nb);
}

}  // namespace tomato
