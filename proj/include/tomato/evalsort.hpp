#pragma once

// Scoring a clustering against ground-truth neuron labels.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tomato/error.hpp"
#include "tomato/geometry.hpp"
#include "tomato/tomato.hpp"

namespace tomato {

/// Row-normalized confusion matrix. Row i is the i-th true neuron id (sorted);
/// columns are cluster ids reordered so that column i is the cluster matched
/// to row i. Neurons left without a cluster get a zero padding column (id -1).
struct ConfusionMatrix {
  std::vector<std::size_t> neuron_ids;
  std::vector<long> cluster_ids;
  std::vector<std::vector<std::size_t>> counts;
  std::vector<std::vector<double>> fractions;
  std::vector<bool> matched;  // per row

  std::size_t rows() const noexcept { return neuron_ids.size(); }
  std::size_t cols() const noexcept { return cluster_ids.size(); }
  double at(std::size_t i, std::size_t j) const { return fractions[i][j]; }

  std::vector<std::size_t> unmatched_neurons() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < rows(); ++i) {
      if (!matched[i]) out.push_back(neuron_ids[i]);
    }
    return out;
  }
};

namespace detail {

// Minimum-cost assignment of every row to a distinct column (rows <= cols).
// Classic O(rows^2 * cols) potentials formulation; returns column per row.
inline std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const std::size_t m = n == 0 ? 0 : cost[0].size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

// Matching maximizing the total matched count; row -> column or npos.
inline std::vector<std::size_t> max_count_matching(
    const std::vector<std::vector<std::size_t>>& counts, std::size_t n_cols) {
  const std::size_t n_rows = counts.size();
  const std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> row_to_col(n_rows, npos);
  if (n_rows == 0 || n_cols == 0) return row_to_col;
  if (n_rows <= n_cols) {
    std::vector<std::vector<double>> cost(n_rows, std::vector<double>(n_cols));
    for (std::size_t i = 0; i < n_rows; ++i) {
      for (std::size_t j = 0; j < n_cols; ++j) cost[i][j] = -static_cast<double>(counts[i][j]);
    }
    row_to_col = hungarian(cost);
  } else {
    std::vector<std::vector<double>> cost(n_cols, std::vector<double>(n_rows));
    for (std::size_t i = 0; i < n_rows; ++i) {
      for (std::size_t j = 0; j < n_cols; ++j) cost[j][i] = -static_cast<double>(counts[i][j]);
    }
    const auto col_to_row = hungarian(cost);
    for (std::size_t j = 0; j < n_cols; ++j) row_to_col[col_to_row[j]] = j;
  }
  return row_to_col;
}

}  // namespace detail

inline ConfusionMatrix confusion(std::span<const std::size_t> truth,
                                 std::span<const std::size_t> predicted) {
  detail::require(!truth.empty(), Errc::empty_input, "confusion of empty label sets");
  detail::require(truth.size() == predicted.size(), Errc::misaligned,
                  std::to_string(truth.size()) + " true labels vs " +
                      std::to_string(predicted.size()) + " predicted labels");

  std::map<std::size_t, std::size_t> row_of, col_of;
  for (std::size_t t : truth) row_of.emplace(t, 0);
  for (std::size_t p : predicted) col_of.emplace(p, 0);
  std::size_t r = 0;
  for (auto& [id, idx] : row_of) idx = r++;
  std::size_t c = 0;
  for (auto& [id, idx] : col_of) idx = c++;

  const std::size_t n_rows = row_of.size();
  const std::size_t n_clusters = col_of.size();
  std::vector<std::vector<std::size_t>> raw(n_rows, std::vector<std::size_t>(n_clusters, 0));
  for (std::size_t e = 0; e < truth.size(); ++e) ++raw[row_of[truth[e]]][col_of[predicted[e]]];

  std::vector<std::size_t> cluster_id_of_col(n_clusters);
  for (const auto& [id, idx] : col_of) cluster_id_of_col[idx] = id;

  const auto match = detail::max_count_matching(raw, n_clusters);
  const std::size_t npos = std::numeric_limits<std::size_t>::max();

  ConfusionMatrix out;
  for (const auto& [id, idx] : row_of) out.neuron_ids.push_back(id);
  out.matched.assign(n_rows, false);

  // Column order: matched clusters in row order (or padding), then leftovers by id.
  std::vector<std::size_t> order;  // raw column index, npos for padding
  std::vector<bool> used(n_clusters, false);
  for (std::size_t i = 0; i < n_rows; ++i) {
    order.push_back(match[i]);
    if (match[i] != npos) {
      used[match[i]] = true;
      out.matched[i] = true;
    }
  }
  for (std::size_t j = 0; j < n_clusters; ++j) {
    if (!used[j]) order.push_back(j);
  }

  out.counts.assign(n_rows, std::vector<std::size_t>(order.size(), 0));
  out.fractions.assign(n_rows, std::vector<double>(order.size(), 0.0));
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.cluster_ids.push_back(order[k] == npos ? -1 : static_cast<long>(cluster_id_of_col[order[k]]));
  }
  for (std::size_t i = 0; i < n_rows; ++i) {
    const std::size_t total = std::accumulate(raw[i].begin(), raw[i].end(), std::size_t{0});
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (order[k] == npos) continue;
      out.counts[i][k] = raw[i][order[k]];
      out.fractions[i][k] = static_cast<double>(out.counts[i][k]) / static_cast<double>(total);
    }
  }
  return out;
}

inline ConfusionMatrix confusion(std::span<const std::size_t> truth, const ClusterLabeling& labels) {
  return confusion(truth, std::span<const std::size_t>(labels.labels));
}

/// Mean diagonal entry over matched neurons (0 when nothing is matched).
inline double diagonal_weight(const ConfusionMatrix& m) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (!m.matched[i]) continue;
    sum += m.at(i, i);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

/// Rows whose matched cluster holds at least `min_diagonal` of the neuron's events.
inline std::vector<std::size_t> identified_rows(const ConfusionMatrix& m, double min_diagonal = 0.5) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (m.matched[i] && m.at(i, i) >= min_diagonal) out.push_back(i);
  }
  return out;
}

/// Mean diagonal entry over identified neurons (0 when none is identified).
inline double identified_diagonal_weight(const ConfusionMatrix& m, double min_diagonal = 0.5) {
  const auto rows = identified_rows(m, min_diagonal);
  double sum = 0.0;
  for (std::size_t i : rows) sum += m.at(i, i);
  return rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
}

/// Coordinatewise median event of each cluster (row c = cluster c).
inline EventMatrix cluster_medians(const EventMatrix& events, const ClusterLabeling& labels) {
  detail::require(labels.labels.size() == events.rows(), Errc::misaligned,
                  "labels do not match the event count");
  const std::size_t k = labels.count();
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t e = 0; e < events.rows(); ++e) {
    detail::require(labels.labels[e] < k, Errc::invalid_argument, "label out of range");
    members[labels.labels[e]].push_back(e);
  }
  EventMatrix out(k, events.cols());
  std::vector<double> column;
  for (std::size_t c = 0; c < k; ++c) {
    detail::require(!members[c].empty(), Errc::empty_input,
                    "cluster " + std::to_string(c) + " has no events");
    for (std::size_t d = 0; d < events.cols(); ++d) {
      column.clear();
      for (std::size_t e : members[c]) column.push_back(events(e, d));
      std::sort(column.begin(), column.end());
      const std::size_t n = column.size();
      out(c, d) = n % 2 == 1 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
    }
  }
  return out;
}

}  // namespace tomato
