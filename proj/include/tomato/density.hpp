#pragma once

// Per-point density estimates. All estimators are unnormalized: constant
// factors shift or scale the persistence diagram but never change the merge
// order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "tomato/error.hpp"
#include "tomato/geometry.hpp"

namespace tomato {

enum class DensityScale { linear, log };

enum class Estimator { kde, log_kde, dtm, log_dtm, external };

constexpr std::string_view estimator_name(Estimator e) noexcept {
  switch (e) {
    case Estimator::kde: return "kde";
    case Estimator::log_kde: return "log-kde";
    case Estimator::dtm: return "dtm";
    case Estimator::log_dtm: return "log-dtm";
    case Estimator::external: return "external";
  }
  return "unknown";
}

inline Estimator parse_estimator(std::string_view name) {
  for (Estimator e : {Estimator::kde, Estimator::log_kde, Estimator::dtm, Estimator::log_dtm,
                      Estimator::external}) {
    if (estimator_name(e) == name) return e;
  }
  throw Error(Errc::invalid_argument, "unknown density type '" + std::string(name) + "'");
}

struct DensityEstimate {
  std::vector<double> values;
  DensityScale scale = DensityScale::linear;
  Estimator estimator = Estimator::external;

  std::size_t size() const noexcept { return values.size(); }
  double min() const { return *std::min_element(values.begin(), values.end()); }
};

struct DtmParams {
  std::size_t k = 10;
  double q = 2.0;
  double dim = 0.0;  // intrinsic-dimension exponent; 0 means "ambient dimension"

  double exponent_dim(std::size_t ambient) const {
    return dim > 0.0 ? dim : static_cast<double>(ambient);
  }
};

namespace detail {

inline void check_dtm(const DtmParams& params, std::size_t n) {
  require(params.k >= 1 && n >= 1 && params.k <= n - 1, Errc::invalid_argument,
          "k_dtm = " + std::to_string(params.k) + " outside [1, " +
              std::to_string(n == 0 ? 0 : n - 1) + "]");
  require(params.q > 0.0, Errc::invalid_argument, "DTM q must be positive");
  require(params.dim >= 0.0, Errc::invalid_argument, "DTM dim must be positive");
}

// log of the DTM density at point i: -(dim/q) * log(mean_m d_m^q).
inline double log_dtm_value(const KnnTable& table, std::size_t i, std::size_t k_dtm,
                            double q, double dim) {
  const auto dist = table.distances(i);
  double sum = 0.0;
  for (std::size_t m = 0; m < k_dtm; ++m) sum += std::pow(dist[m], q);
  require(sum > 0.0, Errc::degenerate_input,
          "point " + std::to_string(i) + " coincides with all of its " +
              std::to_string(k_dtm) + " nearest neighbors (DTM undefined)");
  return -(dim / q) * std::log(sum / static_cast<double>(k_dtm));
}

}  // namespace detail

/// Kernel bandwidth rule: n^(-1/(D+4)) times the mean per-coordinate standard deviation.
inline double scott_bandwidth(const EventMatrix& points) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  detail::require(n >= 1, Errc::empty_input, "bandwidth of an empty point set");
  double mean_sd = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += points(i, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (points(i, c) - mean) * (points(i, c) - mean);
    mean_sd += std::sqrt(var / static_cast<double>(n > 1 ? n - 1 : 1));
  }
  mean_sd /= static_cast<double>(d);
  detail::require(mean_sd > 0.0, Errc::degenerate_input,
                  "all points coincide; pass an explicit bandwidth");
  return std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0)) * mean_sd;
}

/// Gaussian KDE at the data points: (1/n) sum_j exp(-|x_i - x_j|^2 / (2 h^2)).
inline DensityEstimate kde_density(const EventMatrix& points, double bandwidth) {
  detail::require(bandwidth > 0.0 && std::isfinite(bandwidth), Errc::invalid_argument,
                  "KDE bandwidth must be positive");
  const std::size_t n = points.rows();
  detail::require(n >= 1, Errc::empty_input, "density of an empty point set");
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  std::vector<double> values(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double k = std::exp(-squared_distance(points.row(i), points.row(j)) * inv);
      values[i] += k;
      if (j != i) values[j] += k;
    }
  }
  for (double& v : values) v /= static_cast<double>(n);
  return {std::move(values), DensityScale::linear, Estimator::kde};
}

/// DTM density ((1/k) sum_m d_m^q)^(-dim/q) over the k nearest neighbors.
inline DensityEstimate dtm_density(const KnnTable& table, const DtmParams& params,
                                   std::size_t ambient_dim) {
  detail::check_dtm(params, table.n);
  detail::require(params.k <= table.k, Errc::invalid_argument,
                  "neighbor table holds fewer than k_dtm neighbors");
  const double dim = params.exponent_dim(ambient_dim);
  std::vector<double> values(table.n);
  for (std::size_t i = 0; i < table.n; ++i) {
    values[i] = std::exp(detail::log_dtm_value(table, i, params.k, params.q, dim));
    detail::require(values[i] > 0.0 && std::isfinite(values[i]), Errc::degenerate_input,
                    "DTM value at point " + std::to_string(i) +
                        " is not representable; use log-dtm");
  }
  return {std::move(values), DensityScale::linear, Estimator::dtm};
}

inline DensityEstimate dtm_density(const EventMatrix& points, const DtmParams& params) {
  detail::check_dtm(params, points.rows());
  return dtm_density(knn_table(points, params.k), params, points.cols());
}

/// Log-scale DTM, evaluated directly in log space so high `dim` cannot underflow.
inline DensityEstimate log_dtm_density(const KnnTable& table, const DtmParams& params,
                                       std::size_t ambient_dim) {
  detail::check_dtm(params, table.n);
  detail::require(params.k <= table.k, Errc::invalid_argument,
                  "neighbor table holds fewer than k_dtm neighbors");
  const double dim = params.exponent_dim(ambient_dim);
  std::vector<double> values(table.n);
  for (std::size_t i = 0; i < table.n; ++i) {
    values[i] = detail::log_dtm_value(table, i, params.k, params.q, dim);
  }
  return {std::move(values), DensityScale::log, Estimator::log_dtm};
}

inline DensityEstimate log_dtm_density(const EventMatrix& points, const DtmParams& params) {
  detail::check_dtm(params, points.rows());
  return log_dtm_density(knn_table(points, params.k), params, points.cols());
}

inline DensityEstimate log_transform(const DensityEstimate& density) {
  detail::require(density.scale == DensityScale::linear, Errc::invalid_argument,
                  "log_transform expects a linear-scale density");
  DensityEstimate out{std::vector<double>(density.size()), DensityScale::log, density.estimator};
  for (std::size_t i = 0; i < density.size(); ++i) {
    detail::require(density.values[i] > 0.0, Errc::invalid_argument,
                    "nonpositive density at point " + std::to_string(i));
    out.values[i] = std::log(density.values[i]);
  }
  if (density.estimator == Estimator::kde) out.estimator = Estimator::log_kde;
  if (density.estimator == Estimator::dtm) out.estimator = Estimator::log_dtm;
  return out;
}

/// Wraps externally supplied values; they only need to be finite.
inline DensityEstimate external_density(std::vector<double> values,
                                        DensityScale scale = DensityScale::log) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    detail::require(std::isfinite(values[i]), Errc::invalid_argument,
                    "non-finite density at point " + std::to_string(i));
    if (scale == DensityScale::linear) {
      detail::require(values[i] > 0.0, Errc::invalid_argument,
                      "nonpositive linear density at point " + std::to_string(i));
    }
  }
  return {std::move(values), scale, Estimator::external};
}

}  // namespace tomato
