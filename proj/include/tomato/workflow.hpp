#pragma once

// End-to-end runs shared by the CLI and the acceptance suite: density +
// graph construction, the two clustering passes, and recording sorting.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "tomato/density.hpp"
#include "tomato/diagram.hpp"
#include "tomato/error.hpp"
#include "tomato/geometry.hpp"
#include "tomato/pipeline.hpp"
#include "tomato/tomato.hpp"

namespace tomato {

enum class GraphType { knn, rips };

inline std::string_view graph_name(GraphType g) noexcept {
  return g == GraphType::knn ? "knn" : "rips";
}

inline GraphType parse_graph(std::string_view name) {
  if (name == "knn") return GraphType::knn;
  if (name == "rips") return GraphType::rips;
  throw Error(Errc::invalid_argument, "unknown graph type '" + std::string(name) + "'");
}

struct DensityConfig {
  Estimator type = Estimator::log_dtm;
  DtmParams dtm;
  std::optional<double> bandwidth;  // KDE; default from scott_bandwidth
};

struct GraphConfig {
  GraphType type = GraphType::knn;
  std::size_t k = kDefaultGraphK;
  double radius = 0.0;
};

struct ClusterConfig {
  DensityConfig density;
  GraphConfig graph;
};

struct Analysis {
  DensityEstimate density;
  NeighborhoodGraph graph;
};

/// Builds the density and the neighborhood graph. `external` must be given
/// when the density type is external.
inline Analysis analyze(const EventMatrix& events, const ClusterConfig& cfg,
                        const DensityEstimate* external = nullptr) {
  detail::require(!events.empty(), Errc::empty_input, "no events to analyze");
  const auto& dc = cfg.density;
  const bool dtm = dc.type == Estimator::dtm || dc.type == Estimator::log_dtm;
  const bool knn = cfg.graph.type == GraphType::knn;

  std::optional<KnnTable> table;
  if (dtm || knn) {
    std::size_t k = 0;
    if (dtm) {
      detail::check_dtm(dc.dtm, events.rows());
      k = dc.dtm.k;
    }
    if (knn) k = std::max(k, cfg.graph.k);
    table = knn_table(events, k);
  }

  Analysis out;
  switch (dc.type) {
    case Estimator::kde:
    case Estimator::log_kde: {
      const double h = dc.bandwidth ? *dc.bandwidth : scott_bandwidth(events);
      out.density = kde_density(events, h);
      if (dc.type == Estimator::log_kde) out.density = log_transform(out.density);
      break;
    }
    case Estimator::dtm: out.density = dtm_density(*table, dc.dtm, events.cols()); break;
    case Estimator::log_dtm: out.density = log_dtm_density(*table, dc.dtm, events.cols()); break;
    case Estimator::external:
      detail::require(external != nullptr, Errc::invalid_argument,
                      "external density selected but none supplied");
      detail::require(external->size() == events.rows(), Errc::misaligned,
                      "external density has " + std::to_string(external->size()) +
                          " values for " + std::to_string(events.rows()) + " events");
      out.density = *external;
      break;
  }

  if (knn) {
    // The shared table may hold more neighbors than the graph wants.
    KnnTable trimmed{table->n, cfg.graph.k, {}, {}};
    for (std::size_t i = 0; i < table->n; ++i) {
      const auto idx = table->neighbors(i);
      const auto dist = table->distances(i);
      trimmed.index.insert(trimmed.index.end(), idx.begin(), idx.begin() + cfg.graph.k);
      trimmed.distance.insert(trimmed.distance.end(), dist.begin(), dist.begin() + cfg.graph.k);
    }
    out.graph = knn_graph(trimmed);
  } else {
    out.graph = rips_graph(events, cfg.graph.radius);
  }
  return out;
}

struct DiagramRun {
  Analysis analysis;
  TomatoResult first;  // tau = +inf pass
  DetectionResult detection;
};

/// First pass: full persistence plus automatic cluster-count detection.
inline DiagramRun run_diagram(const EventMatrix& events, const ClusterConfig& cfg,
                              const DensityEstimate* external = nullptr) {
  DiagramRun run;
  run.analysis = analyze(events, cfg, external);
  run.first = tomato_cluster(run.analysis.graph, run.analysis.density, TomatoParams::with_tau(kInf));
  run.detection = detect_n_clusters(run.first.diagram, run.analysis.density.min());
  return run;
}

/// Second pass with a cluster count (or tau) chosen from the first.
inline TomatoResult run_cluster(const Analysis& analysis, const TomatoParams& params) {
  return tomato_cluster(analysis.graph, analysis.density, params);
}

struct SortConfig {
  ClusterConfig clustering;
  double threshold = 4.0;
  Window window;
  std::optional<std::size_t> n_clusters;  // overrides detection
};

struct SortRun {
  Normalized normalized;
  EventSet events;
  std::optional<DiagramRun> diagram;  // absent when too few events were found
  TomatoResult clusters;
  Raster raster;
};

/// Recording -> normalized -> events -> diagram -> count -> clusters -> raster.
/// Neighbor counts are capped at (events - 1) for very short recordings.
inline SortRun run_sort(const Recording& rec, const SortConfig& cfg) {
  SortRun run;
  run.normalized = mad_normalize(rec);
  run.events = detect_events(run.normalized.recording, cfg.threshold, cfg.window);
  const std::size_t n = run.events.events.rows();
  if (n < 2) {
    if (n == 1) {
      run.clusters.clustering.labels = {0};
      run.clusters.clustering.roots = {0};
      run.clusters.components = 1;
    }
    run.raster = build_raster(run.events, run.clusters.clustering, rec.sampling_rate_hz);
    return run;
  }
  ClusterConfig cc = cfg.clustering;
  cc.graph.k = std::min(cc.graph.k, n - 1);
  cc.density.dtm.k = std::min(cc.density.dtm.k, n - 1);
  run.diagram = run_diagram(run.events.events, cc);
  const std::size_t k = cfg.n_clusters ? *cfg.n_clusters : run.diagram->detection.k;
  run.clusters = run_cluster(run.diagram->analysis, TomatoParams::with_clusters(k));
  run.raster = build_raster(run.events, run.clusters.clustering, rec.sampling_rate_hz);
  return run;
}

}  // namespace tomato
