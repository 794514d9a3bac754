#pragma once

// Synthetic multi-site spike events: each neuron scales one standard spike
// shape by a per-site amplitude, white Gaussian noise is added, and a chosen
// fraction of events are pairwise superpositions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tomato/error.hpp"
#include "tomato/geometry.hpp"

namespace tomato {

struct SimConfig {
  std::size_t n_neurons = 3;
  std::size_t events_per_neuron = 100;
  double amp_max = 20.0;
  double superposition_freq = 0.0;
  double noise_sd = 1.0;
  std::uint64_t rng_seed = 0;
  std::size_t n_sites = 4;
  std::size_t samples_per_site = 45;
  int max_shift = 5;  // superposition offset drawn uniformly in [-max_shift, max_shift]

  std::size_t dimension() const noexcept { return n_sites * samples_per_site; }
  std::size_t total_events() const noexcept { return n_neurons * events_per_neuron; }

  void validate() const {
    detail::require(n_neurons >= 1, Errc::invalid_argument, "n_neurons must be positive");
    detail::require(events_per_neuron >= 1, Errc::invalid_argument,
                    "events_per_neuron must be positive");
    detail::require(amp_max > 0.0 && std::isfinite(amp_max), Errc::invalid_argument,
                    "amp_max must be positive");
    detail::require(superposition_freq >= 0.0 && superposition_freq <= 1.0,
                    Errc::invalid_argument, "superposition_freq must lie in [0, 1]");
    detail::require(noise_sd >= 0.0 && std::isfinite(noise_sd), Errc::invalid_argument,
                    "noise_sd must be nonnegative");
    detail::require(n_sites >= 1, Errc::invalid_argument, "n_sites must be positive");
    detail::require(samples_per_site >= 8, Errc::invalid_argument,
                    "samples_per_site must be at least 8");
    detail::require(max_shift >= 0, Errc::invalid_argument, "max_shift must be nonnegative");
  }
};

struct GroundTruth {
  std::vector<std::size_t> labels;      // per event, the (first) neuron
  std::vector<bool> is_superposition;   // per event
  std::vector<double> amplitudes;       // n_neurons x n_sites, row-major
  std::size_t n_sites = 0;

  double amplitude(std::size_t neuron, std::size_t site) const {
    return amplitudes[neuron * n_sites + site];
  }
};

/// Unit-peak spike: a valley at floor(samples/3) followed by a smaller
/// positive overshoot. For 45 samples the valley sits at index 15.
inline std::vector<double> standard_shape(std::size_t samples) {
  detail::require(samples >= 8, Errc::invalid_argument, "standard shape needs at least 8 samples");
  const double scale = static_cast<double>(samples) / 45.0;
  const double valley = std::floor(static_cast<double>(samples) / 3.0);
  const double s1 = 2.5 * scale;
  const double s2 = 6.0 * scale;
  const double lag = 10.0 * scale;
  std::vector<double> shape(samples);
  double peak = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i);
    shape[i] = -std::exp(-(t - valley) * (t - valley) / (2.0 * s1 * s1)) +
               0.4 * std::exp(-(t - valley - lag) * (t - valley - lag) / (2.0 * s2 * s2));
    peak = std::max(peak, std::abs(shape[i]));
  }
  for (double& v : shape) v /= peak;
  return shape;
}

/// Noise-free event of one neuron: per site, amplitude x standard shape.
inline std::vector<double> ideal_event(const GroundTruth& truth, std::size_t neuron,
                                       const std::vector<double>& shape) {
  std::vector<double> event(truth.n_sites * shape.size());
  for (std::size_t s = 0; s < truth.n_sites; ++s) {
    for (std::size_t t = 0; t < shape.size(); ++t) {
      event[s * shape.size() + t] = truth.amplitude(neuron, s) * shape[t];
    }
  }
  return event;
}

struct Simulation {
  EventMatrix events;
  GroundTruth truth;
};

inline Simulation simulate(const SimConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> amp(0.0, cfg.amp_max);
  std::normal_distribution<double> noise(0.0, 1.0);

  GroundTruth truth;
  truth.n_sites = cfg.n_sites;
  truth.amplitudes.resize(cfg.n_neurons * cfg.n_sites);
  for (std::size_t u = 0; u < cfg.n_neurons; ++u) {
    // Neurons whose largest site amplitude is tiny would be pure noise.
    double largest = 0.0;
    do {
      largest = 0.0;
      for (std::size_t s = 0; s < cfg.n_sites; ++s) {
        truth.amplitudes[u * cfg.n_sites + s] = amp(rng);
        largest = std::max(largest, truth.amplitudes[u * cfg.n_sites + s]);
      }
    } while (largest < 0.2 * cfg.amp_max);
  }

  const std::vector<double> shape = standard_shape(cfg.samples_per_site);
  std::vector<std::vector<double>> ideal(cfg.n_neurons);
  for (std::size_t u = 0; u < cfg.n_neurons; ++u) ideal[u] = ideal_event(truth, u, shape);

  const std::size_t total = cfg.total_events();
  truth.labels.resize(total);
  for (std::size_t e = 0; e < total; ++e) truth.labels[e] = e / cfg.events_per_neuron;

  // An exact count of superposed events, placed at random positions.
  const auto n_super = static_cast<std::size_t>(
      std::llround(cfg.superposition_freq * static_cast<double>(total)));
  std::vector<std::size_t> slots(total);
  std::iota(slots.begin(), slots.end(), std::size_t{0});
  std::shuffle(slots.begin(), slots.end(), rng);
  truth.is_superposition.assign(total, false);
  for (std::size_t m = 0; m < n_super; ++m) truth.is_superposition[slots[m]] = true;

  const std::size_t len = cfg.samples_per_site;
  EventMatrix events(total, cfg.dimension());
  std::uniform_int_distribution<int> shift_dist(-cfg.max_shift, cfg.max_shift);
  std::uniform_int_distribution<std::size_t> other_dist(
      0, cfg.n_neurons > 1 ? cfg.n_neurons - 2 : 0);
  for (std::size_t e = 0; e < total; ++e) {
    const std::size_t first = truth.labels[e];
    auto row = events.row(e);
    std::copy(ideal[first].begin(), ideal[first].end(), row.begin());
    if (truth.is_superposition[e]) {
      std::size_t second = first;
      if (cfg.n_neurons > 1) {
        second = other_dist(rng);
        if (second >= first) ++second;
      }
      const int shift = shift_dist(rng);
      for (std::size_t s = 0; s < cfg.n_sites; ++s) {
        for (std::size_t t = 0; t < len; ++t) {
          const long src = static_cast<long>(t) - shift;
          if (src < 0 || src >= static_cast<long>(len)) continue;
          row[s * len + t] += ideal[second][s * len + static_cast<std::size_t>(src)];
        }
      }
    }
    if (cfg.noise_sd > 0.0) {
      for (double& v : row) v += cfg.noise_sd * noise(rng);
    }
  }
  return {std::move(events), std::move(truth)};
}

}  // namespace tomato
