#pragma once

// Recording preprocessing: per-site MAD normalization, threshold detection of
// extrema, multi-site cuts assembled into events, and rasters built from the
// clustered events.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tomato/error.hpp"
#include "tomato/geometry.hpp"
#include "tomato/tomato.hpp"

namespace tomato {

/// Multi-site recording stored site-major: data[site * n_samples + t].
struct Recording {
  std::size_t n_sites = 0;
  std::size_t n_samples = 0;
  double sampling_rate_hz = 15000.0;
  std::vector<double> data;

  Recording() = default;
  Recording(std::size_t sites, std::size_t samples, double rate, std::vector<double> values)
      : n_sites(sites), n_samples(samples), sampling_rate_hz(rate), data(std::move(values)) {
    detail::require(sites >= 1 && samples >= 1, Errc::invalid_argument,
                    "recording needs at least one site and one sample");
    detail::require(data.size() == sites * samples, Errc::dimension_mismatch,
                    "recording data size does not match sites x samples");
    detail::require(rate > 0.0 && std::isfinite(rate), Errc::invalid_argument,
                    "sampling rate must be positive");
    for (double v : data) {
      detail::require(std::isfinite(v), Errc::invalid_argument, "non-finite recording sample");
    }
  }

  std::span<const double> site(std::size_t s) const { return {data.data() + s * n_samples, n_samples}; }
  std::span<double> site(std::size_t s) { return {data.data() + s * n_samples, n_samples}; }
};

struct Window {
  std::size_t pre = 15;   // samples before the extremum
  std::size_t post = 30;  // samples from the extremum on (extremum included)

  std::size_t length() const noexcept { return pre + post; }
};

struct EventSet {
  EventMatrix events;
  std::vector<std::size_t> times;  // detection sample per event, strictly increasing
  Window window;
};

struct Raster {
  std::vector<std::vector<double>> rows;  // per cluster, sorted spike times in seconds

  std::size_t spike_count() const {
    std::size_t total = 0;
    for (const auto& r : rows) total += r.size();
    return total;
  }
};

inline constexpr double kMadToSd = 1.4826;

namespace detail {

inline double median(std::vector<double> v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace detail

struct Normalized {
  Recording recording;
  std::vector<double> scale;  // per site, 1.4826 * MAD
};

inline Normalized mad_normalize(const Recording& rec) {
  Normalized out{rec, std::vector<double>(rec.n_sites)};
  for (std::size_t s = 0; s < rec.n_sites; ++s) {
    const auto x = rec.site(s);
    const double med = detail::median({x.begin(), x.end()});
    std::vector<double> dev(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) dev[t] = std::abs(x[t] - med);
    const double mad = detail::median(std::move(dev));
    detail::require(mad > 0.0, Errc::degenerate_input,
                    "site " + std::to_string(s) + " has zero median absolute deviation");
    out.scale[s] = kMadToSd * mad;
    for (double& v : out.recording.site(s)) v /= out.scale[s];
  }
  return out;
}

/// Detects local extrema of |x| above `threshold` on any site, keeps the
/// largest one among detections closer than the window length, and cuts
/// [t - pre, t + post) on every site. Cuts crossing the borders are dropped.
inline EventSet detect_events(const Recording& rec, double threshold, Window window = {}) {
  detail::require(threshold > 0.0, Errc::invalid_argument, "threshold must be positive");
  detail::require(window.length() >= 1 && window.post >= 1, Errc::invalid_argument,
                  "window must contain the extremum");
  detail::require(window.length() <= rec.n_samples, Errc::invalid_argument,
                  "window of " + std::to_string(window.length()) +
                      " samples exceeds the recording length " + std::to_string(rec.n_samples));
  const std::size_t n = rec.n_samples;

  // Per sample: the largest |x| among sites where it is a supra-threshold local extremum.
  std::vector<std::pair<std::size_t, double>> candidates;
  for (std::size_t t = 0; t < n; ++t) {
    double best = 0.0;
    for (std::size_t s = 0; s < rec.n_sites; ++s) {
      const auto x = rec.site(s);
      const double a = std::abs(x[t]);
      if (a <= threshold) continue;
      const bool left_ok = t == 0 || a >= std::abs(x[t - 1]);
      const bool right_ok = t + 1 == n || a > std::abs(x[t + 1]);
      if (left_ok && right_ok) best = std::max(best, a);
    }
    if (best > 0.0) candidates.emplace_back(t, best);
  }

  const std::size_t dead = window.length();
  std::vector<std::size_t> kept;
  std::optional<std::pair<std::size_t, double>> pending;
  for (const auto& c : candidates) {
    if (pending && c.first - pending->first < dead) {
      if (c.second > pending->second) pending = c;
      continue;
    }
    if (pending) kept.push_back(pending->first);
    pending = c;
  }
  if (pending) kept.push_back(pending->first);

  EventSet out;
  out.window = window;
  std::vector<double> rows;
  for (std::size_t t : kept) {
    if (t < window.pre || t + window.post > n) continue;
    out.times.push_back(t);
    for (std::size_t s = 0; s < rec.n_sites; ++s) {
      const auto x = rec.site(s);
      rows.insert(rows.end(), x.begin() + static_cast<std::ptrdiff_t>(t - window.pre),
                  x.begin() + static_cast<std::ptrdiff_t>(t + window.post));
    }
  }
  out.events = EventMatrix(out.times.size(), rec.n_sites * window.length(), std::move(rows));
  return out;
}

inline Raster build_raster(const EventSet& events, const ClusterLabeling& labels, double rate_hz) {
  detail::require(labels.labels.size() == events.times.size(), Errc::misaligned,
                  std::to_string(labels.labels.size()) + " labels for " +
                      std::to_string(events.times.size()) + " events");
  detail::require(rate_hz > 0.0, Errc::invalid_argument, "sampling rate must be positive");
  Raster raster;
  raster.rows.resize(labels.count());
  for (std::size_t e = 0; e < events.times.size(); ++e) {
    const std::size_t c = labels.labels[e];
    detail::require(c < labels.count(), Errc::invalid_argument, "label out of range");
    raster.rows[c].push_back(static_cast<double>(events.times[e]) / rate_hz);
  }
  for (auto& row : raster.rows) std::sort(row.begin(), row.end());
  return raster;
}

}  // namespace tomato
