#pragma once

// File formats: events (CSV or binary), density and label columns, ground
// truth, recordings, diagram/detection JSON, confusion CSV and rasters.
//
// Binary events:    uint32 n, uint32 D, then n*D float64 row-major (little-endian).
// Binary recording: uint32 sites, uint32 samples, float64 rate, then
//                   sites*samples float64, site-major.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tomato/density.hpp"
#include "tomato/diagram.hpp"
#include "tomato/error.hpp"
#include "tomato/evalsort.hpp"
#include "tomato/geometry.hpp"
#include "tomato/pipeline.hpp"
#include "tomato/spikesim.hpp"
#include "tomato/tomato.hpp"

namespace tomato::io {

using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace detail {

inline std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  tomato::detail::require(in.good(), Errc::io, "cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  tomato::detail::require(out.good(), Errc::io, "cannot open '" + path.string() + "' for writing");
  out << std::setprecision(17);
  return out;
}

inline double parse_double(const std::string& field, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw Error(Errc::parse, "not a number '" + field + "' at " + where);
  }
  while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used]))) ++used;
  tomato::detail::require(used == field.size(), Errc::parse,
                          "trailing characters in '" + field + "' at " + where);
  return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Numeric CSV table; blank lines are skipped, an optional header row dropped.
inline std::vector<std::vector<double>> read_table(const std::filesystem::path& path,
                                                   bool skip_header) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && skip_header) continue;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    for (const auto& f : split_csv(line)) {
      row.push_back(parse_double(f, path.string() + ":" + std::to_string(line_no)));
    }
    if (!rows.empty()) {
      tomato::detail::require(row.size() == rows.front().size(), Errc::parse,
                              path.string() + ":" + std::to_string(line_no) + " has " +
                                  std::to_string(row.size()) + " columns, expected " +
                                  std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const std::string& what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  tomato::detail::require(in.gcount() == static_cast<std::streamsize>(sizeof(T)), Errc::parse,
                          "truncated " + what);
  return value;
}

inline bool has_extension(const std::filesystem::path& path, const char* ext) {
  return path.extension() == ext;
}

}  // namespace detail

// ---------------------------------------------------------------- events

inline EventMatrix read_events_csv(const std::filesystem::path& path, bool skip_header = false) {
  const auto rows = detail::read_table(path, skip_header);
  tomato::detail::require(!rows.empty(), Errc::empty_input, "no events in '" + path.string() + "'");
  std::vector<double> data;
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return EventMatrix(rows.size(), rows.front().size(), std::move(data));
}

inline void write_events_csv(const std::filesystem::path& path, const EventMatrix& events) {
  auto out = detail::open_out(path);
  for (std::size_t i = 0; i < events.rows(); ++i) {
    for (std::size_t j = 0; j < events.cols(); ++j) out << (j ? "," : "") << events(i, j);
    out << '\n';
  }
}

inline EventMatrix read_events_bin(const std::filesystem::path& path) {
  auto in = detail::open_in(path, true);
  const auto n = detail::read_raw<std::uint32_t>(in, "event header");
  const auto d = detail::read_raw<std::uint32_t>(in, "event header");
  tomato::detail::require(d >= 1, Errc::parse, "event dimension must be positive");
  std::vector<double> data(static_cast<std::size_t>(n) * d);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  tomato::detail::require(in.gcount() == static_cast<std::streamsize>(data.size() * sizeof(double)),
                          Errc::parse, "truncated event data in '" + path.string() + "'");
  return EventMatrix(n, d, std::move(data));
}

inline void write_events_bin(const std::filesystem::path& path, const EventMatrix& events) {
  tomato::detail::require(events.rows() <= std::numeric_limits<std::uint32_t>::max(),
                          Errc::invalid_argument, "too many events for the binary header");
  auto out = detail::open_out(path, true);
  detail::write_raw(out, static_cast<std::uint32_t>(events.rows()));
  detail::write_raw(out, static_cast<std::uint32_t>(events.cols()));
  out.write(reinterpret_cast<const char*>(events.data().data()),
            static_cast<std::streamsize>(events.data().size() * sizeof(double)));
}

/// Dispatches on the extension: ".bin" is binary, anything else CSV.
inline EventMatrix read_events(const std::filesystem::path& path, bool skip_header = false) {
  return detail::has_extension(path, ".bin") ? read_events_bin(path)
                                             : read_events_csv(path, skip_header);
}

inline void write_events(const std::filesystem::path& path, const EventMatrix& events) {
  if (detail::has_extension(path, ".bin")) {
    write_events_bin(path, events);
  } else {
    write_events_csv(path, events);
  }
}

// ---------------------------------------------------------------- columns

inline std::vector<double> read_column(const std::filesystem::path& path, bool skip_header = false) {
  const auto rows = detail::read_table(path, skip_header);
  std::vector<double> out;
  for (const auto& r : rows) {
    tomato::detail::require(r.size() == 1, Errc::parse,
                            "'" + path.string() + "' must have a single column");
    out.push_back(r[0]);
  }
  return out;
}

inline void write_column(const std::filesystem::path& path, const std::vector<double>& values) {
  auto out = detail::open_out(path);
  for (double v : values) out << v << '\n';
}

inline DensityEstimate read_density(const std::filesystem::path& path,
                                    DensityScale scale = DensityScale::log) {
  return external_density(read_column(path), scale);
}

inline void write_density(const std::filesystem::path& path, const DensityEstimate& density) {
  write_column(path, density.values);
}

inline std::vector<std::size_t> read_labels(const std::filesystem::path& path) {
  std::vector<std::size_t> out;
  for (double v : read_column(path)) {
    tomato::detail::require(v >= 0 && v == std::floor(v), Errc::parse,
                            "label " + std::to_string(v) + " is not a nonnegative integer");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

inline void write_labels(const std::filesystem::path& path, const std::vector<std::size_t>& labels) {
  auto out = detail::open_out(path);
  for (std::size_t v : labels) out << v << '\n';
}

// ---------------------------------------------------------------- ground truth

inline void write_ground_truth(const std::filesystem::path& path, const GroundTruth& truth) {
  auto out = detail::open_out(path);
  out << "event_index,true_label,is_superposition\n";
  for (std::size_t e = 0; e < truth.labels.size(); ++e) {
    out << e << ',' << truth.labels[e] << ',' << (truth.is_superposition[e] ? 1 : 0) << '\n';
  }
}

/// Reads the ground-truth CSV (header row required); returns labels in
/// event order and, optionally, the superposition flags.
inline std::vector<std::size_t> read_ground_truth(const std::filesystem::path& path,
                                                  std::vector<bool>* superposed = nullptr) {
  const auto rows = detail::read_table(path, true);
  std::vector<std::size_t> labels(rows.size());
  if (superposed) superposed->assign(rows.size(), false);
  std::vector<bool> seen(rows.size(), false);
  for (const auto& r : rows) {
    tomato::detail::require(r.size() == 3, Errc::parse, "ground truth rows need 3 columns");
    const auto idx = static_cast<std::size_t>(r[0]);
    tomato::detail::require(r[0] >= 0 && idx < rows.size() && !seen[idx], Errc::parse,
                            "bad event index in ground truth");
    seen[idx] = true;
    labels[idx] = static_cast<std::size_t>(r[1]);
    if (superposed) (*superposed)[idx] = r[2] != 0.0;
  }
  return labels;
}

inline json simulation_json(const SimConfig& cfg, const GroundTruth& truth) {
  json amps = json::array();
  for (std::size_t u = 0; u < cfg.n_neurons; ++u) {
    json row = json::array();
    for (std::size_t s = 0; s < cfg.n_sites; ++s) row.push_back(truth.amplitude(u, s));
    amps.push_back(row);
  }
  return {{"config",
           {{"n_neurons", cfg.n_neurons},
            {"events_per_neuron", cfg.events_per_neuron},
            {"amp_max", cfg.amp_max},
            {"superposition_freq", cfg.superposition_freq},
            {"noise_sd", cfg.noise_sd},
            {"seed", cfg.rng_seed},
            {"n_sites", cfg.n_sites},
            {"samples_per_site", cfg.samples_per_site},
            {"max_shift", cfg.max_shift}}},
          {"amplitudes", amps}};
}

// ---------------------------------------------------------------- diagrams

/// [{"birth": b, "death": d}] with null for an infinite death.
inline json diagram_json(const PersistenceDiagram& diagram) {
  json arr = json::array();
  for (const auto& p : diagram.points) {
    arr.push_back({{"birth", p.birth}, {"death", p.essential() ? json(nullptr) : json(p.death)}});
  }
  return arr;
}

inline PersistenceDiagram diagram_from_json(const json& arr) {
  tomato::detail::require(arr.is_array(), Errc::parse, "diagram JSON must be an array");
  PersistenceDiagram out;
  for (const auto& item : arr) {
    tomato::detail::require(item.contains("birth") && item.contains("death"), Errc::parse,
                            "diagram entries need birth and death");
    DiagramPoint p;
    p.birth = item["birth"].get<double>();
    p.death = item["death"].is_null() ? -kInf : item["death"].get<double>();
    tomato::detail::require(p.birth >= p.death, Errc::parse, "diagram point with death > birth");
    out.points.push_back(p);
  }
  return out;
}

inline json detection_json(const DetectionResult& det) {
  return {{"k", det.k},
          {"tau_line", det.tau_line},
          {"group_mode", det.mode == GroupMode::two_groups ? "two_groups" : "single_group"},
          {"candidates", det.candidates},
          {"groups", det.group},
          {"selected", det.selected},
          {"centroid_gap", det.centroid_gap},
          {"max_spread", det.max_spread},
          {"separation", std::isinf(det.separation) ? json(nullptr) : json(det.separation)},
          {"low_confidence", det.low_confidence}};
}

inline void write_json(const std::filesystem::path& path, const json& value) {
  auto out = detail::open_out(path);
  out << value.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, "'" + path.string() + "': " + e.what());
  }
}

// ---------------------------------------------------------------- evaluation

inline void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& m) {
  auto out = detail::open_out(path);
  out << "neuron";
  for (long id : m.cluster_ids) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << m.neuron_ids[i];
    for (std::size_t j = 0; j < m.cols(); ++j) out << ',' << m.at(i, j);
    out << '\n';
  }
}

inline json evaluation_json(const ConfusionMatrix& m) {
  return {{"diagonal_weight", diagonal_weight(m)},
          {"n_identified", identified_rows(m).size()},
          {"identified_diagonal_weight", identified_diagonal_weight(m)},
          {"n_neurons", m.rows()},
          {"n_clusters", std::count_if(m.cluster_ids.begin(), m.cluster_ids.end(),
                                       [](long id) { return id >= 0; })},
          {"unmatched_neurons", m.unmatched_neurons()}};
}

// ---------------------------------------------------------------- recordings

inline Recording read_recording_bin(const std::filesystem::path& path) {
  auto in = detail::open_in(path, true);
  const auto sites = detail::read_raw<std::uint32_t>(in, "recording header");
  const auto samples = detail::read_raw<std::uint32_t>(in, "recording header");
  const auto rate = detail::read_raw<double>(in, "recording header");
  std::vector<double> data(static_cast<std::size_t>(sites) * samples);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  tomato::detail::require(in.gcount() == static_cast<std::streamsize>(data.size() * sizeof(double)),
                          Errc::parse, "truncated recording data in '" + path.string() + "'");
  return Recording(sites, samples, rate, std::move(data));
}

inline void write_recording_bin(const std::filesystem::path& path, const Recording& rec) {
  auto out = detail::open_out(path, true);
  detail::write_raw(out, static_cast<std::uint32_t>(rec.n_sites));
  detail::write_raw(out, static_cast<std::uint32_t>(rec.n_samples));
  detail::write_raw(out, rec.sampling_rate_hz);
  out.write(reinterpret_cast<const char*>(rec.data.data()),
            static_cast<std::streamsize>(rec.data.size() * sizeof(double)));
}

/// CSV recording: one column per site, one row per sample.
inline Recording read_recording_csv(const std::filesystem::path& path, double rate_hz,
                                    bool skip_header = false) {
  const auto rows = detail::read_table(path, skip_header);
  tomato::detail::require(!rows.empty(), Errc::empty_input, "empty recording '" + path.string() + "'");
  const std::size_t sites = rows.front().size();
  std::vector<double> data(sites * rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t s = 0; s < sites; ++s) data[s * rows.size() + t] = rows[t][s];
  }
  return Recording(sites, rows.size(), rate_hz, std::move(data));
}

/// One headerless float64 file per site (equal lengths).
inline Recording read_recording_sites(const std::vector<std::filesystem::path>& paths,
                                      double rate_hz) {
  tomato::detail::require(!paths.empty(), Errc::invalid_argument, "no site files given");
  std::vector<double> data;
  std::size_t samples = 0;
  for (const auto& p : paths) {
    auto in = detail::open_in(p, true);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    tomato::detail::require(bytes.size() % sizeof(double) == 0, Errc::parse,
                            "'" + p.string() + "' is not a float64 stream");
    const std::size_t n = bytes.size() / sizeof(double);
    tomato::detail::require(samples == 0 || n == samples, Errc::dimension_mismatch,
                            "site files differ in length");
    samples = n;
    const std::size_t offset = data.size();
    data.resize(offset + n);
    std::memcpy(data.data() + offset, bytes.data(), bytes.size());
  }
  return Recording(paths.size(), samples, rate_hz, std::move(data));
}

inline Recording read_recording(const std::filesystem::path& path, double rate_hz,
                                bool skip_header = false) {
  return detail::has_extension(path, ".bin") ? read_recording_bin(path)
                                             : read_recording_csv(path, rate_hz, skip_header);
}

inline void write_raster_csv(const std::filesystem::path& path, const Raster& raster) {
  auto out = detail::open_out(path);
  out << "cluster_id,time_seconds\n";
  for (std::size_t c = 0; c < raster.rows.size(); ++c) {
    for (double t : raster.rows[c]) out << c << ',' << t << '\n';
  }
}

}  // namespace tomato::io
