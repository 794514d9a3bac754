// tomato_cli: simulate | diagram | cluster | sort | evaluate
//
// Every subcommand resolves its settings in three layers (built-in defaults,
// then --config JSON, then explicit flags), prints the effective settings as
// JSON on stdout and writes them to <out-dir>/config.json next to its outputs.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tomato/diagram.hpp"
#include "tomato/error.hpp"
#include "tomato/evalsort.hpp"
#include "tomato/io.hpp"
#include "tomato/spikesim.hpp"
#include "tomato/workflow.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tomato;

namespace {

// Options of one subcommand, tracked so explicit flags can be layered over
// the config file.
class Settings {
 public:
  explicit Settings(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& key, T& var, const std::string& help) {
    const std::string flag = "--" + dashed(key);
    auto* opt = app_->add_option(flag, var, help);
    defaults_[key] = var;
    overlays_.push_back([opt, key, &var](json& eff) {
      if (opt->count() > 0) eff[key] = var;
    });
    return opt;
  }

  CLI::Option* add_flag(const std::string& key, bool& var, const std::string& help) {
    auto* opt = app_->add_flag("--" + dashed(key), var, help);
    defaults_[key] = var;
    overlays_.push_back([opt, key, &var](json& eff) {
      if (opt->count() > 0) eff[key] = var;
    });
    return opt;
  }

  // Optional values have no default; they appear only once set.
  template <class T>
  CLI::Option* add_optional(const std::string& key, std::optional<T>& var, const std::string& help) {
    auto* opt = app_->add_option("--" + dashed(key), var, help);
    overlays_.push_back([opt, key, &var](json& eff) {
      if (opt->count() > 0 && var) eff[key] = *var;
    });
    return opt;
  }

  json resolve(const std::string& config_path) const {
    json eff = defaults_;
    if (!config_path.empty()) {
      const json file = io::read_json(config_path);
      detail::require(file.is_object(), Errc::parse, "config file must hold a JSON object");
      for (const auto& [key, value] : file.items()) {
        detail::require(known(key), Errc::parse, "unknown config key '" + key + "'");
        eff[key] = value;
      }
    }
    for (const auto& apply : overlays_) apply(eff);
    return eff;
  }

 private:
  static std::string dashed(std::string key) {
    for (char& c : key) {
      if (c == '_') c = '-';
    }
    return key;
  }

  bool known(const std::string& key) const {
    return app_->get_option_no_throw("--" + dashed(key)) != nullptr;
  }

  CLI::App* app_;
  json defaults_ = json::object();
  std::vector<std::function<void(json&)>> overlays_;
};

template <class T>
T get(const json& eff, const std::string& key) {
  try {
    return eff.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_argument, "setting '" + key + "': " + e.what());
  }
}

template <class T>
std::optional<T> get_optional(const json& eff, const std::string& key) {
  if (!eff.contains(key) || eff[key].is_null()) return std::nullopt;
  return get<T>(eff, key);
}

// ------------------------------------------------------------ shared option groups

struct ClusterFlags {
  std::string density = "log-dtm";
  std::size_t k_dtm = 10;
  double q = 2.0;
  double dim = 0.0;
  std::optional<double> bandwidth;
  std::string graph = "knn";
  std::size_t k = kDefaultGraphK;
  double radius = 0.0;

  void attach(Settings& s) {
    s.add("density", density, "kde, log-kde, dtm, log-dtm or external");
    s.add("k_dtm", k_dtm, "neighbors averaged by the DTM estimator");
    s.add("q", q, "DTM distance exponent");
    s.add("dim", dim, "DTM dimension exponent (0 = ambient dimension; 2 suits spike events)");
    s.add_optional("bandwidth", bandwidth, "KDE bandwidth (default: Scott-style rule)");
    s.add("graph", graph, "knn or rips");
    s.add("k", k, "neighbors per point in the k-NN graph");
    s.add("radius", radius, "Rips graph radius");
  }
};

ClusterConfig cluster_config(const json& eff) {
  ClusterConfig cc;
  cc.density.type = parse_estimator(get<std::string>(eff, "density"));
  cc.density.dtm.k = get<std::size_t>(eff, "k_dtm");
  cc.density.dtm.q = get<double>(eff, "q");
  cc.density.dtm.dim = get<double>(eff, "dim");
  cc.density.bandwidth = get_optional<double>(eff, "bandwidth");
  cc.graph.type = parse_graph(get<std::string>(eff, "graph"));
  cc.graph.k = get<std::size_t>(eff, "k");
  cc.graph.radius = get<double>(eff, "radius");
  if (cc.graph.type == GraphType::rips) {
    detail::require(cc.graph.radius > 0.0, Errc::invalid_argument, "--graph rips needs --radius > 0");
  }
  return cc;
}

// Events plus, for --density external, the matching density column.
struct Inputs {
  EventMatrix events;
  std::optional<DensityEstimate> external;
};

Inputs load_inputs(const json& eff, const ClusterConfig& cc) {
  const auto path = get<std::string>(eff, "events");
  detail::require(!path.empty(), Errc::invalid_argument, "--events is required");
  Inputs in{io::read_events(path, get<bool>(eff, "skip_header")), std::nullopt};
  const auto density_file = get<std::string>(eff, "density_file");
  if (cc.density.type == Estimator::external) {
    detail::require(!density_file.empty(), Errc::invalid_argument,
                    "--density external needs --density-file");
    in.external = io::read_density(density_file);
  }
  return in;
}

fs::path prepare_out_dir(const json& eff) {
  fs::path dir = get<std::string>(eff, "out_dir");
  std::error_code ec;
  fs::create_directories(dir, ec);
  detail::require(!ec, Errc::io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void echo(const json& eff, const fs::path& dir) {
  std::cout << eff.dump(2) << '\n';
  io::write_json(dir / "config.json", eff);
}

json clustering_json(const TomatoResult& r) {
  return {{"n_clusters", r.clustering.count()},
          {"roots", r.clustering.roots},
          {"tau", std::isinf(r.tau) ? json("inf") : json(r.tau)},
          {"components", r.components},
          {"count_mismatch", r.count_mismatch}};
}

void warn_mismatch(const TomatoResult& r, std::size_t requested) {
  if (!r.count_mismatch) return;
  std::cerr << "warning: requested " << requested << " clusters, obtained " << r.clustering.count();
  if (r.components > requested) std::cerr << " (the graph has " << r.components << " connected components)";
  std::cerr << '\n';
}

void write_medians(const fs::path& path, const EventMatrix& events, const ClusterLabeling& labels) {
  io::write_events_csv(path, cluster_medians(events, labels));
}

// ------------------------------------------------------------ subcommands

int cmd_simulate(const json& eff) {
  SimConfig cfg;
  cfg.n_neurons = get<std::size_t>(eff, "n_neurons");
  cfg.events_per_neuron = get<std::size_t>(eff, "events_per_neuron");
  cfg.amp_max = get<double>(eff, "amp_max");
  cfg.superposition_freq = get<double>(eff, "superposition_freq");
  cfg.noise_sd = get<double>(eff, "noise_sd");
  cfg.rng_seed = get<std::uint64_t>(eff, "seed");
  cfg.n_sites = get<std::size_t>(eff, "n_sites");
  cfg.samples_per_site = get<std::size_t>(eff, "samples_per_site");
  cfg.max_shift = get<int>(eff, "max_shift");
  const auto format = get<std::string>(eff, "format");
  detail::require(format == "csv" || format == "bin", Errc::invalid_argument, "--format must be csv or bin");

  const auto dir = prepare_out_dir(eff);
  echo(eff, dir);
  const auto sim = simulate(cfg);
  io::write_events(dir / ("events." + format), sim.events);
  io::write_ground_truth(dir / "ground_truth.csv", sim.truth);
  io::write_json(dir / "simulation.json", io::simulation_json(cfg, sim.truth));
  std::size_t superposed = 0;
  for (bool b : sim.truth.is_superposition) superposed += b;
  std::cerr << "simulated " << sim.events.rows() << " events (" << superposed << " superpositions) of dimension "
            << sim.events.cols() << '\n';
  return 0;
}

int cmd_diagram(const json& eff) {
  const auto cc = cluster_config(eff);
  const auto in = load_inputs(eff, cc);
  const auto dir = prepare_out_dir(eff);
  echo(eff, dir);
  const auto run = run_diagram(in.events, cc, in.external ? &*in.external : nullptr);
  const double min_density = run.analysis.density.min();
  io::write_density(dir / "density.csv", run.analysis.density);
  io::write_json(dir / "diagram.json", {{"diagram", io::diagram_json(run.first.diagram)},
                                        {"min_density", min_density},
                                        {"components", run.first.components},
                                        {"detection", io::detection_json(run.detection)}});
  std::cerr << run.first.diagram.size() << " diagram points, " << run.first.components
            << " essential; detected " << run.detection.k << " clusters"
            << (run.detection.low_confidence ? " (low confidence)" : "") << '\n';
  return 0;
}

int cmd_cluster(const json& eff) {
  const auto cc = cluster_config(eff);
  const auto n_clusters = get_optional<std::size_t>(eff, "n_clusters");
  const auto tau = get_optional<double>(eff, "tau");
  detail::require(!(n_clusters && tau), Errc::invalid_argument, "give either --n-clusters or --tau, not both");
  const auto in = load_inputs(eff, cc);
  const auto dir = prepare_out_dir(eff);
  echo(eff, dir);

  const auto analysis = analyze(in.events, cc, in.external ? &*in.external : nullptr);
  TomatoParams params;
  std::optional<DetectionResult> detection;
  if (n_clusters) {
    params = TomatoParams::with_clusters(*n_clusters);
  } else if (tau) {
    params = TomatoParams::with_tau(*tau);
  } else {
    // No count or threshold given: take the count detected on the diagram.
    const auto first = tomato_cluster(analysis.graph, analysis.density);
    detection = detect_n_clusters(first.diagram, analysis.density.min());
    params = TomatoParams::with_clusters(detection->k);
  }
  const auto result = run_cluster(analysis, params);
  if (params.n_clusters) warn_mismatch(result, *params.n_clusters);

  io::write_labels(dir / "labels.csv", result.clustering.labels);
  json summary = clustering_json(result);
  summary["diagram"] = io::diagram_json(result.diagram);
  if (detection) summary["detection"] = io::detection_json(*detection);
  io::write_json(dir / "clusters.json", summary);
  write_medians(dir / "medians.csv", in.events, result.clustering);
  std::cerr << result.clustering.count() << " clusters\n";
  return 0;
}

int cmd_sort(const json& eff) {
  const auto rate = get<double>(eff, "rate");
  const auto sites = get<std::vector<std::string>>(eff, "sites");
  const auto recording = get<std::string>(eff, "recording");
  detail::require(sites.empty() != recording.empty(), Errc::invalid_argument,
                  "give either --recording or --sites");
  Recording rec;
  if (!sites.empty()) {
    std::vector<fs::path> paths(sites.begin(), sites.end());
    rec = io::read_recording_sites(paths, rate);
  } else {
    rec = io::read_recording(recording, rate, get<bool>(eff, "skip_header"));
  }

  SortConfig cfg;
  cfg.clustering = cluster_config(eff);
  cfg.threshold = get<double>(eff, "threshold");
  cfg.window.pre = get<std::size_t>(eff, "pre");
  cfg.window.post = get<std::size_t>(eff, "post");
  cfg.n_clusters = get_optional<std::size_t>(eff, "n_clusters");
  detail::require(cfg.clustering.density.type != Estimator::external, Errc::invalid_argument,
                  "sort computes its own density; --density external is not available");

  const auto dir = prepare_out_dir(eff);
  echo(eff, dir);
  const auto run = run_sort(rec, cfg);
  if (cfg.n_clusters) warn_mismatch(run.clusters, *cfg.n_clusters);

  const auto& ev = run.events;
  io::write_events(dir / "events.bin", ev.events);
  {
    std::vector<double> times(ev.times.begin(), ev.times.end());
    io::write_column(dir / "event_samples.csv", times);
  }
  io::write_labels(dir / "labels.csv", run.clusters.clustering.labels);
  io::write_raster_csv(dir / "raster.csv", run.raster);
  json summary = {{"n_events", ev.times.size()},
                  {"noise_scale", run.normalized.scale},
                  {"clustering", clustering_json(run.clusters)}};
  if (run.diagram) {
    summary["diagram"] = io::diagram_json(run.diagram->first.diagram);
    summary["min_density"] = run.diagram->analysis.density.min();
    summary["detection"] = io::detection_json(run.diagram->detection);
    write_medians(dir / "medians.csv", ev.events, run.clusters.clustering);
  }
  io::write_json(dir / "sort.json", summary);
  std::cerr << ev.times.size() << " events, " << run.raster.rows.size() << " raster rows\n";
  return 0;
}

int cmd_evaluate(const json& eff) {
  const auto labels_path = get<std::string>(eff, "labels");
  const auto truth_path = get<std::string>(eff, "truth");
  detail::require(!labels_path.empty() && !truth_path.empty(), Errc::invalid_argument,
                  "--labels and --truth are required");
  const auto predicted = io::read_labels(labels_path);
  const auto truth = io::read_ground_truth(truth_path);
  const auto dir = prepare_out_dir(eff);
  echo(eff, dir);
  const auto m = confusion(truth, predicted);
  io::write_confusion_csv(dir / "confusion.csv", m);
  const json summary = io::evaluation_json(m);
  io::write_json(dir / "evaluation.json", summary);
  std::cerr << "diagonal weight " << summary["diagonal_weight"].get<double>() << ", "
            << summary["n_identified"].get<std::size_t>() << "/" << m.rows() << " neurons identified\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persistence-based clustering and spike sorting"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app;
    Settings settings;
    std::function<int(const json&)> run;
  };
  std::vector<std::unique_ptr<Sub>> subs;
  auto make = [&](const std::string& name, const std::string& help, std::function<int(const json&)> run) {
    auto* a = app.add_subcommand(name, help);
    subs.push_back(std::make_unique<Sub>(Sub{a, Settings(a), std::move(run)}));
    return subs.back().get();
  };

  std::string config_path;
  std::string out_dir = ".";

  // Values bound to the parser; one instance per subcommand where they differ.
  SimConfig sim;
  std::string format = "csv";
  std::uint64_t seed = 0;
  ClusterFlags cf_diagram, cf_cluster, cf_sort;
  std::string events, density_file, recording, labels, truth;
  std::vector<std::string> sites;
  bool skip_header = false;
  std::optional<std::size_t> n_clusters_cluster, n_clusters_sort;
  std::optional<double> tau;
  double threshold = 4.0;
  std::size_t pre = Window{}.pre, post = Window{}.post;
  double rate = 15000.0;

  auto* s_sim = make("simulate", "simulate multi-site spike events", cmd_simulate);
  auto* s_dgm = make("diagram", "first pass: persistence diagram and detected cluster count", cmd_diagram);
  auto* s_clu = make("cluster", "second pass: labels for a cluster count or threshold", cmd_cluster);
  auto* s_srt = make("sort", "recording to raster: normalize, detect, cluster", cmd_sort);
  auto* s_evl = make("evaluate", "confusion matrix of labels against ground truth", cmd_evaluate);

  {
    auto& s = s_sim->settings;
    s.add("n_neurons", sim.n_neurons, "number of neurons");
    s.add("events_per_neuron", sim.events_per_neuron, "events per neuron");
    s.add("amp_max", sim.amp_max, "per-site amplitudes are uniform in [0, amp_max]");
    s.add("superposition_freq", sim.superposition_freq, "fraction of superposed events");
    s.add("noise_sd", sim.noise_sd, "white noise standard deviation");
    s.add("n_sites", sim.n_sites, "recording sites");
    s.add("samples_per_site", sim.samples_per_site, "samples per site and event");
    s.add("max_shift", sim.max_shift, "largest superposition offset in samples");
    s.add("seed", seed, "random seed");
    s.add("format", format, "events file format: csv or bin");
  }
  for (auto [sub, cf] : {std::pair{s_dgm, &cf_diagram}, std::pair{s_clu, &cf_cluster}}) {
    auto& s = sub->settings;
    s.add("events", events, "events file (.csv or .bin)");
    s.add_flag("skip_header", skip_header, "the events CSV starts with a header row");
    s.add("density_file", density_file, "per-event log-density column for --density external");
    cf->attach(s);
  }
  s_clu->settings.add_optional("n_clusters", n_clusters_cluster, "number of clusters");
  s_clu->settings.add_optional("tau", tau, "prominence threshold");
  {
    auto& s = s_srt->settings;
    s.add("recording", recording, "recording file: .bin, or CSV with one column per site");
    s.add("sites", sites, "one headerless float64 file per site")->expected(1, -1);
    s.add("rate", rate, "sampling rate in Hz (ignored for .bin recordings)");
    s.add_flag("skip_header", skip_header, "the recording CSV starts with a header row");
    s.add("threshold", threshold, "detection threshold in noise standard deviations");
    s.add("pre", pre, "samples kept before each extremum");
    s.add("post", post, "samples kept from each extremum on");
    s.add_optional("n_clusters", n_clusters_sort, "override the detected cluster count");
    cf_sort.dim = 2.0;
    cf_sort.attach(s);
  }
  {
    auto& s = s_evl->settings;
    s.add("labels", labels, "predicted labels, one per line");
    s.add("truth", truth, "ground-truth CSV written by simulate");
  }
  for (auto& sub : subs) {
    sub->app->add_option("--config", config_path, "JSON file of settings; flags take precedence");
    sub->settings.add("out_dir", out_dir, "directory receiving the outputs");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error[" << code_name(Errc::invalid_argument) << "]: " << e.what() << '\n';
    return 2;
  }

  for (auto& sub : subs) {
    if (!sub->app->parsed()) continue;
    try {
      return sub->run(sub->settings.resolve(config_path));
    } catch (const Error& e) {
      std::cerr << "error[" << code_name(e.code()) << "]: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error[E_INTERNAL]: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}
