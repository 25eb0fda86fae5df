// pottsseg command-line front end: segment images, cluster CSV data, generate
// synthetic benchmarks, score labelings and run parameter sweeps.
//
// Exit codes: 0 success, 1 usage error, 2 input/output error, 3 internal error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pottsseg/errors.hpp"
#include "pottsseg/eval.hpp"
#include "pottsseg/io.hpp"
#include "pottsseg/pipeline.hpp"
#include "pottsseg/version.hpp"

namespace fs = std::filesystem;
namespace ps = pottsseg;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kInternal = 3 };

// Command-line misuse detected after CLI11 parsing (bad grids, lists, gains).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  fs::path output_dir = ".";
  bool trace = false;
};

struct ModuleOptions {
  ps::PipelineConfig cfg;
  std::string pid_gains = "0.5,0.05,0.15";
  std::string gamma_grid;
};

std::vector<double> parse_number_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw UsageError(std::string("malformed ") + what + ": '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what);
  return out;
}

// Either a start:stop:step grid or a comma-separated list.
std::vector<double> parse_values(const std::string& text, const char* what) {
  if (text.find(':') == std::string::npos) return parse_number_list(text, what);
  try {
    return ps::parse_grid(text);
  } catch (const ps::ParseError& e) {
    throw UsageError(e.what());
  }
}

void add_module_options(CLI::App* cmd, ModuleOptions& m) {
  auto& d = m.cfg.downsample;
  auto& p = m.cfg.potts;
  cmd->add_option("--target-nodes", d.target, "Target number of graph nodes K")->capture_default_str();
  cmd->add_option("--alpha", d.alpha, "Accept once the node count reaches alpha*K")->capture_default_str();
  cmd->add_option("--pid-gains", m.pid_gains, "Controller gains p,i,d")->capture_default_str();
  cmd->add_option("--dedup-threshold", d.dedup_threshold, "Skip down-sampling at or below this many distinct rows")
      ->capture_default_str();
  cmd->add_option("--max-pid-iters", d.max_pid_iters, "Controller iteration limit")->capture_default_str();
  cmd->add_option("--mean-edge-cap", m.cfg.mean_edge_cap, "Rows sampled for the background mean edge")
      ->capture_default_str();
  cmd->add_option("--gamma", p.gamma, "Resolution parameter")->capture_default_str();
  cmd->add_option("--gamma-grid", m.gamma_grid, "Solve over start:stop:step and keep the lowest energy");
  cmd->add_option("--restarts", p.restarts, "Independent descent runs")->capture_default_str();
  cmd->add_option("--initial-segments", p.initial_segments, "Random initial segment count (0: nodes/10)")
      ->capture_default_str();
  cmd->add_option("--max-sweeps", p.max_sweeps, "Sweep limit per descent run")->capture_default_str();
}

void resolve_module_options(ModuleOptions& m, const GlobalOptions& g) {
  const auto gains = parse_number_list(m.pid_gains, "--pid-gains");
  if (gains.size() != 3) throw UsageError("--pid-gains needs exactly three values p,i,d");
  m.cfg.downsample.gains = {gains[0], gains[1], gains[2]};
  if (!m.gamma_grid.empty()) {
    try {
      m.cfg.gamma_grid = ps::parse_grid(m.gamma_grid);
    } catch (const ps::ParseError& e) {
      throw UsageError(e.what());
    }
  }
  if (!(m.cfg.potts.gamma > 0.0)) throw UsageError("--gamma must be positive");
  if (m.cfg.potts.restarts == 0) throw UsageError("--restarts must be at least 1");
  if (m.cfg.downsample.target == 0) throw UsageError("--target-nodes must be at least 1");
  if (!(m.cfg.downsample.alpha > 0.0 && m.cfg.downsample.alpha <= 1.0)) throw UsageError("--alpha must lie in (0, 1]");
  if (m.cfg.mean_edge_cap < 2) throw UsageError("--mean-edge-cap must be at least 2");
  m.cfg.potts.seed = g.seed;
  m.cfg.potts.threads = g.threads;
}

json config_json(const ps::PipelineConfig& c, const GlobalOptions& g) {
  const auto& d = c.downsample;
  const auto& p = c.potts;
  return json{{"seed", g.seed},
              {"threads", g.threads},
              {"target_nodes", d.target},
              {"alpha", d.alpha},
              {"pid_gains", {d.gains.kp, d.gains.ki, d.gains.kd}},
              {"dedup_threshold", d.dedup_threshold},
              {"max_pid_iters", d.max_pid_iters},
              {"kmeans_max_iter", d.kmeans_max_iter},
              {"mean_edge_cap", c.mean_edge_cap},
              {"gamma", p.gamma},
              {"gamma_grid", c.gamma_grid},
              {"restarts", p.restarts},
              {"initial_segments", p.initial_segments},
              {"max_sweeps", p.max_sweeps},
              {"move_tolerance", p.move_tolerance}};
}

json timings_json(const ps::StageTimings& t) {
  return json{{"dedup", t.dedup},       {"downsample", t.downsample}, {"mean_edge", t.mean_edge},
              {"graph", t.graph},       {"potts", t.potts},           {"upsample", t.upsample}};
}

std::string pid_trace_csv(const ps::DownsampleResult& r) {
  std::string out = "iteration,budget,achieved,error\n";
  char buf[64];
  for (const auto& row : r.trace) {
    out += std::to_string(row.iteration) + ',';
    for (std::size_t j = 0; j < row.budget.size(); ++j) {
      if (j) out += ';';
      out += std::to_string(row.budget[j]);
    }
    std::snprintf(buf, sizeof buf, ",%zu,%.10g\n", row.achieved, row.error);
    out += buf;
  }
  return out;
}

std::string gamma_table_csv(const ps::GammaSweepResult& s) {
  std::string out = "gamma,energy,segments,sweeps,converged,seconds\n";
  char buf[160];
  for (const auto& r : s.table) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%zu,%zu,%d,%.6f\n", r.gamma, r.energy, r.segments, r.sweeps,
                  r.converged ? 1 : 0, r.seconds);
    out += buf;
  }
  return out;
}

void write_json(const fs::path& path, const json& j) { ps::io::write_text(path, j.dump(2) + "\n"); }

fs::path prepare_output_dir(const GlobalOptions& g) {
  std::error_code ec;
  fs::create_directories(g.output_dir, ec);
  if (ec) throw ps::IoError("cannot create output directory " + g.output_dir.string() + ": " + ec.message());
  return g.output_dir;
}

// Shared tail of segment and cluster: solution file, traces, manifest.
struct RunArtifacts {
  json outputs = json::object();
  json warnings = json::array();
  json stats = json::object();
};

void record_common(const ps::PipelineResult& r, const fs::path& dir, const std::string& stem, const fs::path& labels,
                   const GlobalOptions& g, bool dump_graph, RunArtifacts& art) {
  const fs::path solution = dir / (stem + "_solution.json");
  write_json(solution, json{{"gamma", r.solution.gamma},
                            {"energy", r.solution.energy},
                            {"segments", r.solution.partition.segment_count},
                            {"sweeps", r.solution.sweeps_used},
                            {"labels_path", labels.string()}});
  art.outputs["solution"] = solution.string();
  if (g.trace) {
    const fs::path trace = dir / (stem + "_pid_trace.csv");
    ps::io::write_text(trace, pid_trace_csv(r.downsampled));
    art.outputs["pid_trace"] = trace.string();
  }
  if (dump_graph) {
    const fs::path graph = dir / (stem + "_graph.csv");
    ps::io::write_text(graph, r.graph.edge_list_csv());
    art.outputs["graph"] = graph.string();
  }
  if (r.sweep) {
    const fs::path table = dir / (stem + "_gamma_sweep.csv");
    ps::io::write_text(table, gamma_table_csv(*r.sweep));
    art.outputs["gamma_sweep"] = table.string();
  }
  if (!r.downsampled.converged) {
    art.warnings.push_back("down-sampling did not reach the target window within max_pid_iters; kept the closest result (" +
                           std::to_string(r.downsampled.achieved) + " nodes)");
  }
  if (!r.solution.converged) {
    art.warnings.push_back("Potts minimization stopped at max_sweeps before two quiet sweeps");
  }
  art.stats["rows"] = r.labels.size();
  art.stats["distinct_rows"] = r.distinct_rows;
  art.stats["nodes"] = r.graph.node_count();
  art.stats["edges"] = r.graph.edge_count();
  art.stats["pid_iterations"] = r.downsampled.iterations_used;
  art.stats["e_bar"] = r.e_bar;
  art.stats["segments"] = r.solution.partition.segment_count;
  art.stats["energy"] = r.solution.energy;
  art.stats["solution_seed"] = r.solution.seed;
}

void write_manifest(const fs::path& path, const std::string& command, const fs::path& input, const ModuleOptions& m,
                    const GlobalOptions& g, const ps::PipelineResult& r, RunArtifacts& art) {
  json manifest{{"version", std::string("pottsseg ") + ps::kVersion},
                {"command", command},
                {"config", config_json(m.cfg, g)},
                {"input", {{"path", input.string()}, {"digest", ps::io::file_digest(input)}}},
                {"outputs", art.outputs},
                {"stats", art.stats},
                {"timings", timings_json(r.timings)},
                {"warnings", art.warnings}};
  write_json(path, manifest);
}

int cmd_segment(const fs::path& input, ModuleOptions& m, const GlobalOptions& g, bool dump_graph,
                bool reconstruction) {
  resolve_module_options(m, g);
  const ps::RgbImage image = ps::io::read_image(input);
  const ps::FeatureMatrix data = ps::image_to_matrix(image);
  const ps::PipelineResult r = ps::run_pipeline(data, m.cfg);
  if (r.labels.size() != image.pixel_count()) throw ps::InvariantViolation("label count differs from pixel count");

  const fs::path dir = prepare_output_dir(g);
  const std::string stem = input.stem().string();
  RunArtifacts art;
  const fs::path label_png = dir / (stem + "_labels.png");
  const fs::path label_csv = dir / (stem + "_labels.csv");
  ps::io::write_label_png(label_png, r.labels, image.width, image.height);
  ps::io::write_label_csv(label_csv, r.labels);
  art.outputs["label_image"] = label_png.string();
  art.outputs["labels"] = label_csv.string();

  const ps::RgbImage rebuilt =
      ps::matrix_to_image(ps::reconstruct(r.downsampled.reduced, r.composed), image.width, image.height);
  art.stats["reconstruction_ssim"] = ps::ssim(image, rebuilt);
  if (reconstruction) {
    const fs::path rec = dir / (stem + "_reconstruction.png");
    ps::io::write_png(rec, rebuilt);
    art.outputs["reconstruction"] = rec.string();
  }
  record_common(r, dir, stem, label_csv, g, dump_graph, art);
  art.stats["width"] = image.width;
  art.stats["height"] = image.height;
  const fs::path manifest = dir / (stem + "_manifest.json");
  write_manifest(manifest, "segment", input, m, g, r, art);
  std::cout << "segments " << r.solution.partition.segment_count << "\nmanifest " << manifest.string() << "\n";
  for (const auto& w : art.warnings) std::cerr << "warning: " << w.get<std::string>() << "\n";
  return kOk;
}

int cmd_cluster(const fs::path& input, ModuleOptions& m, const GlobalOptions& g, const std::string& scale,
                const std::string& offset, bool dump_graph) {
  resolve_module_options(m, g);
  ps::io::Quantization q;
  if (!scale.empty()) q.scale = parse_number_list(scale, "--scale");
  if (!offset.empty()) q.offset = parse_number_list(offset, "--offset");
  const std::string text = ps::io::read_text(input);
  const std::size_t cols = ps::io::parse_feature_csv(text.substr(0, text.find('\n'))).cols();
  if ((!q.scale.empty() && q.scale.size() != cols) || (!q.offset.empty() && q.offset.size() != cols)) {
    throw UsageError("--scale/--offset need one value per CSV column (" + std::to_string(cols) + ")");
  }
  const ps::FeatureMatrix data = ps::io::parse_feature_csv(text, q);
  const ps::PipelineResult r = ps::run_pipeline(data, m.cfg);

  const fs::path dir = prepare_output_dir(g);
  const std::string stem = input.stem().string();
  RunArtifacts art;
  const fs::path label_csv = dir / (stem + "_labels.csv");
  ps::io::write_label_csv(label_csv, r.labels);
  art.outputs["labels"] = label_csv.string();
  record_common(r, dir, stem, label_csv, g, dump_graph, art);
  json cfg_extra{{"scale", q.scale}, {"offset", q.offset}};
  art.stats["quantization"] = cfg_extra;
  const fs::path manifest = dir / (stem + "_manifest.json");
  write_manifest(manifest, "cluster", input, m, g, r, art);
  std::cout << "segments " << r.solution.partition.segment_count << "\nmanifest " << manifest.string() << "\n";
  for (const auto& w : art.warnings) std::cerr << "warning: " << w.get<std::string>() << "\n";
  return kOk;
}

ps::SyntheticSpec spec_from_json(const json& j, std::uint64_t fallback_seed) {
  ps::SyntheticSpec spec;
  spec.seed = j.value("seed", fallback_seed);
  if (!j.contains("clusters") || !j["clusters"].is_array()) throw ps::ParseError("synthetic spec needs a 'clusters' array");
  for (const auto& c : j["clusters"]) {
    ps::GaussianCluster g;
    g.mean = c.at("mean").get<std::vector<double>>();
    if (c.contains("variance")) {
      g.variance = c.at("variance").get<std::vector<double>>();
    } else {
      const double sd = c.at("sigma").get<double>();
      g.variance.assign(g.mean.size(), sd * sd);
    }
    g.count = c.at("count").get<std::size_t>();
    spec.clusters.push_back(std::move(g));
  }
  return spec;
}

json spec_to_json(const ps::SyntheticSpec& spec) {
  json clusters = json::array();
  for (const auto& c : spec.clusters) clusters.push_back({{"mean", c.mean}, {"variance", c.variance}, {"count", c.count}});
  return json{{"seed", spec.seed}, {"clusters", clusters}};
}

ps::SyntheticSpec load_spec(const std::string& spec_path, const std::string& preset, double sigma, std::uint64_t seed,
                            bool seed_given) {
  if (!spec_path.empty()) {
    json j;
    try {
      j = json::parse(ps::io::read_text(spec_path));
      auto spec = spec_from_json(j, seed);
      if (seed_given) spec.seed = seed;
      return spec;
    } catch (const json::exception& e) {
      throw ps::ParseError("invalid synthetic spec " + spec_path + ": " + e.what());
    }
  }
  if (preset != "four-gaussian") throw UsageError("unknown preset '" + preset + "'");
  return ps::four_gaussian_spec(seed, sigma);
}

int cmd_synth(const std::string& spec_path, const std::string& preset, double sigma, const GlobalOptions& g,
              bool seed_given, const std::string& stem) {
  const ps::SyntheticSpec spec = load_spec(spec_path, preset, sigma, g.seed, seed_given);
  const ps::SyntheticData data = ps::generate_synthetic(spec);
  const fs::path dir = prepare_output_dir(g);
  const fs::path points = dir / (stem + "_points.csv");
  const fs::path truth = dir / (stem + "_truth.csv");
  ps::io::write_feature_csv(points, data.points);
  ps::io::write_label_csv(truth, data.truth);
  write_json(dir / (stem + "_spec.json"), spec_to_json(spec));
  std::cout << "rows " << data.points.rows() << "\npoints " << points.string() << "\ntruth " << truth.string() << "\n";
  return kOk;
}

int cmd_eval(const fs::path& a, const fs::path& b, bool as_json) {
  const ps::LabelVector c = ps::io::read_label_csv(a);
  const ps::LabelVector t = ps::io::read_label_csv(b);
  if (c.size() != t.size()) {
    throw ps::InvalidInput("label files differ in length: " + std::to_string(c.size()) + " vs " + std::to_string(t.size()));
  }
  const double n = ps::nmi(c, t);
  const double hc = ps::shannon_entropy(c);
  const double ht = ps::shannon_entropy(t);
  const double mi = ps::mutual_information(c, t);
  if (as_json) {
    std::cout << json{{"nmi", n}, {"entropy_a", hc}, {"entropy_b", ht}, {"mutual_information", mi}}.dump() << "\n";
  } else {
    std::printf("nmi %.6f\nentropy_a %.6f\nentropy_b %.6f\nmutual_information %.6f\n", n, hc, ht, mi);
  }
  return kOk;
}

int cmd_sweep(ModuleOptions& m, const GlobalOptions& g, const std::string& data_path, const std::string& truth_path,
              const std::string& gammas_text, const std::string& nodes_text, const std::string& seeds_text,
              bool no_timing, const std::string& out_name) {
  resolve_module_options(m, g);
  const auto gammas = parse_values(gammas_text, "--gammas");
  for (double v : gammas) {
    if (!(v > 0.0)) throw UsageError("sweep gammas must be positive");
  }
  std::vector<std::size_t> nodes;
  for (double v : parse_values(nodes_text, "--nodes")) {
    if (v < 1) throw UsageError("--nodes values must be at least 1");
    nodes.push_back(static_cast<std::size_t>(v + 0.5));
  }
  std::vector<std::uint64_t> seeds;
  for (double v : parse_values(seeds_text, "--seeds")) {
    if (v < 0) throw UsageError("--seeds values must be non-negative");
    seeds.push_back(static_cast<std::uint64_t>(v + 0.5));
  }

  ps::FeatureMatrix data;
  ps::LabelVector truth;
  if (data_path.empty()) {
    auto synth = ps::generate_synthetic(ps::four_gaussian_spec(g.seed));
    data = std::move(synth.points);
    truth = std::move(synth.truth);
  } else {
    if (truth_path.empty()) throw UsageError("--truth is required with --data");
    data = ps::io::read_feature_csv(data_path);
    truth = ps::io::read_label_csv(truth_path);
  }
  const auto cells = ps::run_sweep(data, truth, gammas, nodes, seeds, m.cfg);
  const fs::path dir = prepare_output_dir(g);
  const fs::path out = dir / out_name;
  ps::io::write_text(out, ps::sweep_report(cells, !no_timing));
  std::cout << "cells " << cells.size() << "\nreport " << out.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potts-model segmentation and clustering"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("pottsseg ") + ps::kVersion);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker thread cap")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", g.output_dir, "Directory for written artifacts")->capture_default_str();
  app.add_flag("--trace", g.trace, "Write the down-sampling controller trace");

  ModuleOptions seg_opts, clu_opts, sweep_opts;

  auto* segment = app.add_subcommand("segment", "Segment an RGB image (PNG or binary PPM)");
  std::string image_path;
  bool dump_graph_seg = false, reconstruction = false;
  segment->add_option("image", image_path, "Input image")->required();
  segment->add_flag("--dump-graph", dump_graph_seg, "Write the node graph as i,j,e_ij CSV");
  segment->add_flag("--reconstruction", reconstruction, "Write the colour-reduced reconstruction PNG");
  add_module_options(segment, seg_opts);

  auto* cluster = app.add_subcommand("cluster", "Cluster rows of a headerless numeric CSV");
  std::string csv_path, scale, offset;
  bool dump_graph_clu = false;
  cluster->add_option("csv", csv_path, "Input CSV")->required();
  cluster->add_option("--scale", scale, "Per-column multipliers applied before rounding, comma-separated");
  cluster->add_option("--offset", offset, "Per-column offsets added after scaling, comma-separated");
  cluster->add_flag("--dump-graph", dump_graph_clu, "Write the node graph as i,j,e_ij CSV");
  add_module_options(cluster, clu_opts);

  auto* synth = app.add_subcommand("synth", "Generate Gaussian cluster data with ground truth");
  std::string spec_path, preset = "four-gaussian", synth_stem = "synth";
  double sigma = 8.0;
  synth->add_option("--spec", spec_path, "JSON spec {seed?, clusters: [{mean, variance|sigma, count}]}");
  synth->add_option("--preset", preset, "Built-in spec when --spec is absent")->capture_default_str();
  synth->add_option("--sigma", sigma, "Per-axis standard deviation for the preset")->capture_default_str();
  synth->add_option("--name", synth_stem, "Output file prefix")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Compare two label CSVs");
  std::string eval_a, eval_b;
  bool eval_json = false;
  eval->add_option("labels", eval_a, "Candidate labels")->required();
  eval->add_option("truth", eval_b, "Reference labels")->required();
  eval->add_flag("--json", eval_json, "Print a JSON object instead of text");

  auto* sweep = app.add_subcommand("sweep", "NMI over a grid of gamma, node count and seed");
  std::string sweep_data, sweep_truth, sweep_gammas = "0.0025:0.5:0.0025", sweep_nodes = "350", sweep_seeds = "0",
                                                  sweep_out = "sweep.csv";
  bool no_timing = false;
  sweep->add_option("--data", sweep_data, "Feature CSV (default: built-in four-Gaussian data)");
  sweep->add_option("--truth", sweep_truth, "Ground-truth label CSV");
  sweep->add_option("--gammas", sweep_gammas, "start:stop:step or comma list")->capture_default_str();
  sweep->add_option("--nodes", sweep_nodes, "start:stop:step or comma list")->capture_default_str();
  sweep->add_option("--seeds", sweep_seeds, "start:stop:step or comma list")->capture_default_str();
  sweep->add_option("--out", sweep_out, "Report file name inside --output-dir")->capture_default_str();
  sweep->add_flag("--no-timing", no_timing, "Omit the wall_time column for byte-stable output");
  add_module_options(sweep, sweep_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*segment) return cmd_segment(image_path, seg_opts, g, dump_graph_seg, reconstruction);
    if (*cluster) return cmd_cluster(csv_path, clu_opts, g, scale, offset, dump_graph_clu);
    if (*synth) return cmd_synth(spec_path, preset, sigma, g, app.count("--seed") > 0, synth_stem);
    if (*eval) return cmd_eval(eval_a, eval_b, eval_json);
    if (*sweep) {
      return cmd_sweep(sweep_opts, g, sweep_data, sweep_truth, sweep_gammas, sweep_nodes, sweep_seeds, no_timing,
                       sweep_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ps::InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const ps::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const ps::InvalidInput& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kIo;
  } catch (const ps::OverflowError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
