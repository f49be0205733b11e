#include "cli/app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cli/plot.hpp"
#include "cli/prior_file.hpp"
#include "mtd/autocorr.hpp"
#include "mtd/error.hpp"
#include "mtd/forward_model.hpp"
#include "mtd/image_io.hpp"
#include "mtd/measurement_file.hpp"
#include "mtd/moment_system.hpp"
#include "mtd/optimizer.hpp"
#include "mtd/sweep.hpp"

namespace mtd::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void prepare_output_dir(const fs::path& dir, const CLI::App& sub) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.toml");
  if (!out) throw IoError("cannot write resolved config to " + dir.string());
  // Re-run with: mtd --config <dir>/config.toml <subcommand>
  out << "[" << sub.get_name() << "]\n" << sub.config_to_str(true, false);
}

fs::path relative_to(const fs::path& file, const fs::path& base) {
  return file.is_absolute() ? file : fs::absolute(base / file);
}

// ---------------------------------------------------------------- prepare

struct PrepareOptions {
  std::string idx;
  std::vector<int> ids;
  int side = 14;
  int crop_margin = 4;
  std::string normalization = "max1";
  std::string format = "png";
  std::string out;
};

void cmd_prepare(const PrepareOptions& o, const CLI::App& sub) {
  DatasetSpec spec;
  spec.source = o.idx;
  spec.side = o.side;
  spec.crop_margin = o.crop_margin;
  spec.normalization = parse_normalization(o.normalization);
  spec.validate();
  if (o.format != "png" && o.format != "pgm" && o.format != "csv") throw ConfigError("format must be png, pgm or csv");
  const std::vector<Image> images = parse_idx(read_file_bytes(spec.source));
  std::vector<int> ids = o.ids;
  if (ids.empty()) {
    for (int i = 0; i < std::min<int>(10, static_cast<int>(images.size())); ++i) ids.push_back(i);
  }
  prepare_output_dir(o.out, sub);
  json manifest = {{"source", fs::absolute(spec.source).string()},
                   {"side", spec.side},
                   {"crop_margin", spec.crop_margin},
                   {"normalization", to_string(spec.normalization)},
                   {"targets", json::array()}};
  for (int id : ids) {
    if (id < 0 || id >= static_cast<int>(images.size())) {
      throw ConfigError("image id " + std::to_string(id) + " outside [0, " + std::to_string(images.size()) + ")");
    }
    const std::string name = "target_" + std::to_string(id) + "." + o.format;
    save_image(prepare_image(images[static_cast<std::size_t>(id)], spec), fs::path(o.out) / name);
    manifest["targets"].push_back({{"id", id}, {"file", name}});
  }
  write_json(manifest, fs::path(o.out) / "targets.json");
  std::cout << "wrote " << ids.size() << " targets to " << o.out << "\n";
}

// --------------------------------------------------------------- make-gmm

struct MakeGmmOptions {
  int side = 8;
  int components = 3;
  double variance = 1e-3;
  std::uint64_t seed = 1;
  int samples = 0;
  std::uint64_t sample_seed = 2;
  std::string out;
};

void cmd_make_gmm(const MakeGmmOptions& o, const CLI::App& sub) {
  const GmmPrior gmm = make_blob_gmm(o.side, o.components, o.variance, o.seed);
  prepare_output_dir(o.out, sub);
  write_json(to_json(gmm), fs::path(o.out) / "gmm.json");
  std::mt19937_64 rng(o.sample_seed);
  for (int i = 0; i < o.samples; ++i) {
    save_image(gmm.sample(rng), fs::path(o.out) / ("target_" + std::to_string(i) + ".csv"));
  }
  std::cout << "wrote gmm.json and " << o.samples << " samples to " << o.out << "\n";
}

// --------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string target;
  int N = 512;
  int subs = 4;
  double gamma = 0.1;
  double snr = 0.0;
  double sigma2 = -1.0;
  std::uint64_t seed = 1;
  int low_side = 0;
  std::string out;
};

void cmd_simulate(const SimulateOptions& o, const CLI::App& sub) {
  const Image x = load_image(o.target);
  if (!x.is_square()) throw ShapeError("target image must be square");
  const bool superres = o.low_side > 0 && o.low_side != x.width();
  const DownsampleOp P = superres ? DownsampleOp(x.width(), o.low_side) : DownsampleOp::identity(x.width());
  const Image x_low = P.apply(x);
  if (o.subs < 1) throw ConfigError("need at least one sub-measurement");
  if ((o.snr > 0.0) == (o.sigma2 >= 0.0)) throw ConfigError("give exactly one of --snr and --sigma2");
  const double sigma2 = o.sigma2 >= 0.0 ? o.sigma2 : sigma_for_snr(x_low, o.snr);

  // Plan everything before touching the output directory so packing errors
  // leave no partial results.
  std::seed_seq seq{o.seed, std::uint64_t{0x5eed}};
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(2 * o.subs));
  {
    std::vector<std::uint32_t> words(seeds.size() * 2);
    seq.generate(words.begin(), words.end());
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = (std::uint64_t{words[2 * i]} << 32) | words[2 * i + 1];
  }
  std::vector<PlacementPlan> plans;
  for (int k = 0; k < o.subs; ++k) {
    plans.push_back(plan_placements(o.N, P.low(), o.gamma, seeds[static_cast<std::size_t>(2 * k)]));
  }

  prepare_output_dir(o.out, sub);
  const fs::path dir(o.out);
  json manifest = {{"N", o.N},
                   {"L", P.low()},
                   {"high_side", P.high()},
                   {"mode", superres ? "superres" : "standard"},
                   {"sigma2", sigma2},
                   {"snr", snr(x_low, sigma2)},
                   {"gamma_requested", o.gamma},
                   {"gamma", pooled_density(plans)},
                   {"seed", o.seed},
                   {"target", fs::absolute(o.target).string()},
                   {"measurements", json::array()}};
  for (int k = 0; k < o.subs; ++k) {
    const std::string stem = "sub_" + std::to_string(k);
    SyntheticSource source(x_low, plans[static_cast<std::size_t>(k)],
                           NoiseModel{sigma2, seeds[static_cast<std::size_t>(2 * k + 1)]});
    write_measurement(dir / (stem + ".mtdmeas"), source);
    write_plan_csv(dir / (stem + "_plan.csv"), plans[static_cast<std::size_t>(k)]);
    manifest["measurements"].push_back({{"file", stem + ".mtdmeas"},
                                        {"plan", stem + "_plan.csv"},
                                        {"copies", plans[static_cast<std::size_t>(k)].count()}});
    if (k == 0) {
      // Noisy view of the first planted copy (or the frame corner if empty).
      const PlacementPlan& plan = plans.front();
      const Position at = plan.origins.empty() ? Position{} : plan.origins.front();
      Image crop(P.low(), P.low());
      source.read_region(at.row, at.col, P.low(), P.low(), crop.values());
      save_image(crop, dir / "noisy.csv");
      save_image(crop, dir / "noisy.png");
    }
  }
  save_image(x, dir / "high.csv");
  save_image(x, dir / "high.png");
  save_image(x_low, dir / "low.csv");
  save_image(x_low, dir / "low.png");
  write_json(manifest, dir / "manifest.json");
  std::cout << "wrote " << o.subs << " measurements (sigma2=" << sigma2 << ", gamma=" << manifest["gamma"].get<double>()
            << ") to " << o.out << "\n";
}

// ---------------------------------------------------------------- moments

struct MomentsOptions {
  std::string manifest;
  std::vector<std::string> inputs;
  int L = 0;
  int tile = 1024;
  std::string out;
};

void cmd_moments(const MomentsOptions& o) {
  std::vector<fs::path> files;
  int L = o.L;
  if (!o.manifest.empty()) {
    const json m = read_json(o.manifest);
    const fs::path base = fs::path(o.manifest).parent_path();
    for (const json& entry : m.at("measurements")) files.push_back(relative_to(entry.at("file").get<std::string>(), base));
    if (L == 0) L = m.at("L").get<int>();
  }
  for (const std::string& f : o.inputs) files.push_back(f);
  if (files.empty()) throw ConfigError("no measurement files given (--manifest or --input)");
  if (L < 1) throw ConfigError("moment side L must be given (--L) or come from the manifest");
  std::vector<std::unique_ptr<FileSource>> sources;
  std::vector<const MeasurementSource*> ptrs;
  for (const fs::path& f : files) {
    sources.push_back(std::make_unique<FileSource>(f));
    ptrs.push_back(sources.back().get());
  }
  EngineOptions engine;
  engine.tile = o.tile;
  const AutocorrSet moments = autocorr_measurement(ptrs, L, engine);
  if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
  write_autocorr(o.out, moments);
  std::cout << "wrote L=" << L << " moments of " << files.size() << " measurement(s) to " << o.out << "\n";
}

// ---------------------------------------------------------------- recover

struct RecoveryOptions {
  std::string prior = "none";
  std::string prior_file;
  double momentum = RecoveryConfig{}.momentum;
  double learning_rate = RecoveryConfig{}.learning_rate;
  int iterations = RecoveryConfig{}.iterations;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string init = "uniform";
  std::string warm_start;
  bool project = false;
  int log_every = 1;
};

void add_recovery_options(CLI::App* sub, RecoveryOptions& r) {
  sub->add_option("--prior", r.prior, "none, gaussian, gmm or neural")->capture_default_str();
  sub->add_option("--prior-file", r.prior_file, "prior JSON (gaussian, gmm) or SCORENET1 file (neural)");
  sub->add_option("--momentum", r.momentum, "NAG momentum mu")->capture_default_str();
  sub->add_option("--learning-rate", r.learning_rate, "step size eta")->capture_default_str();
  sub->add_option("--iterations", r.iterations, "iteration count T")->capture_default_str();
  sub->add_option("--alpha", r.alpha, "score factor off the sampled set")->capture_default_str();
  sub->add_option("--seed", r.seed, "initialization seed")->capture_default_str();
  sub->add_option("--init", r.init, "uniform or warm")->capture_default_str();
  sub->add_option("--warm-start", r.warm_start, "initial image for --init warm");
  sub->add_flag("--project", r.project, "clip iterates to [0, 1]");
  sub->add_option("--log-every", r.log_every, "trace cadence (0 disables)")->capture_default_str();
}

RecoveryConfig make_recovery_config(const RecoveryOptions& r, const DownsampleOp& P) {
  RecoveryConfig cfg;
  cfg.momentum = r.momentum;
  cfg.learning_rate = r.learning_rate;
  cfg.iterations = r.iterations;
  cfg.score_factor = r.alpha;
  cfg.downsample = P;
  cfg.mode = P.is_identity() ? RecoveryMode::kStandard : RecoveryMode::kSuperres;
  cfg.seed = r.seed;
  cfg.project_unit_box = r.project;
  cfg.log_every = r.log_every;
  if (r.init == "warm") {
    if (r.warm_start.empty()) throw ConfigError("--init warm needs --warm-start");
    cfg.init = InitPolicy::kWarmStart;
    cfg.warm_start = load_image(r.warm_start);
  } else if (r.init != "uniform") {
    throw ConfigError("unknown init policy '" + r.init + "' (uniform, warm)");
  }
  return cfg;
}

struct RecoverOptions {
  std::string moments;
  std::string manifest;
  double gamma = 0.0;
  double sigma2 = -1.0;
  int high_side = 0;
  std::string truth;
  RecoveryOptions recovery;
  std::string out;
};

void write_trace(const RecoveryResult& r, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.precision(17);
  out << "step,loss,grad_norm,score_norm\n";
  for (std::size_t i = 0; i < r.trace_steps.size(); ++i) {
    out << r.trace_steps[i] << "," << r.loss_trace[i] << "," << r.grad_norm_trace[i] << "," << r.score_norm_trace[i]
        << "\n";
  }
}

int cmd_recover(const RecoverOptions& o, const CLI::App& sub) {
  const AutocorrSet moments = read_autocorr(o.moments);
  double gamma = o.gamma;
  double sigma2 = o.sigma2;
  int high = o.high_side;
  if (!o.manifest.empty()) {
    const json m = read_json(o.manifest);
    if (gamma <= 0.0) gamma = m.at("gamma").get<double>();
    if (sigma2 < 0.0) sigma2 = m.at("sigma2").get<double>();
    if (high == 0) high = m.at("high_side").get<int>();
    if (m.at("L").get<int>() != moments.L) throw ShapeError("moments file and manifest disagree on L");
  }
  if (gamma <= 0.0) throw ConfigError("density gamma must be given (--gamma or --manifest)");
  if (sigma2 < 0.0) throw ConfigError("noise variance must be given (--sigma2 or --manifest)");
  if (high == 0) high = moments.L;
  const DownsampleOp P = high == moments.L ? DownsampleOp::identity(high) : DownsampleOp(high, moments.L);
  const MomentSystem sys = MomentSystem::build(moments, gamma, sigma2);
  const RecoveryConfig cfg = make_recovery_config(o.recovery, P);
  cfg.validate(sys.L);
  const std::unique_ptr<ScoreProvider> prior =
      load_prior(parse_prior_kind(o.recovery.prior), o.recovery.prior_file, P.high());
  std::optional<Image> truth;
  if (!o.truth.empty()) truth = load_image(o.truth);

  prepare_output_dir(o.out, sub);
  const fs::path dir(o.out);
  json result = {{"prior", o.recovery.prior},
                 {"mode", P.is_identity() ? "standard" : "superres"},
                 {"L", sys.L},
                 {"high_side", P.high()},
                 {"gamma", gamma},
                 {"sigma2", sigma2},
                 {"iterations", cfg.iterations}};
  try {
    const RecoveryResult r = recover(sys, *prior, cfg);
    save_image(r.estimate, dir / "estimate.csv");
    save_image(r.estimate, dir / "estimate.png");
    write_trace(r, dir / "loss_trace.csv");
    result["status"] = "ok";
    result["final_loss"] = r.final_loss;
    result["wall_ms"] = r.wall_ms;
    if (truth) {
      result["E"] = evaluate_error(r.estimate, *truth);
      if (!P.is_identity()) result["off_grid_E"] = off_grid_error(r.estimate, *truth, P);
    }
    write_json(result, dir / "result.json");
    std::cout << "final loss " << r.final_loss;
    if (truth) std::cout << ", E = " << result["E"].get<double>();
    std::cout << "\n";
    return 0;
  } catch (const DivergenceError& e) {
    save_image(e.last_finite().x, dir / "last_finite.csv");
    result["status"] = "diverged";
    result["message"] = e.what();
    result["last_finite_step"] = e.last_finite().t;
    write_json(result, dir / "result.json");
    throw;
  }
}

// ------------------------------------------------------------------ sweep

struct SweepOptions {
  std::vector<std::string> targets;
  std::vector<double> snr = {0.1, 0.5, 1.0, 2.0, 10.0};
  int N = 512;
  int subs = 4;
  double gamma = 0.1;
  std::uint64_t seed = 1;
  int restarts = 3;
  RecoveryOptions recovery;
  std::string out;
};

void cmd_sweep(const SweepOptions& o, const CLI::App& sub) {
  if (o.targets.empty()) throw ConfigError("no targets given");
  std::vector<Image> targets;
  for (const std::string& t : o.targets) targets.push_back(load_image(t));
  const int side = targets.front().width();
  for (const Image& t : targets) {
    if (!t.is_square() || t.width() != side) throw ShapeError("all targets must share one square shape");
  }
  SweepConfig cfg;
  cfg.simulation.N = o.N;
  cfg.simulation.sub_measurements = o.subs;
  cfg.simulation.gamma = o.gamma;
  cfg.simulation.seed = o.seed;
  cfg.recovery = make_recovery_config(o.recovery, DownsampleOp::identity(side));
  cfg.recovery.log_every = 0;
  cfg.recovery.validate(side);
  cfg.restarts = o.restarts;
  const PriorKind kind = parse_prior_kind(o.recovery.prior);
  std::unique_ptr<ScoreProvider> prior;
  if (kind != PriorKind::kNone) prior = load_prior(kind, o.recovery.prior_file, side);

  prepare_output_dir(o.out, sub);
  const fs::path dir(o.out);
  const std::vector<SweepRow> rows = sweep_snr(targets, o.snr, cfg, prior.get());
  write_sweep_csv(dir / "sweep.csv", rows);
  const std::vector<SweepSummary> summary = summarize(rows);
  write_plot_table(dir / "sweep_plot.txt", summary);
  json doc = json::array();
  for (const SweepSummary& s : summary) {
    doc.push_back({{"snr", s.snr}, {"prior", s.prior}, {"mean_E", s.mean_error}, {"targets", s.targets}});
  }
  write_json(doc, dir / "summary.json");
  for (const SweepSummary& s : summary) {
    std::cout << "snr " << s.snr << (s.prior ? " prior    " : " no prior ") << "mean E " << s.mean_error << "\n";
  }
}

// ------------------------------------------------------------ plot, panel

struct PlotOptions {
  std::string csv;
  std::string out;
  std::string table;
};

void cmd_plot(const PlotOptions& o) {
  const std::vector<SweepRow> rows = read_sweep_csv(o.csv);
  const std::vector<SweepSummary> summary = summarize(rows);
  if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
  write_error_plot_svg(summary, o.out);
  if (!o.table.empty()) write_plot_table(o.table, summary);
  std::cout << "wrote " << o.out << "\n";
}

struct PanelOptions {
  std::vector<std::string> rows;
  int cell = 56;
  std::string out;
};

void cmd_panel(const PanelOptions& o) {
  std::vector<std::vector<Image>> rows;
  for (const std::string& row : o.rows) {
    std::vector<Image> images;
    std::size_t start = 0;
    while (start <= row.size()) {
      const std::size_t end = std::min(row.find(',', start), row.size());
      if (end > start) images.push_back(load_image(row.substr(start, end - start)));
      start = end + 1;
    }
    rows.push_back(std::move(images));
  }
  if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
  write_panel(rows, o.cell, o.out);
  std::cout << "wrote " << o.out << "\n";
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Multi-target detection image recovery from autocorrelations"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file with [subcommand] sections");
  app.option_defaults()->always_capture_default();

  PrepareOptions prepare;
  CLI::App* prepare_cmd = app.add_subcommand("prepare", "crop, resize and normalize IDX images into targets");
  prepare_cmd->add_option("--idx", prepare.idx, "IDX image file")->required();
  prepare_cmd->add_option("--ids", prepare.ids, "image indices (default: first 10)")->delimiter(',');
  prepare_cmd->add_option("--side", prepare.side, "target side length")->capture_default_str();
  prepare_cmd->add_option("--crop-margin", prepare.crop_margin, "pixels cropped per side")->capture_default_str();
  prepare_cmd->add_option("--normalization", prepare.normalization, "none, max1 or frobenius")->capture_default_str();
  prepare_cmd->add_option("--format", prepare.format, "png, pgm or csv")->capture_default_str();
  prepare_cmd->add_option("--out", prepare.out, "output directory")->required();

  MakeGmmOptions gmm;
  CLI::App* gmm_cmd = app.add_subcommand("make-gmm", "write a random blob mixture prior and samples from it");
  gmm_cmd->add_option("--side", gmm.side)->capture_default_str();
  gmm_cmd->add_option("--components", gmm.components)->capture_default_str();
  gmm_cmd->add_option("--variance", gmm.variance, "per-pixel component variance")->capture_default_str();
  gmm_cmd->add_option("--seed", gmm.seed)->capture_default_str();
  gmm_cmd->add_option("--samples", gmm.samples, "number of target samples to draw")->capture_default_str();
  gmm_cmd->add_option("--sample-seed", gmm.sample_seed)->capture_default_str();
  gmm_cmd->add_option("--out", gmm.out, "output directory")->required();

  SimulateOptions sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "synthesize noisy measurements of a target");
  sim_cmd->add_option("--target", sim.target, "target image (.png, .pgm or .csv)")->required();
  sim_cmd->add_option("--N", sim.N, "measurement side")->capture_default_str();
  sim_cmd->add_option("--subs", sim.subs, "number of sub-measurements")->capture_default_str();
  sim_cmd->add_option("--gamma", sim.gamma, "requested density")->capture_default_str();
  sim_cmd->add_option("--snr", sim.snr, "signal-to-noise ratio");
  sim_cmd->add_option("--sigma2", sim.sigma2, "noise variance (0 for noiseless)");
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--low-side", sim.low_side, "observe the target down-sampled to this side");
  sim_cmd->add_option("--out", sim.out, "output directory")->required();

  MomentsOptions mom;
  CLI::App* mom_cmd = app.add_subcommand("moments", "autocorrelations of measurement files");
  mom_cmd->add_option("--manifest", mom.manifest, "manifest.json written by simulate");
  mom_cmd->add_option("--input", mom.inputs, "MTDMEAS1 files");
  mom_cmd->add_option("--L", mom.L, "shift range (default: manifest L)");
  mom_cmd->add_option("--tile", mom.tile, "tile side in pixels")->capture_default_str();
  mom_cmd->add_option("--out", mom.out, "output MTDAC1 file")->required();

  RecoverOptions rec;
  CLI::App* rec_cmd = app.add_subcommand("recover", "run the accelerated moment-matching recovery");
  rec_cmd->add_option("--moments", rec.moments, "MTDAC1 file")->required();
  rec_cmd->add_option("--manifest", rec.manifest, "simulate manifest (density, noise, sides)");
  rec_cmd->add_option("--gamma", rec.gamma, "density");
  rec_cmd->add_option("--sigma2", rec.sigma2, "noise variance");
  rec_cmd->add_option("--high-side", rec.high_side, "iterate side (super-resolution when larger than L)");
  rec_cmd->add_option("--truth", rec.truth, "ground truth image for the error metric");
  add_recovery_options(rec_cmd, rec.recovery);
  rec_cmd->add_option("--out", rec.out, "output directory")->required();

  SweepOptions sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "error against SNR with and without a prior");
  sweep_cmd->add_option("--targets", sweep.targets, "target images")->required();
  sweep_cmd->add_option("--snr", sweep.snr, "SNR grid")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--N", sweep.N)->capture_default_str();
  sweep_cmd->add_option("--subs", sweep.subs)->capture_default_str();
  sweep_cmd->add_option("--gamma", sweep.gamma)->capture_default_str();
  sweep_cmd->add_option("--sim-seed", sweep.seed, "simulation seed")->capture_default_str();
  sweep_cmd->add_option("--restarts", sweep.restarts)->capture_default_str();
  add_recovery_options(sweep_cmd, sweep.recovery);
  sweep_cmd->add_option("--out", sweep.out, "output directory")->required();

  PlotOptions plot;
  CLI::App* plot_cmd = app.add_subcommand("plot", "error-vs-SNR figure from a sweep CSV");
  plot_cmd->add_option("--csv", plot.csv, "sweep.csv")->required();
  plot_cmd->add_option("--out", plot.out, "SVG output")->required();
  plot_cmd->add_option("--table", plot.table, "also write the plot table here");

  PanelOptions panel;
  CLI::App* panel_cmd = app.add_subcommand("panel", "image grid, one row per --row (comma-separated files)");
  panel_cmd->add_option("--row", panel.rows, "images of one row")->required();
  panel_cmd->add_option("--cell", panel.cell, "tile size in pixels")->capture_default_str();
  panel_cmd->add_option("--out", panel.out, "output image")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code_for(ErrorCode::kConfig);
  }

  try {
    if (*prepare_cmd) cmd_prepare(prepare, *prepare_cmd);
    if (*gmm_cmd) cmd_make_gmm(gmm, *gmm_cmd);
    if (*sim_cmd) cmd_simulate(sim, *sim_cmd);
    if (*mom_cmd) cmd_moments(mom);
    if (*rec_cmd) return cmd_recover(rec, *rec_cmd);
    if (*sweep_cmd) cmd_sweep(sweep, *sweep_cmd);
    if (*plot_cmd) cmd_plot(plot);
    if (*panel_cmd) cmd_panel(panel);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(ErrorCode::kIo);
  }
  return 0;
}

}  // namespace mtd::cli
