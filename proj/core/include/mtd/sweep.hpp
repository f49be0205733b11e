#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mtd/autocorr.hpp"
#include "mtd/optimizer.hpp"

namespace mtd {

/// Moments of a simulated measurement set, ready for a MomentSystem.
struct SimulatedMoments {
  AutocorrSet moments;
  double gamma = 0.0;   // realized pooled density
  double sigma2 = 0.0;
  std::vector<PlacementPlan> plans;
};

struct SimulationConfig {
  int N = 512;
  int sub_measurements = 4;
  double gamma = 0.1;
  std::uint64_t seed = 1;
  EngineOptions engine;
};

/// Plants P x_high (x_high itself when P is the identity) into
/// `sub_measurements` independent N x N frames at noise variance sigma2 and
/// pools their autocorrelations. Frames are streamed, never stored.
SimulatedMoments simulate_moments(const Image& x_high, const DownsampleOp& P, double sigma2,
                                  const SimulationConfig& sim);

struct SweepConfig {
  SimulationConfig simulation;
  RecoveryConfig recovery;  // seed is replaced per restart
  int restarts = 3;
};

struct SweepRow {
  double snr = 0.0;
  bool prior = false;
  int target_id = 0;
  int restart = 0;
  double final_loss = 0.0;
  double error = 0.0;
  double wall_ms = 0.0;
};

/// For every (target, snr): one simulated measurement set shared by all runs,
/// then `restarts` recoveries without prior and, when `prior` is non-null,
/// the same restarts (same initial iterates) with it. SNR is per target.
std::vector<SweepRow> sweep_snr(std::span<const Image> targets, std::span<const double> snr_grid,
                                const SweepConfig& cfg, const ScoreProvider* prior);

/// Row with the lowest final loss for each (snr, prior, target).
std::vector<SweepRow> best_of_restarts(std::span<const SweepRow> rows);

struct SweepSummary {
  double snr = 0.0;
  bool prior = false;
  double mean_error = 0.0;
  int targets = 0;
};

/// Mean best-of-restarts error per (snr, prior), ordered by prior then snr.
std::vector<SweepSummary> summarize(std::span<const SweepRow> rows);

/// CSV columns: snr,prior,target_id,restart,final_loss,error_E,wall_ms
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows);
/// Throws FormatError on a header or row that does not match the schema and
/// on a file without data rows.
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);

/// Whitespace-separated plot table: snr mean_E_no_prior mean_E_prior
/// ("nan" where a series has no value).
void write_plot_table(const std::filesystem::path& path, std::span<const SweepSummary> summary);

}  // namespace mtd
