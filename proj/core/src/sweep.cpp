#include "mtd/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include "mtd/parallel.hpp"

namespace mtd {
namespace {

constexpr const char* kSweepHeader = "snr,prior,target_id,restart,final_loss,error_E,wall_ms";

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t{out[0]} << 32) | out[1];
}

}  // namespace

SimulatedMoments simulate_moments(const Image& x_high, const DownsampleOp& P, double sigma2,
                                  const SimulationConfig& sim) {
  if (sim.sub_measurements < 1) throw ConfigError("need at least one sub-measurement");
  const Image copy = P.is_identity() ? x_high : P.apply(x_high);
  SimulatedMoments out;
  out.sigma2 = sigma2;
  std::vector<std::unique_ptr<SyntheticSource>> sources;
  for (int k = 0; k < sim.sub_measurements; ++k) {
    PlacementPlan plan = plan_placements(sim.N, copy.side(), sim.gamma, derive_seed(sim.seed, 1, k, 0));
    out.plans.push_back(plan);
    sources.push_back(std::make_unique<SyntheticSource>(copy, std::move(plan),
                                                        NoiseModel{sigma2, derive_seed(sim.seed, 2, k, 0)}));
  }
  std::vector<const MeasurementSource*> views;
  for (const auto& s : sources) views.push_back(s.get());
  out.moments = autocorr_measurement(views, copy.side(), sim.engine);
  out.gamma = pooled_density(out.plans);
  return out;
}

std::vector<SweepRow> sweep_snr(std::span<const Image> targets, std::span<const double> snr_grid,
                                const SweepConfig& cfg, const ScoreProvider* prior) {
  if (targets.empty() || snr_grid.empty()) throw ConfigError("sweep needs at least one target and one SNR");
  if (cfg.restarts < 1) throw ConfigError("sweep needs at least one restart");
  const DownsampleOp& P = cfg.recovery.downsample;
  ZeroScore no_prior(P.high());

  const std::size_t cells = targets.size() * snr_grid.size();
  std::vector<std::vector<SweepRow>> out(cells);
  // Cells are independent: each derives its own seeds from (target, snr index).
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t t = cell / snr_grid.size();
    const std::size_t k = cell % snr_grid.size();
    const Image& target = targets[t];
    const double sigma2 = sigma_for_snr(P.is_identity() ? target : P.apply(target), snr_grid[k]);
    SimulationConfig sim = cfg.simulation;
    sim.seed = derive_seed(cfg.simulation.seed, 10, t, k);
    sim.engine.threads = 1;
    const SimulatedMoments m = simulate_moments(target, P, sigma2, sim);
    const MomentSystem sys = MomentSystem::build(m.moments, m.gamma, m.sigma2);

    for (int use_prior = 0; use_prior <= (prior ? 1 : 0); ++use_prior) {
      for (int r = 0; r < cfg.restarts; ++r) {
        RecoveryConfig rc = cfg.recovery;
        rc.seed = derive_seed(cfg.recovery.seed, 20 + t, k, static_cast<std::uint64_t>(r));
        rc.log_every = 0;
        const ScoreProvider& provider = use_prior ? *prior : static_cast<const ScoreProvider&>(no_prior);
        SweepRow row{snr_grid[k], use_prior == 1, static_cast<int>(t), r, 0.0, 0.0, 0.0};
        try {
          const RecoveryResult res = recover(sys, provider, rc);
          row.final_loss = res.final_loss;
          row.error = evaluate_error(res.estimate, target);
          row.wall_ms = res.wall_ms;
        } catch (const DivergenceError&) {
          row.final_loss = std::numeric_limits<double>::infinity();
          row.error = std::numeric_limits<double>::infinity();
        }
        out[cell].push_back(row);
      }
    }
  });

  std::vector<SweepRow> rows;
  for (auto& cell_rows : out) rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
  return rows;
}

std::vector<SweepRow> best_of_restarts(std::span<const SweepRow> rows) {
  std::map<std::tuple<double, bool, int>, SweepRow> best;
  for (const SweepRow& row : rows) {
    const auto key = std::make_tuple(row.snr, row.prior, row.target_id);
    auto it = best.find(key);
    if (it == best.end() || row.final_loss < it->second.final_loss) best[key] = row;
  }
  std::vector<SweepRow> out;
  for (const auto& [key, row] : best) out.push_back(row);
  return out;
}

std::vector<SweepSummary> summarize(std::span<const SweepRow> rows) {
  std::map<std::pair<bool, double>, SweepSummary> acc;
  for (const SweepRow& row : best_of_restarts(rows)) {
    SweepSummary& s = acc[{row.prior, row.snr}];
    s.snr = row.snr;
    s.prior = row.prior;
    s.mean_error += row.error;
    ++s.targets;
  }
  std::vector<SweepSummary> out;
  for (auto& [key, s] : acc) {
    s.mean_error /= s.targets;
    out.push_back(s);
  }
  return out;
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << kSweepHeader << '\n' << std::setprecision(17);
  for (const SweepRow& r : rows) {
    out << r.snr << ',' << (r.prior ? 1 : 0) << ',' << r.target_id << ',' << r.restart << ',' << r.final_loss << ','
        << r.error << ',' << r.wall_ms << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty sweep CSV: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepHeader) throw FormatError("sweep CSV header mismatch in " + path.string());
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 7) throw FormatError("sweep CSV row has " + std::to_string(fields.size()) + " fields: " + line);
    try {
      SweepRow r;
      r.snr = std::stod(fields[0]);
      const int p = std::stoi(fields[1]);
      if (p != 0 && p != 1) throw FormatError("prior flag must be 0 or 1: " + line);
      r.prior = p == 1;
      r.target_id = std::stoi(fields[2]);
      r.restart = std::stoi(fields[3]);
      r.final_loss = std::stod(fields[4]);
      r.error = std::stod(fields[5]);
      r.wall_ms = std::stod(fields[6]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw FormatError("unparsable sweep CSV row: " + line);
    }
  }
  if (rows.empty()) throw FormatError("sweep CSV has no data rows: " + path.string());
  return rows;
}

void write_plot_table(const std::filesystem::path& path, std::span<const SweepSummary> summary) {
  std::map<double, std::pair<double, double>> table;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SweepSummary& s : summary) {
    auto [it, inserted] = table.try_emplace(s.snr, nan, nan);
    (s.prior ? it->second.second : it->second.first) = s.mean_error;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "# snr mean_E_no_prior mean_E_prior\n" << std::setprecision(10);
  for (const auto& [snr_value, errs] : table) {
    out << snr_value << ' ' << errs.first << ' ' << errs.second << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace mtd
