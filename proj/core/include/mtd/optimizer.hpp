#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mtd/error.hpp"
#include "mtd/forward_model.hpp"
#include "mtd/image.hpp"
#include "mtd/moment_system.hpp"
#include "mtd/score_prior.hpp"

namespace mtd {

enum class RecoveryMode { kStandard, kSuperres };

enum class InitPolicy {
  kUniform,    // i.i.d. U[0,1] pixels from `seed`
  kWarmStart,  // copy of RecoveryConfig::warm_start
};

struct RecoveryConfig {
  double momentum = 0.993;
  double learning_rate = 18000.0;
  int iterations = 10000;
  double score_factor = 0.0;  // weight on the raw score off the sampled set
  RecoveryMode mode = RecoveryMode::kStandard;
  /// Identity in standard mode; high -> low sub-sampling in superres mode.
  DownsampleOp downsample;
  InitPolicy init = InitPolicy::kUniform;
  std::optional<Image> warm_start;
  std::uint64_t seed = 0;
  int log_every = 1;              // 0 disables traces
  bool project_unit_box = false;  // clip iterates to [0,1] after each step

  /// Checks ranges and mode/operator consistency for a system of side L.
  void validate(int system_side) const;
};

struct RecoveryState {
  Image x;
  Image v;
  int t = 0;
};

struct StepDiagnostics {
  double loss = 0.0;        // moment loss at the look-ahead point
  double grad_norm = 0.0;   // ||g||_F
  double score_norm = 0.0;  // ||s||_F
};

struct RecoveryResult {
  Image estimate;
  std::vector<int> trace_steps;
  std::vector<double> loss_trace;
  std::vector<double> grad_norm_trace;
  std::vector<double> score_norm_trace;
  double final_loss = 0.0;  // loss of P x^(T)
  double wall_ms = 0.0;
};

/// Raised when an iterate becomes non-finite. Carries the last finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, RecoveryState last_finite)
      : Error(ErrorCode::kDivergence, what), last_finite_(std::move(last_finite)) {}
  const RecoveryState& last_finite() const noexcept { return last_finite_; }

 private:
  RecoveryState last_finite_;
};

/// Moment-loss value and gradient at a (low-resolution) point.
using DataGradientFn = std::function<LossAndGradient(const Image&)>;

/// One accelerated step. With z = x + mu v:
///   g = data(P z), s = prior(z)
///   w[i] = s[i] ||g|| / ||s||  on the sampled set, s[i] * alpha elsewhere
///   v <- mu v - eta (P^T g - w),  x <- x + v
/// ||s|| == 0 gives a zero weight instead of dividing.
StepDiagnostics nag_step(RecoveryState& state, const DataGradientFn& data, const ScoreProvider& prior,
                         const RecoveryConfig& cfg);

/// Runs cfg.iterations steps from the configured initialization.
RecoveryResult recover(const MomentSystem& sys, const ScoreProvider& prior, const RecoveryConfig& cfg);

/// Initial iterate for a run (side = P.high()).
Image initial_iterate(const RecoveryConfig& cfg);

/// ||x_star - x_hat||_F / ||x_star||_F.
double evaluate_error(const Image& x_hat, const Image& x_star);

/// Relative Frobenius error restricted to pixels outside the sampled set.
double off_grid_error(const Image& x_hat, const Image& x_star, const DownsampleOp& P);

}  // namespace mtd
