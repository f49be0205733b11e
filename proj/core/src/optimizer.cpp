#include "mtd/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

namespace mtd {

void RecoveryConfig::validate(int system_side) const {
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (iterations < 1) throw ConfigError("iteration count must be >= 1");
  if (!(score_factor >= 0.0)) throw ConfigError("score factor must be >= 0");
  if (log_every < 0) throw ConfigError("logging cadence must be >= 0");
  if (downsample.low() != system_side) {
    throw ConfigError("down-sampling output side " + std::to_string(downsample.low()) +
                      " does not match moment system side " + std::to_string(system_side));
  }
  if (mode == RecoveryMode::kStandard && !downsample.is_identity()) {
    throw ConfigError("standard mode requires the identity down-sampling operator");
  }
  if (init == InitPolicy::kWarmStart) {
    if (!warm_start) throw ConfigError("warm start requested without an image");
    if (warm_start->width() != downsample.high() || warm_start->height() != downsample.high()) {
      throw ShapeError("warm start must be " + std::to_string(downsample.high()) + " pixels square");
    }
  }
}

Image initial_iterate(const RecoveryConfig& cfg) {
  if (cfg.init == InitPolicy::kWarmStart) {
    if (!cfg.warm_start) throw ConfigError("warm start requested without an image");
    return *cfg.warm_start;
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image x = Image::square(cfg.downsample.high());
  for (double& v : x.values()) v = u(rng);
  return x;
}

StepDiagnostics nag_step(RecoveryState& state, const DataGradientFn& data, const ScoreProvider& prior,
                         const RecoveryConfig& cfg) {
  const DownsampleOp& P = cfg.downsample;
  const double mu = cfg.momentum;
  const Image lookahead = state.x + mu * state.v;

  LossAndGradient lg = data(P.is_identity() ? lookahead : P.apply(lookahead));
  const Image g = P.is_identity() ? std::move(lg.gradient) : P.adjoint(lg.gradient);
  const Image s = prior.score(lookahead);

  StepDiagnostics diag;
  diag.loss = lg.loss;
  diag.grad_norm = frobenius_norm(g);
  diag.score_norm = frobenius_norm(s);
  const double ratio = diag.score_norm > 0.0 ? diag.grad_norm / diag.score_norm : 0.0;

  const int side = P.high();
  Image next_x = state.x;
  Image next_v = state.v;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * side + c;
      const double weighted = P.sampled(r, c) ? s[i] * ratio : s[i] * cfg.score_factor;
      next_v[i] = mu * state.v[i] - cfg.learning_rate * (g[i] - weighted);
      next_x[i] = state.x[i] + next_v[i];
      if (cfg.project_unit_box) next_x[i] = std::clamp(next_x[i], 0.0, 1.0);
    }
  }
  if (!next_x.all_finite() || !next_v.all_finite()) {
    throw DivergenceError("iterate became non-finite at step " + std::to_string(state.t + 1), state);
  }
  state.x = std::move(next_x);
  state.v = std::move(next_v);
  ++state.t;
  return diag;
}

RecoveryResult recover(const MomentSystem& sys, const ScoreProvider& prior, const RecoveryConfig& cfg) {
  cfg.validate(sys.L);
  if (prior.side() != cfg.downsample.high()) {
    throw ShapeError("prior side " + std::to_string(prior.side()) + " does not match iterate side " +
                     std::to_string(cfg.downsample.high()));
  }
  const auto start = std::chrono::steady_clock::now();
  const DataGradientFn data = [&sys](const Image& low) { return loss_and_gradient(low, sys); };

  RecoveryState state;
  state.x = initial_iterate(cfg);
  state.v = Image::square(cfg.downsample.high());
  RecoveryResult result;
  for (int t = 0; t < cfg.iterations; ++t) {
    const StepDiagnostics d = nag_step(state, data, prior, cfg);
    if (cfg.log_every > 0 && (t % cfg.log_every == 0 || t + 1 == cfg.iterations)) {
      result.trace_steps.push_back(t);
      result.loss_trace.push_back(d.loss);
      result.grad_norm_trace.push_back(d.grad_norm);
      result.score_norm_trace.push_back(d.score_norm);
    }
  }
  result.final_loss = loss(cfg.downsample.is_identity() ? state.x : cfg.downsample.apply(state.x), sys);
  result.estimate = std::move(state.x);
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double evaluate_error(const Image& x_hat, const Image& x_star) {
  if (!x_hat.same_shape(x_star)) throw ShapeError("estimate and ground truth differ in shape");
  const double ref = frobenius_norm(x_star);
  if (ref == 0.0) throw UndefinedError("relative error against an all-zero ground truth");
  return frobenius_norm(x_star - x_hat) / ref;
}

double off_grid_error(const Image& x_hat, const Image& x_star, const DownsampleOp& P) {
  if (!x_hat.same_shape(x_star) || x_star.width() != P.high()) throw ShapeError("off-grid error shape mismatch");
  double num = 0.0;
  double den = 0.0;
  for (int r = 0; r < P.high(); ++r) {
    for (int c = 0; c < P.high(); ++c) {
      if (P.sampled(r, c)) continue;
      const double d = x_star.at(r, c) - x_hat.at(r, c);
      num += d * d;
      den += x_star.at(r, c) * x_star.at(r, c);
    }
  }
  if (den == 0.0) throw UndefinedError("off-grid ground truth is all zero");
  return std::sqrt(num / den);
}

}  // namespace mtd
