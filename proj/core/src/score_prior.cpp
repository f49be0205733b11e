#include "mtd/score_prior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mtd/error.hpp"

namespace mtd {

Image ScoreProvider::score(const Image& x) const {
  if (x.width() != side() || x.height() != side()) {
    throw ShapeError(kind() + " prior expects " + std::to_string(side()) + "x" + std::to_string(side()) +
                     " input, got " + std::to_string(x.width()) + "x" + std::to_string(x.height()));
  }
  return evaluate(x);
}

GaussianPrior::GaussianPrior(Image mean, double variance)
    : GaussianPrior(mean, Image(mean.width(), mean.height(), variance)) {}

GaussianPrior::GaussianPrior(Image mean, Image variance) : mean_(std::move(mean)), variance_(std::move(variance)) {
  if (!mean_.is_square() || mean_.empty()) throw ShapeError("Gaussian prior mean must be square");
  if (!variance_.same_shape(mean_)) throw ShapeError("Gaussian prior variance shape mismatch");
  for (double v : variance_.values()) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("Gaussian prior variance must be positive");
  }
  mean_.validate();
}

Image GaussianPrior::evaluate(const Image& x) const {
  Image s(x.width(), x.height());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = -(x[i] - mean_[i]) / variance_[i];
  return s;
}

GmmPrior::GmmPrior(std::vector<Component> components) : components_(std::move(components)) {
  if (components_.empty()) throw ConfigError("mixture prior needs at least one component");
  double total = 0.0;
  for (const Component& c : components_) {
    if (!c.mean.is_square() || !c.mean.same_shape(components_.front().mean) || c.mean.empty()) {
      throw ShapeError("mixture component means must share one square shape");
    }
    if (!(c.weight > 0.0)) throw ConfigError("mixture weights must be positive");
    if (!(c.variance > 0.0)) throw ConfigError("mixture variances must be positive");
    c.mean.validate();
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("mixture weights must sum to 1");
}

std::vector<double> GmmPrior::log_joint(const Image& x) const {
  const double dim = static_cast<double>(x.size());
  std::vector<double> logp(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const Component& c = components_[k];
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - c.mean[i];
      d2 += d * d;
    }
    logp[k] = std::log(c.weight) - 0.5 * dim * std::log(2.0 * std::numbers::pi * c.variance) - 0.5 * d2 / c.variance;
  }
  return logp;
}

double GmmPrior::log_density(const Image& x) const {
  if (x.width() != side() || x.height() != side()) throw ShapeError("mixture density input shape mismatch");
  const std::vector<double> logp = log_joint(x);
  const double top = *std::max_element(logp.begin(), logp.end());
  double acc = 0.0;
  for (double v : logp) acc += std::exp(v - top);
  return top + std::log(acc);
}

std::vector<double> GmmPrior::responsibilities(const Image& x) const {
  std::vector<double> resp = log_joint(x);
  const double top = *std::max_element(resp.begin(), resp.end());
  double acc = 0.0;
  for (double& v : resp) {
    v = std::exp(v - top);
    acc += v;
  }
  for (double& v : resp) v /= acc;
  return resp;
}

Image GmmPrior::sample(std::mt19937_64& rng) const {
  std::vector<double> weights;
  for (const Component& c : components_) weights.push_back(c.weight);
  const Component& c = components_[std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng)];
  std::normal_distribution<double> noise(0.0, std::sqrt(c.variance));
  Image x = c.mean;
  for (double& v : x.values()) v += noise(rng);
  return x;
}

Image GmmPrior::evaluate(const Image& x) const {
  const std::vector<double> resp = responsibilities(x);
  Image s(x.width(), x.height());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const Component& c = components_[k];
    const double w = resp[k] / c.variance;
    for (std::size_t i = 0; i < x.size(); ++i) s[i] -= w * (x[i] - c.mean[i]);
  }
  return s;
}

NeuralScore::NeuralScore(NeuralScoreNet net) : net_(std::move(net)) { net_.validate(); }

Image gaussian_dsm_consistency(const GaussianPrior& prior, double sigma_dsm, const Image& x) {
  if (!(sigma_dsm >= 0.0)) throw ConfigError("smoothing level must be >= 0");
  if (!x.same_shape(prior.mean())) throw ShapeError("smoothed Gaussian score input shape mismatch");
  const double extra = sigma_dsm * sigma_dsm;
  Image s(x.width(), x.height());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = -(x[i] - prior.mean()[i]) / (prior.variance()[i] + extra);
  return s;
}

}  // namespace mtd
