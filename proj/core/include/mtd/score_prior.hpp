#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mtd/image.hpp"
#include "mtd/scorenet.hpp"

namespace mtd {

/// Evaluable approximation of grad_x log p(x). Providers are immutable after
/// construction and evaluate deterministically.
class ScoreProvider {
 public:
  virtual ~ScoreProvider() = default;
  virtual int side() const = 0;
  virtual std::string kind() const = 0;
  /// Throws ShapeError unless x is side() x side().
  Image score(const Image& x) const;

 protected:
  virtual Image evaluate(const Image& x) const = 0;
};

/// The "no prior" provider.
class ZeroScore final : public ScoreProvider {
 public:
  explicit ZeroScore(int side) : side_(side) {}
  int side() const override { return side_; }
  std::string kind() const override { return "zero"; }

 protected:
  Image evaluate(const Image& x) const override { return Image(x.width(), x.height()); }

 private:
  int side_;
};

/// Independent Gaussian pixels: score = -(x - mean) / variance.
class GaussianPrior final : public ScoreProvider {
 public:
  GaussianPrior(Image mean, double variance);
  GaussianPrior(Image mean, Image variance);

  int side() const override { return mean_.width(); }
  std::string kind() const override { return "gaussian"; }
  const Image& mean() const noexcept { return mean_; }
  const Image& variance() const noexcept { return variance_; }

 protected:
  Image evaluate(const Image& x) const override;

 private:
  Image mean_;
  Image variance_;
};

/// Mixture of isotropic Gaussians with closed-form score
///   sum_k resp_k(x) * (-(x - mean_k) / variance_k),
/// responsibilities computed with log-sum-exp.
class GmmPrior final : public ScoreProvider {
 public:
  struct Component {
    double weight = 1.0;
    Image mean;
    double variance = 1.0;
  };

  explicit GmmPrior(std::vector<Component> components);

  int side() const override { return components_.front().mean.width(); }
  std::string kind() const override { return "gmm"; }
  const std::vector<Component>& components() const noexcept { return components_; }

  double log_density(const Image& x) const;
  std::vector<double> responsibilities(const Image& x) const;
  /// One draw: pick a component by weight, then add isotropic noise.
  Image sample(std::mt19937_64& rng) const;

 protected:
  Image evaluate(const Image& x) const override;

 private:
  std::vector<double> log_joint(const Image& x) const;
  std::vector<Component> components_;
};

class NeuralScore final : public ScoreProvider {
 public:
  explicit NeuralScore(NeuralScoreNet net);
  int side() const override { return net_.L; }
  std::string kind() const override { return "neural"; }
  const NeuralScoreNet& net() const noexcept { return net_; }

 protected:
  Image evaluate(const Image& x) const override { return net_.forward(x); }

 private:
  NeuralScoreNet net_;
};

/// Score of the Gaussian prior after smoothing with N(0, sigma_dsm^2):
/// variances add, so the score is -(x - mean) / (variance + sigma_dsm^2).
/// Oracle for what denoising score matching at level sigma_dsm should learn.
Image gaussian_dsm_consistency(const GaussianPrior& prior, double sigma_dsm, const Image& x);

}  // namespace mtd
