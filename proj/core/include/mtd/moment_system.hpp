#pragma once

#include "mtd/autocorr.hpp"
#include "mtd/image.hpp"

namespace mtd {

/// Expected noise contribution to each empirical autocorrelation, in the
/// N -> infinity limit, for i.i.d. N(0, sigma2) noise:
///   b1 = 0
///   b2[l] = sigma2 * [l == 0]
///   b3[l1, l2] = sigma2 * mean(y) * ([l1 == 0] + [l2 == 0] + [l1 == l2])
/// The cubic noise term has zero mean, and only pairs of coincident noise
/// samples survive the expectation.
struct BiasTerms {
  AutocorrSet values;
};

/// r_q = a_y^q - gamma a_x^q - b_q, shaped like an AutocorrSet.
struct MomentResiduals {
  AutocorrSet values;
};

BiasTerms derive_bias(double sigma2, double measurement_mean, int L);

/// Moment equations for one measurement (or pooled measurement set).
struct MomentSystem {
  int L = 0;
  double gamma = 0.0;
  double sigma2 = 0.0;
  AutocorrSet measured;
  BiasTerms bias;

  /// Builds the system and its bias terms. Throws ConfigError unless
  /// 0 < gamma <= kMaxDensity and sigma2 >= 0.
  static MomentSystem build(AutocorrSet measured, double gamma, double sigma2);
};

MomentResiduals residuals(const Image& x, const MomentSystem& sys);

/// Plain sum of squared residuals over q = 1..3 and all shifts.
double loss(const Image& x, const MomentSystem& sys);

Image loss_gradient(const Image& x, const MomentSystem& sys);

struct LossAndGradient {
  double loss = 0.0;
  Image gradient;
};

/// Shares one residual evaluation between the loss and its gradient.
LossAndGradient loss_and_gradient(const Image& x, const MomentSystem& sys);

}  // namespace mtd
