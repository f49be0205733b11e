#include "mtd/moment_system.hpp"

#include <string>

#include "mtd/error.hpp"
#include "mtd/forward_model.hpp"

namespace mtd {
namespace {

void require_side(const Image& x, const MomentSystem& sys) {
  if (x.width() != sys.L || x.height() != sys.L) {
    throw ShapeError("estimate is " + std::to_string(x.width()) + "x" + std::to_string(x.height()) +
                     ", moment system expects " + std::to_string(sys.L) + "x" + std::to_string(sys.L));
  }
}

double sum_squares(const AutocorrSet& r) {
  double acc = r.a1 * r.a1;
  for (double v : r.a2) acc += v * v;
  for (double v : r.a3) acc += v * v;
  return acc;
}

}  // namespace

BiasTerms derive_bias(double sigma2, double measurement_mean, int L) {
  if (!(sigma2 >= 0.0)) throw ConfigError("noise variance must be >= 0");
  BiasTerms bias{AutocorrSet::zeros(L)};
  if (sigma2 == 0.0) return bias;
  bias.values.a2[0] = sigma2;
  const double unit = sigma2 * measurement_mean;
  const int shifts = L * L;
  for (int s = 0; s < shifts; ++s) {
    bias.values.third(0, s) += unit;
    bias.values.third(s, 0) += unit;
    bias.values.third(s, s) += unit;
  }
  return bias;
}

MomentSystem MomentSystem::build(AutocorrSet measured, double gamma, double sigma2) {
  if (!(gamma > 0.0 && gamma <= kMaxDensity)) {
    throw ConfigError("density gamma=" + std::to_string(gamma) + " outside (0, " + std::to_string(kMaxDensity) + "]");
  }
  if (!(sigma2 >= 0.0)) throw ConfigError("noise variance must be >= 0");
  if (!measured.all_finite()) throw NumericError("measured autocorrelations contain non-finite values");
  MomentSystem sys;
  sys.L = measured.L;
  sys.gamma = gamma;
  sys.sigma2 = sigma2;
  sys.bias = derive_bias(sigma2, measured.a1, measured.L);
  sys.measured = std::move(measured);
  return sys;
}

MomentResiduals residuals(const Image& x, const MomentSystem& sys) {
  require_side(x, sys);
  MomentResiduals r{sys.measured};
  r.values.add_scaled(autocorr_image(x, sys.L), -sys.gamma);
  r.values.add_scaled(sys.bias.values, -1.0);
  return r;
}

double loss(const Image& x, const MomentSystem& sys) { return sum_squares(residuals(x, sys).values); }

LossAndGradient loss_and_gradient(const Image& x, const MomentSystem& sys) {
  MomentResiduals r = residuals(x, sys);
  LossAndGradient out;
  out.loss = sum_squares(r.values);
  r.values.scale(-2.0 * sys.gamma);
  out.gradient = autocorr_gradient(x, r.values);
  return out;
}

Image loss_gradient(const Image& x, const MomentSystem& sys) { return loss_and_gradient(x, sys).gradient; }

}  // namespace mtd
