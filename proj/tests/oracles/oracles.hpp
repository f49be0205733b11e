#pragma once

// Independent reference implementations used only by tests. Nothing here
// shares code with the library paths they check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "mtd/autocorr.hpp"
#include "mtd/image.hpp"
#include "mtd/score_prior.hpp"

namespace mtd::oracle {

inline double pixel(const Image& z, int r, int c) {
  if (r < 0 || c < 0 || r >= z.height() || c >= z.width()) return 0.0;
  return z.at(r, c);
}

/// Literal quadruple/sextuple loops over the definition with zero padding.
inline AutocorrSet brute_autocorr(const Image& z, int L) {
  AutocorrSet out = AutocorrSet::zeros(L);
  const double area = static_cast<double>(z.width()) * z.height();
  for (int r = 0; r < z.height(); ++r) {
    for (int c = 0; c < z.width(); ++c) out.a1 += z.at(r, c);
  }
  out.a1 /= area;
  for (int d1r = 0; d1r < L; ++d1r) {
    for (int d1c = 0; d1c < L; ++d1c) {
      double s2 = 0.0;
      for (int r = 0; r < z.height(); ++r) {
        for (int c = 0; c < z.width(); ++c) s2 += z.at(r, c) * pixel(z, r + d1r, c + d1c);
      }
      out.a2[d1r * L + d1c] = s2 / area;
      for (int d2r = 0; d2r < L; ++d2r) {
        for (int d2c = 0; d2c < L; ++d2c) {
          double s3 = 0.0;
          for (int r = 0; r < z.height(); ++r) {
            for (int c = 0; c < z.width(); ++c) {
              s3 += z.at(r, c) * pixel(z, r + d1r, c + d1c) * pixel(z, r + d2r, c + d2c);
            }
          }
          out.third(d1r * L + d1c, d2r * L + d2c) = s3 / area;
        }
      }
    }
  }
  out.norm_area = area;
  return out;
}

/// Eq.-by-eq. loss: sum over q and shifts of (a_y - gamma a_x - b)^2 with
/// a_x from brute_autocorr.
inline double naive_loss(const Image& x, const AutocorrSet& measured, double gamma, const AutocorrSet& bias) {
  const AutocorrSet ax = brute_autocorr(x, measured.L);
  double acc = 0.0;
  double r = measured.a1 - gamma * ax.a1 - bias.a1;
  acc += r * r;
  for (std::size_t i = 0; i < ax.a2.size(); ++i) {
    r = measured.a2[i] - gamma * ax.a2[i] - bias.a2[i];
    acc += r * r;
  }
  for (std::size_t i = 0; i < ax.a3.size(); ++i) {
    r = measured.a3[i] - gamma * ax.a3[i] - bias.a3[i];
    acc += r * r;
  }
  return acc;
}

/// Central differences of f at x with step h.
inline Image central_difference(const std::function<double(const Image&)>& f, const Image& x, double h) {
  Image g(x.width(), x.height());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Image plus = x;
    Image minus = x;
    plus[i] += h;
    minus[i] -= h;
    g[i] = (f(plus) - f(minus)) / (2.0 * h);
  }
  return g;
}

inline double max_abs_diff(const AutocorrSet& a, const AutocorrSet& b) {
  double worst = std::abs(a.a1 - b.a1);
  for (std::size_t i = 0; i < a.a2.size(); ++i) worst = std::max(worst, std::abs(a.a2[i] - b.a2[i]));
  for (std::size_t i = 0; i < a.a3.size(); ++i) worst = std::max(worst, std::abs(a.a3[i] - b.a3[i]));
  return worst;
}

/// ||a - b|| / max(||a||, ||b||, tiny) over images.
inline double relative_difference(const Image& a, const Image& b) {
  double num = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(num) / std::max({std::sqrt(na), std::sqrt(nb), 1e-300});
}

inline Image random_image(int width, int height, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Image img(width, height);
  for (double& v : img.values()) v = u(rng);
  return img;
}

/// Bilinear sample on the continuous pixel grid where pixel (r, c) covers
/// [r, r+1) x [c, c+1) and its value sits at the centre (r+0.5, c+0.5).
/// Coordinates beyond the outermost centres take the edge value.
inline double bilinear_at(const Image& img, double y, double x) {
  auto axis = [](double t, int n, int& i0, int& i1, double& frac) {
    double centre = t - 0.5;
    if (centre <= 0.0) {
      i0 = i1 = 0;
      frac = 0.0;
    } else if (centre >= n - 1) {
      i0 = i1 = n - 1;
      frac = 0.0;
    } else {
      i0 = static_cast<int>(centre);
      i1 = i0 + 1;
      frac = centre - i0;
    }
  };
  int r0, r1, c0, c1;
  double fy, fx;
  axis(y, img.height(), r0, r1, fy);
  axis(x, img.width(), c0, c1, fx);
  return (1 - fy) * ((1 - fx) * img.at(r0, c0) + fx * img.at(r0, c1)) +
         fy * ((1 - fx) * img.at(r1, c0) + fx * img.at(r1, c1));
}

/// Output pixel (r, c) of an h x w resize samples the source at the
/// matching centre position on the continuous grid.
inline Image bilinear_resize(const Image& img, int w, int h) {
  Image out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double y = (r + 0.5) * img.height() / h;
      const double x = (c + 0.5) * img.width() / w;
      out.at(r, c) = bilinear_at(img, y, x);
    }
  }
  return out;
}

struct RunningStats {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
  double standard_error() const { return std::sqrt(variance() / n); }
};

/// Returns a fixed field regardless of the input.
class StubScore final : public ScoreProvider {
 public:
  explicit StubScore(Image s) : s_(std::move(s)) {}
  int side() const override { return s_.width(); }
  std::string kind() const override { return "stub"; }

 protected:
  Image evaluate(const Image&) const override { return s_; }

 private:
  Image s_;
};

/// The update written out pixel by pixel.
inline void hand_expanded_step(const Image& x, const Image& v, const Image& g_low, const Image& s, int stride, double mu,
                               double eta, double alpha, Image& x_out, Image& v_out) {
  const int n = x.width();
  double gn = 0.0, sn = 0.0;
  for (double q : g_low.values()) gn += q * q;
  for (double q : s.values()) sn += q * q;
  gn = std::sqrt(gn);
  sn = std::sqrt(sn);
  x_out = x;
  v_out = v;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const bool on = r % stride == 0 && c % stride == 0;
      const double gt = on ? g_low.at(r / stride, c / stride) : 0.0;
      double sd;
      if (on) {
        sd = sn > 0.0 ? s.at(r, c) * gn / sn : 0.0;
      } else {
        sd = s.at(r, c) * alpha;
      }
      v_out.at(r, c) = mu * v.at(r, c) - eta * (gt - sd);
      x_out.at(r, c) = x.at(r, c) + v_out.at(r, c);
    }
  }
}

}  // namespace mtd::oracle
