#include "fewrays/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fewrays {

double mse(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("mse: image sizes differ");
  if (a.empty()) throw std::invalid_argument("mse: empty images");
  const auto x = a.data();
  const auto y = b.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return sum / static_cast<double>(x.size());
}

double psnr_from_mse(double value) {
  if (value <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / value));
}

double psnr(const Image& a, const Image& b) { return psnr_from_mse(mse(a, b)); }

int ssim_window(int height, int width) {
  int w = std::min({11, height, width});
  if (w % 2 == 0) --w;
  return std::max(w, 1);
}

std::vector<double> ssim_gaussian(int window, double sigma) {
  std::vector<double> taps(window);
  const int r = window / 2;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double x = i - r;
    taps[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

// Five statistics planes: x, y, x^2, y^2, xy
struct Planes {
  int height = 0;
  int width = 0;
  std::vector<double> data[5];
};

Planes product_planes(const ScalarMap& x, const ScalarMap& y) {
  Planes p;
  p.height = x.height;
  p.width = x.width;
  for (auto& d : p.data) d.resize(x.values.size());
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double a = x.values[i];
    const double b = y.values[i];
    p.data[0][i] = a;
    p.data[1][i] = b;
    p.data[2][i] = a * a;
    p.data[3][i] = b * b;
    p.data[4][i] = a * b;
  }
  return p;
}

double ssim_at(const double m[5]) {
  const double mu_x = m[0];
  const double mu_y = m[1];
  const double var_x = m[2] - mu_x * mu_x;
  const double var_y = m[3] - mu_y * mu_y;
  const double cov = m[4] - mu_x * mu_y;
  return ((2.0 * mu_x * mu_y + kC1) * (2.0 * cov + kC2)) /
         ((mu_x * mu_x + mu_y * mu_y + kC1) * (var_x + var_y + kC2));
}

template <bool Parallel>
double ssim_impl(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("ssim: image sizes differ");
  if (a.empty()) throw std::invalid_argument("ssim: empty images");
  const Planes planes = product_planes(luma(a), luma(b));
  const int window = ssim_window(a.height(), a.width());
  const std::vector<double> taps = ssim_gaussian(window);
  const int out_h = a.height() - window + 1;
  const int out_w = a.width() - window + 1;
  const int width = a.width();

  // Horizontal pass: (height x out_w) per plane.
  std::vector<double> horiz[5];
  for (auto& h : horiz) h.assign(static_cast<std::size_t>(a.height()) * out_w, 0.0);
  const int height = a.height();
#pragma omp parallel for schedule(static) if (Parallel)
  for (int u = 0; u < height; ++u)
    for (int p = 0; p < 5; ++p)
      for (int v = 0; v < out_w; ++v) {
        double s = 0.0;
        for (int k = 0; k < window; ++k) s += taps[k] * planes.data[p][static_cast<std::size_t>(u) * width + v + k];
        horiz[p][static_cast<std::size_t>(u) * out_w + v] = s;
      }

  std::vector<double> row_sums(out_h, 0.0);
#pragma omp parallel for schedule(static) if (Parallel)
  for (int u = 0; u < out_h; ++u) {
    double acc = 0.0;
    for (int v = 0; v < out_w; ++v) {
      double m[5];
      for (int p = 0; p < 5; ++p) {
        double s = 0.0;
        for (int k = 0; k < window; ++k) s += taps[k] * horiz[p][static_cast<std::size_t>(u + k) * out_w + v];
        m[p] = s;
      }
      acc += ssim_at(m);
    }
    row_sums[u] = acc;
  }
  double total = 0.0;
  for (double s : row_sums) total += s;
  return total / (static_cast<double>(out_h) * out_w);
}

}  // namespace

double ssim(const Image& a, const Image& b) { return ssim_impl<true>(a, b); }
double ssim_serial(const Image& a, const Image& b) { return ssim_impl<false>(a, b); }

}  // namespace fewrays
