#include "semvid/metrics.hpp"

#include <array>
#include <cmath>

namespace semvid {

double mse(const Frame& a, const Frame& b) {
  if (!a.same_shape(b)) throw DimensionError("mse: dimension mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.data.size());
}

double psnr(const Frame& a, const Frame& b) {
  double m = mse(a, b);
  if (m <= 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / m));
}

namespace {

constexpr int kWin = 11;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr int kScales = 5;
constexpr std::array<double, kScales> kWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

const std::array<double, kWin>& gaussian_window() {
  static const std::array<double, kWin> w = [] {
    std::array<double, kWin> g{};
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
      double d = i - (kWin - 1) / 2.0;
      g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
      sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
  }();
  return w;
}

// Separable Gaussian filter, valid region only (output H-10 x W-10).
Frame gauss_filter_valid(const Frame& f) {
  const auto& w = gaussian_window();
  Frame horiz(f.height, f.width - kWin + 1, f.channels);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < horiz.width; ++x)
      for (int c = 0; c < f.channels; ++c) {
        double s = 0.0;
        for (int k = 0; k < kWin; ++k) s += w[k] * f.at(y, x + k, c);
        horiz.at(y, x, c) = s;
      }
  Frame out(f.height - kWin + 1, horiz.width, f.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < f.channels; ++c) {
        double s = 0.0;
        for (int k = 0; k < kWin; ++k) s += w[k] * horiz.at(y + k, x, c);
        out.at(y, x, c) = s;
      }
  return out;
}

Frame elementwise_product(const Frame& a, const Frame& b) {
  Frame out(a.height, a.width, a.channels);
  for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

// Mean luminance and contrast-structure terms over the valid SSIM map.
struct SsimMeans {
  double luminance;
  double cs;
};

SsimMeans ssim_means(const Frame& a, const Frame& b) {
  Frame mu_a = gauss_filter_valid(a);
  Frame mu_b = gauss_filter_valid(b);
  Frame aa = gauss_filter_valid(elementwise_product(a, a));
  Frame bb = gauss_filter_valid(elementwise_product(b, b));
  Frame ab = gauss_filter_valid(elementwise_product(a, b));
  double lum = 0.0, cs = 0.0;
  for (size_t i = 0; i < mu_a.data.size(); ++i) {
    double ma = mu_a.data[i], mb = mu_b.data[i];
    double va = aa.data[i] - ma * ma;
    double vb = bb.data[i] - mb * mb;
    double cov = ab.data[i] - ma * mb;
    lum += (2.0 * ma * mb + kC1) / (ma * ma + mb * mb + kC1);
    cs += (2.0 * cov + kC2) / (va + vb + kC2);
  }
  double n = static_cast<double>(mu_a.data.size());
  return {lum / n, cs / n};
}

// Crop to even dimensions so the dyadic downsampling is well defined.
Frame crop_even(const Frame& f) {
  int h = f.height & ~1;
  int w = f.width & ~1;
  if (h == f.height && w == f.width) return f;
  Frame out(h, w, f.channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < f.channels; ++c) out.at(y, x, c) = f.at(y, x, c);
  return out;
}

}  // namespace

double ms_ssim(const Frame& a, const Frame& b) {
  if (!a.same_shape(b)) throw DimensionError("ms_ssim: dimension mismatch");
  if (std::min(a.height, a.width) < 176)
    throw DimensionError("ms_ssim requires min(H, W) >= 176");
  Frame fa = a, fb = b;
  double result = 1.0;
  for (int scale = 0; scale < kScales; ++scale) {
    SsimMeans m = ssim_means(fa, fb);
    double term = (scale == kScales - 1) ? m.luminance * m.cs : m.cs;
    result *= std::pow(std::max(term, 0.0), kWeights[scale]);
    if (scale + 1 < kScales) {
      fa = downsample2x(crop_even(fa));
      fb = downsample2x(crop_even(fb));
    }
  }
  return result;
}

double cbr(const std::vector<uint64_t>& per_frame_bits, int height, int width, int channels) {
  if (per_frame_bits.empty()) return 0.0;
  double denom = static_cast<double>(height) * width * channels;
  double acc = 0.0;
  for (uint64_t k : per_frame_bits) acc += static_cast<double>(k) / denom;
  return acc / static_cast<double>(per_frame_bits.size());
}

}  // namespace semvid
