#include "semvid/cve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include "semvid/entropy.hpp"

namespace semvid {

namespace {

// Orthonormal 1D DCT-II basis for N = 16.
struct DctBasis {
  double c[kBlockSize][kBlockSize];
  DctBasis() {
    const int n = kBlockSize;
    for (int k = 0; k < n; ++k) {
      double norm = (k == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (int i = 0; i < n; ++i)
        c[k][i] = norm * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
  }
};

const DctBasis& basis() {
  static const DctBasis b;
  return b;
}

// Zigzag scan order of the 16x16 coefficient grid; entry i gives (row, col).
const std::vector<std::pair<int, int>>& zigzag_order() {
  static const std::vector<std::pair<int, int>> order = [] {
    std::vector<std::pair<int, int>> o;
    const int n = kBlockSize;
    for (int s = 0; s <= 2 * (n - 1); ++s)
      for (int i = 0; i < n; ++i) {
        int j = s - i;
        if (j < 0 || j >= n) continue;
        if (s % 2 == 0)
          o.emplace_back(j, i);  // even diagonals walk up
        else
          o.emplace_back(i, j);
      }
    return o;
  }();
  return order;
}

void dct2d(const double in[kBlockSize][kBlockSize], double out[kBlockSize][kBlockSize]) {
  const DctBasis& b = basis();
  double tmp[kBlockSize][kBlockSize];
  for (int k = 0; k < kBlockSize; ++k)
    for (int x = 0; x < kBlockSize; ++x) {
      double s = 0.0;
      for (int y = 0; y < kBlockSize; ++y) s += b.c[k][y] * in[y][x];
      tmp[k][x] = s;
    }
  for (int k = 0; k < kBlockSize; ++k)
    for (int l = 0; l < kBlockSize; ++l) {
      double s = 0.0;
      for (int x = 0; x < kBlockSize; ++x) s += b.c[l][x] * tmp[k][x];
      out[k][l] = s;
    }
}

void idct2d(const double in[kBlockSize][kBlockSize], double out[kBlockSize][kBlockSize]) {
  const DctBasis& b = basis();
  double tmp[kBlockSize][kBlockSize];
  for (int k = 0; k < kBlockSize; ++k)
    for (int x = 0; x < kBlockSize; ++x) {
      double s = 0.0;
      for (int l = 0; l < kBlockSize; ++l) s += b.c[l][x] * in[k][l];
      tmp[k][x] = s;
    }
  for (int y = 0; y < kBlockSize; ++y)
    for (int x = 0; x < kBlockSize; ++x) {
      double s = 0.0;
      for (int k = 0; k < kBlockSize; ++k) s += b.c[k][y] * tmp[k][x];
      out[y][x] = s;
    }
}

void check_grid(const Frame& f) {
  if (f.height % kBlockSize != 0 || f.width % kBlockSize != 0)
    throw DimensionError("frame dimensions must be divisible by 16");
  if (f.channels != 3) throw DimensionError("latent transform requires 3 channels");
}

}  // namespace

CoderParams default_params(int lambda_id) {
  static const std::map<int, double> steps = {
      {256, 2.0 / 255.0}, {512, 1.4 / 255.0}, {1024, 1.0 / 255.0}, {2048, 0.7 / 255.0}};
  auto it = steps.find(lambda_id);
  if (it == steps.end()) throw DimensionError("lambda_id must be one of {256,512,1024,2048}");
  CoderParams p;
  p.q_step = it->second;
  p.lambda_id = lambda_id;
  return p;
}

void save_params(const CoderParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DimensionError("cannot write " + path);
  out.precision(17);
  out << "lambda_id = " << p.lambda_id << "\n"
      << "q_step = " << p.q_step << "\n"
      << "scale_a = " << p.scale_a << "\n"
      << "scale_c = " << p.scale_c << "\n";
}

CoderParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DimensionError("cannot open " + path);
  CoderParams p;
  std::string key, eq;
  double value;
  while (in >> key >> eq >> value) {
    if (key == "lambda_id") p.lambda_id = static_cast<int>(value);
    else if (key == "q_step") p.q_step = value;
    else if (key == "scale_a") p.scale_a = value;
    else if (key == "scale_c") p.scale_c = value;
  }
  p.validate();
  return p;
}

Context extract_context(const Frame& x_prev_hat, const FlowField& m_t) {
  Frame warped = warp_bilinear(x_prev_hat, m_t);
  Frame smoothed(warped.height, warped.width, warped.channels);
  for (int y = 0; y < warped.height; ++y)
    for (int x = 0; x < warped.width; ++x)
      for (int c = 0; c < warped.channels; ++c) {
        double s = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            s += warped.at_clamped(y + dy, x + dx, c);
        smoothed.at(y, x, c) = s / 9.0;
      }
  return Context{std::move(smoothed)};
}

Latent latent_forward(const Frame& x_t, const Context& z_t, const CoderParams& p) {
  p.validate();
  check_grid(x_t);
  if (!x_t.same_shape(z_t.frame)) throw DimensionError("latent_forward: dimension mismatch");
  int gh = x_t.height / kBlockSize;
  int gw = x_t.width / kBlockSize;
  Latent y(gh, gw);
  const auto& zz = zigzag_order();
  double block[kBlockSize][kBlockSize];
  double coeff[kBlockSize][kBlockSize];
  for (int gy = 0; gy < gh; ++gy)
    for (int gx = 0; gx < gw; ++gx)
      for (int c = 0; c < 3; ++c) {
        for (int by = 0; by < kBlockSize; ++by)
          for (int bx = 0; bx < kBlockSize; ++bx) {
            int yy = gy * kBlockSize + by, xx = gx * kBlockSize + bx;
            block[by][bx] = x_t.at(yy, xx, c) - z_t.frame.at(yy, xx, c);
          }
        dct2d(block, coeff);
        size_t base = (static_cast<size_t>(gy) * gw + gx) * kLatentChannels + c * kCoeffsPerChannel;
        for (int j = 0; j < kCoeffsPerChannel; ++j) {
          auto [r, col] = zz[j];
          y.data[base + j] = static_cast<int>(std::lround(coeff[r][col] / p.q_step));
        }
      }
  return y;
}

Frame latent_inverse(const Latent& y_hat, const Context& z_t, const CoderParams& p) {
  p.validate();
  check_grid(z_t.frame);
  int gh = z_t.frame.height / kBlockSize;
  int gw = z_t.frame.width / kBlockSize;
  if (y_hat.grid_h != gh || y_hat.grid_w != gw)
    throw DimensionError("latent_inverse: latent/context geometry mismatch");
  Frame out(z_t.frame.height, z_t.frame.width, 3);
  const auto& zz = zigzag_order();
  double coeff[kBlockSize][kBlockSize];
  double block[kBlockSize][kBlockSize];
  for (int gy = 0; gy < gh; ++gy)
    for (int gx = 0; gx < gw; ++gx)
      for (int c = 0; c < 3; ++c) {
        for (auto& row : coeff) std::fill(std::begin(row), std::end(row), 0.0);
        size_t base = (static_cast<size_t>(gy) * gw + gx) * kLatentChannels + c * kCoeffsPerChannel;
        for (int j = 0; j < kCoeffsPerChannel; ++j) {
          auto [r, col] = zz[j];
          coeff[r][col] = y_hat.data[base + j] * p.q_step;
        }
        idct2d(coeff, block);
        for (int by = 0; by < kBlockSize; ++by)
          for (int bx = 0; bx < kBlockSize; ++bx) {
            int yy = gy * kBlockSize + by, xx = gx * kBlockSize + bx;
            out.at(yy, xx, c) = std::clamp(block[by][bx] + z_t.frame.at(yy, xx, c), 0.0, 1.0);
          }
      }
  return out;
}

std::vector<double> dequantize_latent(const Latent& y, const CoderParams& p) {
  std::vector<double> v(y.data.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = y.data[i] * p.q_step;
  return v;
}

Latent requantize_latent(std::span<const double> values, int grid_h, int grid_w,
                         const CoderParams& p) {
  Latent y(grid_h, grid_w);
  if (values.size() != y.data.size())
    throw DimensionError("requantize_latent: size mismatch");
  for (size_t i = 0; i < values.size(); ++i)
    y.data[i] = static_cast<int>(std::lround(values[i] / p.q_step));
  return y;
}

double channel_scale_decay(int coeff_index) {
  return 1.0 / (1.0 + 0.25 * coeff_index);
}

ScaleField entropy_estimate(const Context& z_t, const CoderParams& p) {
  check_grid(z_t.frame);
  const Frame& z = z_t.frame;
  int gh = z.height / kBlockSize;
  int gw = z.width / kBlockSize;
  ScaleField w(gh, gw);
  for (int gy = 0; gy < gh; ++gy)
    for (int gx = 0; gx < gw; ++gx) {
      // Mean absolute forward-difference gradient over the block.
      double g = 0.0;
      for (int by = 0; by < kBlockSize; ++by)
        for (int bx = 0; bx < kBlockSize; ++bx) {
          int yy = gy * kBlockSize + by, xx = gx * kBlockSize + bx;
          for (int c = 0; c < z.channels; ++c) {
            double ddx = z.at_clamped(yy, xx + 1, c) - z.at(yy, xx, c);
            double ddy = z.at_clamped(yy + 1, xx, c) - z.at(yy, xx, c);
            g += 0.5 * (std::abs(ddx) + std::abs(ddy));
          }
        }
      g /= kBlockSize * kBlockSize * z.channels;
      double raw = p.scale_a * g + p.scale_c;
      size_t base = (static_cast<size_t>(gy) * gw + gx) * kLatentChannels;
      for (int c = 0; c < 3; ++c)
        for (int j = 0; j < kCoeffsPerChannel; ++j)
          w.bins[base + c * kCoeffsPerChannel + j] =
              static_cast<uint8_t>(quantize_scale(raw * channel_scale_decay(j)));
    }
  return w;
}

double estimate_code_length(const Latent& y, const ScaleField& w) {
  if (y.data.size() != w.bins.size())
    throw LogicError("estimate_code_length: element count mismatch");
  return estimate_code_length(std::span<const int>(y.data),
                              std::span<const uint8_t>(w.bins));
}

}  // namespace semvid
