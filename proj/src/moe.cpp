#include "semvid/moe.hpp"

#include <algorithm>
#include <cmath>

namespace semvid {

bool AlphaMask::is_binary() const {
  return std::all_of(data.begin(), data.end(),
                     [](double v) { return v == 0.0 || v == 1.0; });
}

void SegmenterConfig::validate() const {
  if (threshold <= 0.0 || threshold >= 1.0)
    throw ConfigError("segmenter threshold must be in (0,1)");
  if (morph_radius < 0) throw ConfigError("morph_radius must be >= 0");
  if (method == SegmenterMethod::kBackgroundDiff && !reference_background)
    throw ConfigError("background_diff requires a reference background");
  if (method == SegmenterMethod::kOracle && !oracle_mask)
    throw ConfigError("oracle segmenter requires a ground-truth mask");
}

namespace {

AlphaMask erode(const AlphaMask& m, int radius) {
  AlphaMask out(m.height, m.width);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      double v = 1.0;
      for (int dy = -radius; dy <= radius && v > 0.0; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          int yy = std::clamp(y + dy, 0, m.height - 1);
          int xx = std::clamp(x + dx, 0, m.width - 1);
          if (m.at(yy, xx) == 0.0) { v = 0.0; break; }
        }
      out.at(y, x) = v;
    }
  return out;
}

AlphaMask dilate(const AlphaMask& m, int radius) {
  AlphaMask out(m.height, m.width);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      double v = 0.0;
      for (int dy = -radius; dy <= radius && v < 1.0; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          int yy = std::clamp(y + dy, 0, m.height - 1);
          int xx = std::clamp(x + dx, 0, m.width - 1);
          if (m.at(yy, xx) == 1.0) { v = 1.0; break; }
        }
      out.at(y, x) = v;
    }
  return out;
}

AlphaMask morph_open_close(const AlphaMask& m, int radius) {
  if (radius <= 0) return m;
  AlphaMask opened = dilate(erode(m, radius), radius);
  return erode(dilate(opened, radius), radius);
}

}  // namespace

AlphaMask estimate_alpha(const Frame& v, const SegmenterConfig& cfg) {
  cfg.validate();
  switch (cfg.method) {
    case SegmenterMethod::kOracle: {
      const AlphaMask& m = *cfg.oracle_mask;
      if (m.height != v.height || m.width != v.width)
        throw DimensionError("oracle mask dimensions do not match frame");
      return m;
    }
    case SegmenterMethod::kBackgroundDiff: {
      const Frame& ref = *cfg.reference_background;
      if (!ref.same_shape(v))
        throw DimensionError("reference background dimensions do not match frame");
      AlphaMask m(v.height, v.width);
      for (int y = 0; y < v.height; ++y)
        for (int x = 0; x < v.width; ++x) {
          double diff = 0.0;
          for (int c = 0; c < v.channels; ++c)
            diff += std::abs(v.at(y, x, c) - ref.at(y, x, c));
          diff /= v.channels;
          m.at(y, x) = diff > cfg.threshold ? 1.0 : 0.0;
        }
      return morph_open_close(m, cfg.morph_radius);
    }
    case SegmenterMethod::kChromaKey: {
      if (v.channels != 3) throw DimensionError("chroma_key requires 3 channels");
      AlphaMask m(v.height, v.width);
      for (int y = 0; y < v.height; ++y)
        for (int x = 0; x < v.width; ++x) {
          double diff = (std::abs(v.at(y, x, 0) - cfg.key_r) +
                         std::abs(v.at(y, x, 1) - cfg.key_g) +
                         std::abs(v.at(y, x, 2) - cfg.key_b)) / 3.0;
          m.at(y, x) = diff <= cfg.threshold ? 0.0 : 1.0;
        }
      return morph_open_close(m, cfg.morph_radius);
    }
  }
  throw ConfigError("unknown segmenter method");
}

Frame compose_foreground(const Frame& v, const AlphaMask& alpha) {
  if (alpha.height != v.height || alpha.width != v.width)
    throw DimensionError("compose_foreground: dimension mismatch");
  Frame x(v.height, v.width, v.channels);
  for (int y = 0; y < v.height; ++y)
    for (int xx = 0; xx < v.width; ++xx) {
      double a = alpha.at(y, xx);
      for (int c = 0; c < v.channels; ++c)
        x.at(y, xx, c) = a * v.at(y, xx, c) + (1.0 - a) * 1.0;
    }
  return x;
}

Frame extract_background_literal(const Frame& v, const Frame& x) {
  if (!v.same_shape(x)) throw DimensionError("extract_background: dimension mismatch");
  Frame bgr(v.height, v.width, v.channels);
  for (size_t i = 0; i < v.data.size(); ++i)
    bgr.data[i] = std::clamp(v.data[i] - x.data[i], 0.0, 1.0);
  return bgr;
}

Frame extract_background_masked(const Frame& v, const AlphaMask& alpha) {
  if (alpha.height != v.height || alpha.width != v.width)
    throw DimensionError("extract_background: dimension mismatch");
  Frame bgr(v.height, v.width, v.channels);
  for (int y = 0; y < v.height; ++y)
    for (int x = 0; x < v.width; ++x) {
      double a = alpha.at(y, x);
      for (int c = 0; c < v.channels; ++c)
        bgr.at(y, x, c) = (1.0 - a) * v.at(y, x, c);
    }
  return bgr;
}

Frame reconstruct_frame(const Frame& x_hat, const AlphaMask& alpha_hat, const Frame& bgr_hat) {
  if (!x_hat.same_shape(bgr_hat) || alpha_hat.height != x_hat.height ||
      alpha_hat.width != x_hat.width)
    throw DimensionError("reconstruct_frame: dimension mismatch");
  Frame v(x_hat.height, x_hat.width, x_hat.channels);
  for (int y = 0; y < v.height; ++y)
    for (int x = 0; x < v.width; ++x) {
      double a = alpha_hat.at(y, x);
      for (int c = 0; c < v.channels; ++c)
        v.at(y, x, c) = std::clamp(a * x_hat.at(y, x, c) + (1.0 - a) * bgr_hat.at(y, x, c),
                                   0.0, 1.0);
    }
  return v;
}

Frame mask_to_frame(const AlphaMask& a) {
  Frame f(a.height, a.width, 1);
  f.data = a.data;
  return f;
}

AlphaMask frame_to_mask(const Frame& f) {
  if (f.channels != 1) throw DimensionError("frame_to_mask: expected 1 channel");
  AlphaMask a(f.height, f.width);
  a.data = f.data;
  return a;
}

double laplacian_loss(const AlphaMask& a, const AlphaMask& b) {
  if (!a.same_shape(b)) throw DimensionError("laplacian_loss: dimension mismatch");
  constexpr int kLevels = 5;
  std::vector<Frame> pa = laplacian_pyramid(mask_to_frame(a), kLevels);
  std::vector<Frame> pb = laplacian_pyramid(mask_to_frame(b), kLevels);
  double loss = 0.0;
  for (int i = 0; i < kLevels; ++i) {
    double l1 = 0.0;
    for (size_t j = 0; j < pa[i].data.size(); ++j)
      l1 += std::abs(pa[i].data[j] - pb[i].data[j]);
    loss += (static_cast<double>(1 << i) / kLevels) * l1;
  }
  return loss;
}

double moe_loss(const AlphaMask& a, const AlphaMask& a_star,
                const AlphaMask& a_prev, const AlphaMask& a_star_prev) {
  if (!a.same_shape(a_star) || !a.same_shape(a_prev) || !a.same_shape(a_star_prev))
    throw DimensionError("moe_loss: dimension mismatch");
  double l1 = 0.0;
  double temporal_sq = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    l1 += std::abs(a.data[i] - a_star.data[i]);
    double d = (a.data[i] - a_prev.data[i]) - (a_star.data[i] - a_star_prev.data[i]);
    temporal_sq += d * d;
  }
  return l1 + laplacian_loss(a, a_star) + 5.0 * std::sqrt(temporal_sq);
}

}  // namespace semvid
