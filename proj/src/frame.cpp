#include "semvid/frame.hpp"

#include <algorithm>
#include <cmath>

namespace semvid {

double Frame::at_clamped(int y, int x, int c) const {
  y = std::clamp(y, 0, height - 1);
  x = std::clamp(x, 0, width - 1);
  return at(y, x, c);
}

void VideoSequence::validate() const {
  if (frames.empty()) throw DimensionError("empty sequence");
  for (const Frame& f : frames) {
    if (!f.same_shape(frames.front()))
      throw DimensionError("frames in sequence have mixed shapes");
  }
}

Frame downsample2x(const Frame& f) {
  if (f.height % 2 != 0 || f.width % 2 != 0)
    throw DimensionError("downsample2x requires even dimensions");
  Frame out(f.height / 2, f.width / 2, f.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < f.channels; ++c)
        out.at(y, x, c) = 0.25 * (f.at(2 * y, 2 * x, c) + f.at(2 * y, 2 * x + 1, c) +
                                  f.at(2 * y + 1, 2 * x, c) + f.at(2 * y + 1, 2 * x + 1, c));
  return out;
}

// Bilinear sample at real coordinates with clamp-to-edge.
static double sample_bilinear(const Frame& f, double y, double x, int c) {
  int y0 = static_cast<int>(std::floor(y));
  int x0 = static_cast<int>(std::floor(x));
  double fy = y - y0;
  double fx = x - x0;
  double v00 = f.at_clamped(y0, x0, c);
  double v01 = f.at_clamped(y0, x0 + 1, c);
  double v10 = f.at_clamped(y0 + 1, x0, c);
  double v11 = f.at_clamped(y0 + 1, x0 + 1, c);
  return (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);
}

Frame upsample2x(const Frame& f) {
  Frame out(f.height * 2, f.width * 2, f.channels);
  for (int y = 0; y < out.height; ++y) {
    double sy = (y + 0.5) / 2.0 - 0.5;
    for (int x = 0; x < out.width; ++x) {
      double sx = (x + 0.5) / 2.0 - 0.5;
      for (int c = 0; c < f.channels; ++c)
        out.at(y, x, c) = sample_bilinear(f, sy, sx, c);
    }
  }
  return out;
}

Frame warp_bilinear(const Frame& f, const FlowField& flow) {
  if (flow.height != f.height || flow.width != f.width)
    throw DimensionError("warp_bilinear: flow/frame dimension mismatch");
  Frame out(f.height, f.width, f.channels);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      double sx = x + flow.dx(y, x);
      double sy = y + flow.dy(y, x);
      for (int c = 0; c < f.channels; ++c)
        out.at(y, x, c) = sample_bilinear(f, sy, sx, c);
    }
  return out;
}

std::vector<Frame> gaussian_pyramid(const Frame& f, int levels) {
  if (levels < 1) throw DimensionError("gaussian_pyramid: levels must be >= 1");
  int div = 1 << (levels - 1);
  if (f.height % div != 0 || f.width % div != 0)
    throw DimensionError("gaussian_pyramid: dimensions not divisible by 2^(levels-1)");
  std::vector<Frame> pyr;
  pyr.reserve(levels);
  pyr.push_back(f);
  for (int i = 1; i < levels; ++i) pyr.push_back(downsample2x(pyr.back()));
  return pyr;
}

std::vector<Frame> laplacian_pyramid(const Frame& f, int levels) {
  std::vector<Frame> gauss = gaussian_pyramid(f, levels);
  std::vector<Frame> lap(levels);
  for (int i = 0; i + 1 < levels; ++i) {
    Frame up = upsample2x(gauss[i + 1]);
    lap[i] = gauss[i];
    for (size_t j = 0; j < lap[i].data.size(); ++j) lap[i].data[j] -= up.data[j];
  }
  lap[levels - 1] = gauss[levels - 1];
  return lap;
}

}  // namespace semvid
