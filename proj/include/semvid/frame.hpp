#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace semvid {

struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Row-major H x W x C grid of real samples in [0,1].
struct Frame {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  Frame() = default;
  Frame(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c),
        data(static_cast<size_t>(h) * w * c, fill) {}

  double& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  // Clamped access for border handling.
  double at_clamped(int y, int x, int c) const;

  bool same_shape(const Frame& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  size_t size() const { return data.size(); }
};

struct VideoSequence {
  std::vector<Frame> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
  void validate() const;  // throws DimensionError on shape mismatch / empty
};

// Per-pixel (dx, dy) displacement in pixels.
struct FlowField {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // row-major, 2 values per pixel

  FlowField() = default;
  FlowField(int h, int w) : height(h), width(w),
      data(static_cast<size_t>(h) * w * 2, 0.0) {}

  double& dx(int y, int x) { return data[(static_cast<size_t>(y) * width + x) * 2]; }
  double& dy(int y, int x) { return data[(static_cast<size_t>(y) * width + x) * 2 + 1]; }
  double dx(int y, int x) const { return data[(static_cast<size_t>(y) * width + x) * 2]; }
  double dy(int y, int x) const { return data[(static_cast<size_t>(y) * width + x) * 2 + 1]; }
};

Frame downsample2x(const Frame& f);
Frame upsample2x(const Frame& f);
Frame warp_bilinear(const Frame& f, const FlowField& flow);
std::vector<Frame> gaussian_pyramid(const Frame& f, int levels);
std::vector<Frame> laplacian_pyramid(const Frame& f, int levels);

}  // namespace semvid
