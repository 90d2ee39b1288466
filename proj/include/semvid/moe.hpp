#pragma once

#include <optional>
#include <string>

#include "semvid/frame.hpp"

namespace semvid {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Per-pixel foreground coefficient in [0,1].
struct AlphaMask {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  AlphaMask() = default;
  AlphaMask(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

  double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
  bool same_shape(const AlphaMask& o) const { return height == o.height && width == o.width; }
  bool is_binary() const;
};

enum class SegmenterMethod { kOracle, kBackgroundDiff, kChromaKey };

struct SegmenterConfig {
  SegmenterMethod method = SegmenterMethod::kBackgroundDiff;
  std::optional<Frame> reference_background;   // required for background_diff
  std::optional<AlphaMask> oracle_mask;        // required for oracle
  double threshold = 0.1;                      // in (0,1)
  int morph_radius = 0;
  double key_r = 0.0, key_g = 1.0, key_b = 0.0;  // chroma key color

  void validate() const;
};

AlphaMask estimate_alpha(const Frame& v, const SegmenterConfig& cfg);

// x = alpha*v + (1-alpha)*white
Frame compose_foreground(const Frame& v, const AlphaMask& alpha);

// Literal form: clamp(v - x, [0,1]).
Frame extract_background_literal(const Frame& v, const Frame& x);
// Masked form: (1-alpha)*v. Pipeline default.
Frame extract_background_masked(const Frame& v, const AlphaMask& alpha);

// v_hat = alpha*x_hat + (1-alpha)*bgr_hat, clamped to [0,1].
Frame reconstruct_frame(const Frame& x_hat, const AlphaMask& alpha_hat, const Frame& bgr_hat);

double laplacian_loss(const AlphaMask& a, const AlphaMask& b);
double moe_loss(const AlphaMask& a, const AlphaMask& a_star,
                const AlphaMask& a_prev, const AlphaMask& a_star_prev);

Frame mask_to_frame(const AlphaMask& a);
AlphaMask frame_to_mask(const Frame& f);

}  // namespace semvid
