#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semvid/frame.hpp"

namespace semvid {

constexpr int kBlockSize = 16;          // latent cell footprint in pixels
constexpr int kCoeffsPerChannel = 32;   // kept DCT coefficients, zigzag order
constexpr int kLatentChannels = 96;     // 32 coefficients x 3 color channels

// Decoder-available prediction of the current frame (warped previous
// reconstruction, box-refined). Same shape as the frame.
struct Context {
  Frame frame;
};

// Quantized transform coefficients, H/16 x W/16 x 96 integer symbols.
// Symbols may exceed the entropy alphabet; the codec layer escapes them.
struct Latent {
  int grid_h = 0;
  int grid_w = 0;
  std::vector<int> data;  // (gy * grid_w + gx) * 96 + channel

  Latent() = default;
  Latent(int gh, int gw) : grid_h(gh), grid_w(gw),
      data(static_cast<size_t>(gh) * gw * kLatentChannels, 0) {}
  size_t size() const { return data.size(); }
};

// Per-element Laplacian scale bin indices, same geometry as Latent.
struct ScaleField {
  int grid_h = 0;
  int grid_w = 0;
  std::vector<uint8_t> bins;

  ScaleField() = default;
  ScaleField(int gh, int gw) : grid_h(gh), grid_w(gw),
      bins(static_cast<size_t>(gh) * gw * kLatentChannels, 0) {}
};

struct CoderParams {
  double q_step = 1.0 / 255.0;
  double scale_a = 4.0;
  double scale_c = 0.5;
  int lambda_id = 2048;  // which lambda in {256, 512, 1024, 2048} this serves

  void validate() const {
    if (q_step <= 0.0) throw DimensionError("q_step must be positive");
  }
};

// Untuned starting points per lambda.
CoderParams default_params(int lambda_id);

// key = value text file, one entry per line.
void save_params(const CoderParams& p, const std::string& path);
CoderParams load_params(const std::string& path);

// z_t = warp(x_prev_hat, m_t) followed by one 3x3 box smoothing pass.
Context extract_context(const Frame& x_prev_hat, const FlowField& m_t);

// Residual -> per-block orthonormal 16x16 DCT -> first 32 zigzag
// coefficients per color channel -> round(c / q_step).
Latent latent_forward(const Frame& x_t, const Context& z_t, const CoderParams& p);
Frame latent_inverse(const Latent& y_hat, const Context& z_t, const CoderParams& p);

// Real-valued coefficient views of a latent (used by the feature channel).
std::vector<double> dequantize_latent(const Latent& y, const CoderParams& p);
Latent requantize_latent(std::span<const double> values, int grid_h, int grid_w,
                         const CoderParams& p);

// Scale field derived from shared context only, bit-identical at both ends.
ScaleField entropy_estimate(const Context& z_t, const CoderParams& p);

// Shannon estimate of k_t in bits for a latent under a scale field.
double estimate_code_length(const Latent& y, const ScaleField& w);

// Per-coefficient-index decay applied to the raw scale (index 0 = DC).
double channel_scale_decay(int coeff_index);

}  // namespace semvid
