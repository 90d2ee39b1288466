#pragma once

#include "semvid/frame.hpp"

namespace semvid {

constexpr double kPsnrCapDb = 99.0;

double mse(const Frame& a, const Frame& b);
double psnr(const Frame& a, const Frame& b);  // peak 1, capped at 99 dB

// 5-scale MS-SSIM, 11x11 Gaussian window (sigma 1.5), C1=0.01^2, C2=0.03^2,
// scale weights {0.0448, 0.2856, 0.3001, 0.2363, 0.1333}. Channels averaged.
// Requires min(H, W) >= 176 so every scale fits the window.
double ms_ssim(const Frame& a, const Frame& b);

// R = (1/T) sum_t k_t / (H*W*C), k_t in bits.
double cbr(const std::vector<uint64_t>& per_frame_bits, int height, int width, int channels);

}  // namespace semvid
