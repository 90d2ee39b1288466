#pragma once

// Deterministic synthetic content shared by the unit and acceptance suites.

#include <cmath>
#include <cstdint>

#include "semvid/channel.hpp"
#include "semvid/frame.hpp"
#include "semvid/moe.hpp"

namespace semvid::testutil {

// Smooth deterministic texture from a few incommensurate sinusoids.
inline Frame textured_frame(int h, int w, int channels, uint64_t variant = 0) {
  Frame f(h, w, channels);
  double p1 = 0.37 + 0.11 * static_cast<double>(variant % 5);
  double p2 = 0.23 + 0.07 * static_cast<double>(variant % 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) {
        double v = 0.5 + 0.2 * std::sin(p1 * x + 0.3 * c) + 0.2 * std::cos(p2 * y - 0.2 * c) +
                   0.1 * std::sin(0.13 * (x + y) + c);
        f.at(y, x, c) = std::clamp(v, 0.0, 1.0);
      }
  return f;
}

inline Frame random_frame(int h, int w, int channels, uint64_t seed) {
  Frame f(h, w, channels);
  NoiseStream rng(seed, 0);
  for (double& v : f.data) v = rng.uniform();
  return f;
}

inline AlphaMask random_binary_mask(int h, int w, uint64_t seed, double p_one = 0.5) {
  AlphaMask m(h, w);
  NoiseStream rng(seed, 1);
  for (double& v : m.data) v = rng.uniform() < p_one ? 1.0 : 0.0;
  return m;
}

// Integer-shifted copy with clamp-to-edge; source pixel (y - dy, x - dx).
inline Frame translate_frame(const Frame& f, int dx, int dy) {
  Frame out(f.height, f.width, f.channels);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      for (int c = 0; c < f.channels; ++c)
        out.at(y, x, c) = f.at_clamped(y - dy, x - dx, c);
  return out;
}

struct MovingSquareSequence {
  VideoSequence video;
  std::vector<AlphaMask> masks;  // ground truth foreground
  Frame background;
};

// A textured foreground square gliding across a static textured background.
inline MovingSquareSequence moving_square(int h, int w, int frames, int square = 48,
                                          int step = 2, uint64_t variant = 0) {
  MovingSquareSequence seq;
  seq.background = textured_frame(h, w, 3, variant);
  Frame fg_texture = textured_frame(h, w, 3, variant + 7);
  for (int t = 0; t < frames; ++t) {
    int ox = (h / 8 + t * step) % (w - square);
    int oy = (h / 8 + (t * step) / 2) % (h - square);
    Frame f = seq.background;
    AlphaMask m(h, w);
    for (int y = oy; y < oy + square; ++y)
      for (int x = ox; x < ox + square; ++x) {
        for (int c = 0; c < 3; ++c)
          // Texture sampled in object coordinates so the square's content
          // moves rigidly with it.
          f.at(y, x, c) = fg_texture.at(y - oy, x - ox, c);
        m.at(y, x) = 1.0;
      }
    seq.video.frames.push_back(std::move(f));
    seq.masks.push_back(std::move(m));
  }
  return seq;
}

}  // namespace semvid::testutil
