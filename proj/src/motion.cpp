#include "semvid/motion.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace semvid {

FlowField upsample_flow(const FlowField& m) {
  Frame as_frame(m.height, m.width, 2);
  as_frame.data = m.data;
  Frame up = upsample2x(as_frame);
  FlowField out(up.height, up.width);
  for (size_t i = 0; i < up.data.size(); ++i) out.data[i] = up.data[i] * 2.0;
  return out;
}

FlowField block_match(const Frame& cur, const Frame& ref_warped, const MotionConfig& cfg) {
  cfg.validate();
  if (!cur.same_shape(ref_warped))
    throw DimensionError("block_match: dimension mismatch");
  FlowField flow(cur.height, cur.width);
  int bs = cfg.block_size;
  int r = cfg.search_radius;
  for (int by = 0; by < cur.height; by += bs) {
    for (int bx = 0; bx < cur.width; bx += bs) {
      int bh = std::min(bs, cur.height - by);
      int bw = std::min(bs, cur.width - bx);
      double best_sad = std::numeric_limits<double>::infinity();
      int best_l1 = 0, best_dx = 0, best_dy = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          double sad = 0.0;
          for (int y = 0; y < bh; ++y)
            for (int x = 0; x < bw; ++x)
              for (int c = 0; c < cur.channels; ++c)
                sad += std::abs(cur.at(by + y, bx + x, c) -
                                ref_warped.at_clamped(by + y + dy, bx + x + dx, c));
          int l1 = std::abs(dx) + std::abs(dy);
          // Row-major candidate order resolves remaining ties implicitly
          // (strict comparisons keep the earliest candidate).
          if (sad < best_sad || (sad == best_sad && l1 < best_l1)) {
            best_sad = sad;
            best_l1 = l1;
            best_dx = dx;
            best_dy = dy;
          }
        }
      }
      for (int y = 0; y < bh; ++y)
        for (int x = 0; x < bw; ++x) {
          flow.dx(by + y, bx + x) = best_dx;
          flow.dy(by + y, bx + x) = best_dy;
        }
    }
  }
  return flow;
}

FlowEstimate estimate_flow_detail(const Frame& x_t, const Frame& x_prev,
                                  const MotionConfig& cfg) {
  cfg.validate();
  if (!x_t.same_shape(x_prev)) throw DimensionError("estimate_flow: dimension mismatch");
  int div = 1 << cfg.levels;
  if (x_t.height % div != 0 || x_t.width % div != 0)
    throw DimensionError("estimate_flow: dimensions not divisible by 2^levels");

  std::vector<Frame> pyr_cur = gaussian_pyramid(x_t, cfg.levels + 1);
  std::vector<Frame> pyr_prev = gaussian_pyramid(x_prev, cfg.levels + 1);

  FlowEstimate est;
  // M_0: zero flow at the coarsest scale.
  FlowField m(pyr_cur[cfg.levels].height, pyr_cur[cfg.levels].width);
  for (int k = 1; k <= cfg.levels; ++k) {
    FlowField up = upsample_flow(m);
    const Frame& cur = pyr_cur[cfg.levels - k];
    const Frame& prev = pyr_prev[cfg.levels - k];
    Frame warped = warp_bilinear(prev, up);
    FlowField residual = block_match(cur, warped, cfg);
    m = up;
    for (size_t i = 0; i < m.data.size(); ++i) m.data[i] += residual.data[i];
    est.residuals.push_back(std::move(residual));
  }
  est.flow = std::move(m);
  return est;
}

FlowField estimate_flow(const Frame& x_t, const Frame& x_prev, const MotionConfig& cfg) {
  return estimate_flow_detail(x_t, x_prev, cfg).flow;
}

FlowField reconstruct_flow(const std::vector<FlowField>& residuals,
                           int coarse_h, int coarse_w) {
  FlowField m(coarse_h, coarse_w);
  for (const FlowField& residual : residuals) {
    FlowField up = upsample_flow(m);
    if (up.height != residual.height || up.width != residual.width)
      throw DimensionError("reconstruct_flow: residual geometry mismatch");
    m = up;
    for (size_t i = 0; i < m.data.size(); ++i) m.data[i] += residual.data[i];
  }
  return m;
}

}  // namespace semvid
