#pragma once

#include "semvid/frame.hpp"

namespace semvid {

struct MotionConfig {
  int levels = 4;
  int block_size = 8;
  int search_radius = 4;  // per level, Chebyshev radius in pixels

  void validate() const {
    if (levels < 1 || block_size < 1 || search_radius < 0)
      throw DimensionError("invalid motion config");
  }
};

// Bilinear 2x upsampling of both flow components; displacement values doubled.
FlowField upsample_flow(const FlowField& m);

// Per-block exhaustive SAD search. Block flow replicated to every pixel of
// the block. Ties break on smallest |d|_1, then row-major candidate order.
FlowField block_match(const Frame& cur, const Frame& ref_warped, const MotionConfig& cfg);

// Coarse-to-fine recursion M_k = u(M_{k-1}) + B_k starting from zero flow at
// the coarsest pyramid level.
FlowField estimate_flow(const Frame& x_t, const Frame& x_prev, const MotionConfig& cfg);

// Per-block integer residuals B_1..B_levels (finest last). The residual
// grids fully determine the flow, so the codec can transmit them and the
// decoder can rebuild m_t bit-identically via reconstruct_flow.
struct FlowEstimate {
  FlowField flow;
  std::vector<FlowField> residuals;
};
FlowEstimate estimate_flow_detail(const Frame& x_t, const Frame& x_prev,
                                  const MotionConfig& cfg);
FlowField reconstruct_flow(const std::vector<FlowField>& residuals,
                           int coarse_h, int coarse_w);

}  // namespace semvid
