#pragma once

#include <functional>
#include <vector>

#include "semvid/cve.hpp"
#include "semvid/frame.hpp"
#include "semvid/moe.hpp"
#include "semvid/motion.hpp"

namespace semvid {

struct AdamState {
  int step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-4;

  explicit AdamState(size_t dim = 0)
      : first_moment(dim, 0.0), second_moment(dim, 0.0) {}
};

// One Adam update with bias correction; params are updated in place.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& st);

using Objective = std::function<double(const std::vector<double>&)>;

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h.
std::vector<double> finite_diff_grad(const Objective& objective,
                                     const std::vector<double>& params, double h);

struct TuneOptions {
  int iterations = 40;
  double fd_step = 0.02;
  double learning_rate = 1e-4;
  SegmenterConfig segmenter;
  std::vector<std::vector<AlphaMask>> oracle_masks;  // per sequence, per frame
  MotionConfig motion;
};

struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Minimizes mean-over-frames of k_hat + lambda * distortion over
// theta = (log q_step, scale_a, scale_c); returns the best-seen parameters.
CoderParams tune(const std::vector<VideoSequence>& train, int lambda, const TuneOptions& opts);

// The tuning objective at a given parameter point (exposed for tests).
double tune_objective(const std::vector<VideoSequence>& train, int lambda,
                      const CoderParams& p, const TuneOptions& opts);

}  // namespace semvid
