#include "semvid/optim.hpp"

#include <cmath>

#include "semvid/entropy.hpp"
#include "semvid/metrics.hpp"

namespace semvid {

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& st) {
  if (params.size() != grads.size() || params.size() != st.first_moment.size())
    throw LogicError("adam_step: length mismatch");
  st.step += 1;
  double bc1 = 1.0 - std::pow(st.beta1, st.step);
  double bc2 = 1.0 - std::pow(st.beta2, st.step);
  for (size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    st.first_moment[i] = st.beta1 * st.first_moment[i] + (1.0 - st.beta1) * g;
    st.second_moment[i] = st.beta2 * st.second_moment[i] + (1.0 - st.beta2) * g * g;
    double e_hat = st.first_moment[i] / bc1;
    double s_hat = st.second_moment[i] / bc2;
    params[i] -= st.learning_rate * e_hat / (std::sqrt(s_hat) + st.epsilon);
  }
}

std::vector<double> finite_diff_grad(const Objective& objective,
                                     const std::vector<double>& params, double h) {
  if (h <= 0.0) throw LogicError("finite_diff_grad: h must be positive");
  std::vector<double> grad(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    std::vector<double> plus = params, minus = params;
    plus[i] += h;
    minus[i] -= h;
    grad[i] = (objective(plus) - objective(minus)) / (2.0 * h);
  }
  return grad;
}

namespace {

// Cached per-sequence tuning inputs: composites and open-loop flow fields,
// both independent of the parameters being tuned.
struct TuneSequence {
  std::vector<Frame> composites;
  std::vector<FlowField> flows;  // flows[t] maps frame t to frame t-1, t >= 1
};

std::vector<TuneSequence> prepare_sequences(const std::vector<VideoSequence>& train,
                                            const TuneOptions& opts) {
  std::vector<TuneSequence> out;
  for (size_t s = 0; s < train.size(); ++s) {
    const VideoSequence& v = train[s];
    v.validate();
    TuneSequence ts;
    for (int t = 0; t < v.frame_count(); ++t) {
      AlphaMask a;
      if (opts.segmenter.method == SegmenterMethod::kOracle) {
        SegmenterConfig sc = opts.segmenter;
        sc.oracle_mask = opts.oracle_masks.at(s).at(t);
        a = estimate_alpha(v.frames[t], sc);
      } else {
        a = estimate_alpha(v.frames[t], opts.segmenter);
      }
      ts.composites.push_back(compose_foreground(v.frames[t], a));
    }
    ts.flows.emplace_back();  // frame 0 is intra
    for (int t = 1; t < v.frame_count(); ++t)
      ts.flows.push_back(estimate_flow(ts.composites[t], ts.composites[t - 1], opts.motion));
    out.push_back(std::move(ts));
  }
  return out;
}

CoderParams params_from_theta(const std::vector<double>& theta, int lambda) {
  CoderParams p;
  p.q_step = std::exp(theta[0]);
  p.scale_a = theta[1];
  p.scale_c = theta[2];
  p.lambda_id = lambda;
  return p;
}

// Mean over frames of the Shannon rate estimate plus lambda times a smooth
// distortion proxy: truncation error of the kept-coefficient reconstruction
// plus the expected quantization noise q^2/12 per kept coefficient. The kept
// coefficients are 1/8 of the samples, so the pixel-domain term is q^2/96.
double objective_value(const std::vector<TuneSequence>& seqs, int lambda,
                       const CoderParams& p) {
  p.validate();
  double total = 0.0;
  int frames = 0;
  // Near-lossless step for the truncation-only reconstruction.
  CoderParams fine = p;
  fine.q_step = 1e-7;
  for (const TuneSequence& ts : seqs) {
    Frame x_prev_hat;
    for (size_t t = 0; t < ts.composites.size(); ++t) {
      const Frame& x = ts.composites[t];
      Context z = (t == 0) ? Context{Frame(x.height, x.width, 3, 0.0)}
                           : extract_context(x_prev_hat, ts.flows[t]);
      ScaleField w = entropy_estimate(z, p);
      Latent y = latent_forward(x, z, p);
      double rate_bits = estimate_code_length(y, w);
      Frame trunc = latent_inverse(latent_forward(x, z, fine), z, fine);
      double dist = mse(x, trunc) + p.q_step * p.q_step / 96.0;
      total += rate_bits + lambda * dist;
      x_prev_hat = latent_inverse(y, z, p);
      ++frames;
    }
  }
  return total / frames;
}

}  // namespace

double tune_objective(const std::vector<VideoSequence>& train, int lambda,
                      const CoderParams& p, const TuneOptions& opts) {
  return objective_value(prepare_sequences(train, opts), lambda, p);
}

CoderParams tune(const std::vector<VideoSequence>& train, int lambda, const TuneOptions& opts) {
  std::vector<TuneSequence> seqs = prepare_sequences(train, opts);
  CoderParams init = default_params(lambda);
  std::vector<double> theta = {std::log(init.q_step), init.scale_a, init.scale_c};

  Objective f = [&](const std::vector<double>& th) {
    return objective_value(seqs, lambda, params_from_theta(th, lambda));
  };

  double initial = f(theta);
  double best_value = initial;
  std::vector<double> best_theta = theta;

  AdamState st(theta.size());
  st.learning_rate = opts.learning_rate;
  for (int it = 0; it < opts.iterations; ++it) {
    std::vector<double> grad = finite_diff_grad(f, theta, opts.fd_step);
    adam_step(theta, grad, st);
    double value = f(theta);
    if (value > 10.0 * initial)
      throw DivergenceError("tune: objective exceeded 10x its initial value");
    if (value < best_value) {
      best_value = value;
      best_theta = theta;
    }
  }
  return params_from_theta(best_theta, lambda);
}

}  // namespace semvid
