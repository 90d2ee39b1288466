#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semvid/moe.hpp"  // ConfigError

namespace semvid {

enum class ChannelMode { kIdeal, kBit, kFeature };

struct ChannelConfig {
  ChannelMode mode = ChannelMode::kFeature;
  double snr_db = 15.0;
  double h = 0.9;
  uint64_t seed = 0;

  void validate() const {
    if (h < 0.0) throw ConfigError("fading coefficient must be >= 0");
    if (mode == ChannelMode::kFeature && h == 0.0)
      throw ConfigError("feature mode with h = 0: equalization undefined");
  }
};

ChannelMode parse_channel_mode(const std::string& name);
std::string channel_mode_name(ChannelMode mode);

// Gaussian tail, Q(x) = 0.5 erfc(x / sqrt(2)).
double qfunc(double x);

// Hard-decision BPSK bit error rate over the faded AWGN link.
double ber_bpsk(double snr_db, double h);

// Deterministic generator: identical (seed, frame_index) streams regardless
// of platform. Used for bit flips, feature noise, and link loss injection.
class NoiseStream {
 public:
  NoiseStream(uint64_t seed, uint64_t stream_index);
  double uniform();   // [0, 1)
  double gaussian();  // standard normal, Box-Muller

 private:
  uint64_t next();
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Bit mode: independent flips at ber_bpsk(snr_db, h). Ideal mode: identity.
std::vector<uint8_t> transmit_bits(std::span<const uint8_t> payload,
                                   const ChannelConfig& cfg, uint64_t frame_index);

// Feature mode: y_hat = h*y + n, sigma^2 = h^2 * P_y / 10^(snr/10), with
// P_y the empirical mean square of y; output is equalized by 1/h.
std::vector<double> transmit_features(std::span<const double> y,
                                      const ChannelConfig& cfg, uint64_t frame_index);

}  // namespace semvid
