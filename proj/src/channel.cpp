#include "semvid/channel.hpp"

#include <cmath>
#include <numbers>

namespace semvid {

ChannelMode parse_channel_mode(const std::string& name) {
  if (name == "ideal") return ChannelMode::kIdeal;
  if (name == "bit") return ChannelMode::kBit;
  if (name == "feature") return ChannelMode::kFeature;
  throw ConfigError("unknown channel mode: " + name);
}

std::string channel_mode_name(ChannelMode mode) {
  switch (mode) {
    case ChannelMode::kIdeal: return "ideal";
    case ChannelMode::kBit: return "bit";
    case ChannelMode::kFeature: return "feature";
  }
  return "?";
}

double qfunc(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double ber_bpsk(double snr_db, double h) {
  return qfunc(h * std::sqrt(2.0 * std::pow(10.0, snr_db / 10.0)));
}

// splitmix64; fixed algorithm so streams are platform-independent.
NoiseStream::NoiseStream(uint64_t seed, uint64_t stream_index) {
  state_ = seed ^ (stream_index * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull);
  next();  // decorrelate nearby seeds
}

uint64_t NoiseStream::next() {
  uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double NoiseStream::uniform() {
  return (next() >> 11) * 0x1.0p-53;
}

double NoiseStream::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

std::vector<uint8_t> transmit_bits(std::span<const uint8_t> payload,
                                   const ChannelConfig& cfg, uint64_t frame_index) {
  cfg.validate();
  std::vector<uint8_t> out(payload.begin(), payload.end());
  if (cfg.mode == ChannelMode::kIdeal) return out;
  if (cfg.mode != ChannelMode::kBit)
    throw ConfigError("transmit_bits requires bit or ideal mode");
  double p = ber_bpsk(cfg.snr_db, cfg.h);
  if (p <= 0.0) return out;
  NoiseStream rng(cfg.seed, frame_index);
  for (size_t i = 0; i < out.size(); ++i)
    for (int b = 0; b < 8; ++b)
      if (rng.uniform() < p) out[i] ^= static_cast<uint8_t>(1u << b);
  return out;
}

std::vector<double> transmit_features(std::span<const double> y,
                                      const ChannelConfig& cfg, uint64_t frame_index) {
  cfg.validate();
  std::vector<double> out(y.begin(), y.end());
  if (cfg.mode == ChannelMode::kIdeal) return out;
  if (cfg.mode != ChannelMode::kFeature)
    throw ConfigError("transmit_features requires feature or ideal mode");
  double power = 0.0;
  for (double v : y) power += v * v;
  if (y.empty() || power == 0.0) return out;
  power /= static_cast<double>(y.size());
  double sigma = cfg.h * std::sqrt(power / std::pow(10.0, cfg.snr_db / 10.0));
  NoiseStream rng(cfg.seed, frame_index);
  for (double& v : out) {
    double received = cfg.h * v + sigma * rng.gaussian();
    v = received / cfg.h;  // receiver equalization
  }
  return out;
}

}  // namespace semvid
