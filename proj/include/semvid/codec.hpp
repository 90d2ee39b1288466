#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semvid/channel.hpp"
#include "semvid/cve.hpp"
#include "semvid/entropy.hpp"
#include "semvid/frame.hpp"
#include "semvid/metrics.hpp"
#include "semvid/moe.hpp"
#include "semvid/motion.hpp"

namespace semvid {

enum class FrameType : uint8_t { kIntra = 0, kInter = 1 };

// One coded frame on the wire. The latent payload follows the entropy stream
// layout (rANS bytes, escape side channel, CRC32); record_crc covers the
// alpha, motion, and latent payload bytes together.
struct FrameRecord {
  FrameType type = FrameType::kIntra;
  std::vector<uint8_t> alpha_payload;
  std::vector<uint8_t> motion_payload;  // empty for intra frames
  std::vector<uint8_t> latent_payload;
  uint32_t latent_rans_len = 0;  // rANS byte count within latent_payload
  uint32_t record_crc = 0;

  uint64_t payload_bits() const;
};

struct BitstreamHeader {
  uint32_t version = 1;
  uint32_t height = 0, width = 0, channels = 0, frame_count = 0;
  uint32_t lambda_id = 0;
  double q_step = 0, scale_a = 0, scale_c = 0;
  uint8_t channel_mode = 0;
  double snr_db = 0, fading_h = 0;
  uint64_t seed = 0;
  uint8_t moe_enabled = 1;
  uint8_t intra_only = 0;
};

struct Bitstream {
  BitstreamHeader header;
  FrameRecord background;  // exactly one per stream
  std::vector<FrameRecord> frames;
};

struct CodecConfig {
  SegmenterConfig segmenter;
  // Per-frame ground-truth masks for the oracle segmenter.
  std::vector<AlphaMask> oracle_masks;
  MotionConfig motion;
  CoderParams coder;
  ChannelConfig channel;
  bool moe_enabled = true;  // false: whole frame treated as foreground
  bool intra_only = false;  // baseline: zero context every frame
};

// Alpha side channel: run-length encoding of a binary mask, Exp-Golomb run
// lengths. Bits are counted into k_t.
std::vector<uint8_t> encode_alpha(const AlphaMask& a);
AlphaMask decode_alpha(std::span<const uint8_t> bytes, int height, int width);

struct EncodeResult {
  Bitstream stream;
  // Encoder-side (closed-loop) reconstructions, for the drift invariant.
  VideoSequence reconstruction;
  std::vector<uint64_t> per_frame_bits;  // k_t, bits
};

EncodeResult encode_stream(const VideoSequence& v, const CodecConfig& cfg);

struct DecodeResult {
  VideoSequence reconstruction;
  std::vector<bool> concealed;  // per frame, true when CRC failed
};

DecodeResult decode_stream(const Bitstream& b, const CodecConfig& cfg);

// .svb serialization, little-endian throughout (see FORMAT.md).
std::vector<uint8_t> serialize_bitstream(const Bitstream& b);
Bitstream parse_bitstream(std::span<const uint8_t> bytes);
void write_bitstream(const Bitstream& b, const std::string& path);
Bitstream read_bitstream(const std::string& path);

struct FrameMetrics {
  int frame = 0;
  uint64_t bits = 0;
  double psnr_db = 0;
  double ms_ssim = 0;
  bool concealed = false;
};

struct Report {
  int lambda_id = 0;
  double snr_db = 0;
  std::string mode;
  std::vector<FrameMetrics> frames;
  double cbr = 0;
  double mean_psnr = 0;
  double mean_ms_ssim = 0;
  uint64_t total_bits = 0;
  uint64_t background_bits_saved = 0;  // filled by the diagnostic comparison
};

Report evaluate(const VideoSequence& original, const VideoSequence& reconstruction,
                const std::vector<uint64_t>& per_frame_bits,
                const std::vector<bool>& concealed);

struct SimulationGrid {
  std::vector<int> lambdas = {256, 512, 1024, 2048};
  std::vector<double> snrs_db = {15.0};
  std::vector<ChannelMode> modes = {ChannelMode::kFeature};
  bool include_intra_baseline = false;
  bool include_moe_off = false;  // diagnostic for background_bits_saved
  // Directory holding tuned params_lambda<N>.txt files; defaults when unset.
  std::optional<std::string> params_dir;
};

std::vector<Report> simulate(const VideoSequence& v, const CodecConfig& base,
                             const SimulationGrid& grid);

void write_report_csv(const std::vector<Report>& reports, const std::string& path);
void write_report_json(const std::vector<Report>& reports, const std::string& path);

}  // namespace semvid
