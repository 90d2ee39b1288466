#include "semvid/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "semvid/image_io.hpp"

namespace semvid {

namespace {

// Stream indices for the per-frame noise generators. Frame t uses t + 1 so
// the background payload can use 0 without colliding.
constexpr uint64_t kBackgroundNoiseIndex = 0;
uint64_t frame_noise_index(uint32_t t) { return static_cast<uint64_t>(t) + 1; }

uint32_t zigzag_signed(int v) {
  return v <= 0 ? static_cast<uint32_t>(-2 * static_cast<int64_t>(v))
                : static_cast<uint32_t>(2 * static_cast<int64_t>(v) - 1);
}
int unzigzag_signed(uint32_t u) {
  return (u & 1) ? static_cast<int>((u + 1) / 2) : -static_cast<int>(u / 2);
}

Context zero_context(int height, int width) {
  return Context{Frame(height, width, 3, 0.0)};
}

// --- latent payload: rANS bytes || escape side channel || CRC32 ---

struct LatentPayload {
  std::vector<uint8_t> bytes;
  uint32_t rans_len = 0;
  uint64_t bit_length = 0;  // rANS + escape bits, CRC excluded
};

LatentPayload encode_latent_payload(const Latent& y, const ScaleField& w) {
  std::vector<int> clamped(y.data.size());
  BitWriter escapes;
  for (size_t i = 0; i < y.data.size(); ++i) {
    int s = y.data[i];
    if (std::abs(s) >= kSymbolMax) {
      // Saturated symbols always carry an overflow entry (0 = none).
      escapes.put_exp_golomb(static_cast<uint64_t>(std::abs(s) - kSymbolMax));
      s = s < 0 ? kSymbolMin : kSymbolMax;
    }
    clamped[i] = s;
  }
  CodeWords cw = rans_encode(clamped, std::span<const uint8_t>(w.bins));
  std::vector<uint8_t> escape_bytes = escapes.finish();
  LatentPayload p;
  p.rans_len = static_cast<uint32_t>(cw.bytes.size());
  p.bytes = std::move(cw.bytes);
  p.bytes.insert(p.bytes.end(), escape_bytes.begin(), escape_bytes.end());
  uint32_t crc = crc32(p.bytes);
  for (int i = 0; i < 4; ++i) p.bytes.push_back(static_cast<uint8_t>((crc >> (8 * i)) & 0xff));
  p.bit_length = 8 * (p.bytes.size() - 4);
  return p;
}

bool latent_payload_crc_ok(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4) return false;
  uint32_t stored = 0;
  for (int i = 0; i < 4; ++i)
    stored |= static_cast<uint32_t>(bytes[bytes.size() - 4 + i]) << (8 * i);
  return crc32(bytes.subspan(0, bytes.size() - 4)) == stored;
}

Latent decode_latent_payload(std::span<const uint8_t> bytes, uint32_t rans_len,
                             const ScaleField& w, int grid_h, int grid_w) {
  if (bytes.size() < static_cast<size_t>(rans_len) + 4)
    throw DecodeError("latent payload truncated");
  if (!latent_payload_crc_ok(bytes)) throw DecodeError("latent payload CRC mismatch");
  CodeWords cw;
  cw.bytes.assign(bytes.begin(), bytes.begin() + rans_len);
  size_t n = static_cast<size_t>(grid_h) * grid_w * kLatentChannels;
  std::vector<int> symbols = rans_decode(cw, std::span<const uint8_t>(w.bins), n);
  BitReader escapes(bytes.subspan(rans_len, bytes.size() - rans_len - 4));
  Latent y(grid_h, grid_w);
  for (size_t i = 0; i < n; ++i) {
    int s = symbols[i];
    if (std::abs(s) == kSymbolMax) {
      uint64_t overflow = escapes.get_exp_golomb();
      int mag = kSymbolMax + static_cast<int>(overflow);
      s = s < 0 ? -mag : mag;
    }
    y.data[i] = s;
  }
  return y;
}

// --- motion payload: per-level residual block grids, Exp-Golomb coded ---

std::vector<uint8_t> encode_motion(const std::vector<FlowField>& residuals, int block_size) {
  BitWriter bw;
  for (const FlowField& r : residuals) {
    for (int by = 0; by < r.height; by += block_size)
      for (int bx = 0; bx < r.width; bx += block_size) {
        bw.put_exp_golomb(zigzag_signed(static_cast<int>(r.dx(by, bx))));
        bw.put_exp_golomb(zigzag_signed(static_cast<int>(r.dy(by, bx))));
      }
  }
  return bw.finish();
}

std::vector<FlowField> decode_motion(std::span<const uint8_t> bytes, int height, int width,
                                     const MotionConfig& cfg) {
  BitReader br(bytes);
  std::vector<FlowField> residuals;
  for (int k = 1; k <= cfg.levels; ++k) {
    int h = height >> (cfg.levels - k);
    int w = width >> (cfg.levels - k);
    FlowField r(h, w);
    for (int by = 0; by < h; by += cfg.block_size)
      for (int bx = 0; bx < w; bx += cfg.block_size) {
        int dx = unzigzag_signed(static_cast<uint32_t>(br.get_exp_golomb()));
        int dy = unzigzag_signed(static_cast<uint32_t>(br.get_exp_golomb()));
        int bh = std::min(cfg.block_size, h - by);
        int bw2 = std::min(cfg.block_size, w - bx);
        for (int y = 0; y < bh; ++y)
          for (int x = 0; x < bw2; ++x) {
            r.dx(by + y, bx + x) = dx;
            r.dy(by + y, bx + x) = dy;
          }
      }
    residuals.push_back(std::move(r));
  }
  return residuals;
}

uint32_t record_body_crc(const FrameRecord& r) {
  std::vector<uint8_t> body;
  body.insert(body.end(), r.alpha_payload.begin(), r.alpha_payload.end());
  body.insert(body.end(), r.motion_payload.begin(), r.motion_payload.end());
  body.insert(body.end(), r.latent_payload.begin(), r.latent_payload.end());
  return crc32(body);
}

AlphaMask binarize(const AlphaMask& a) {
  AlphaMask out(a.height, a.width);
  for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] >= 0.5 ? 1.0 : 0.0;
  return out;
}

struct CodedFrame {
  FrameRecord record;
  Frame reconstruction;  // what any decoder will produce from the record
  uint64_t bits = 0;
};

CodedFrame code_against_context(const Frame& target, const Context& z, const CoderParams& p) {
  CodedFrame out;
  ScaleField w = entropy_estimate(z, p);
  Latent y = latent_forward(target, z, p);
  LatentPayload payload = encode_latent_payload(y, w);
  out.record.latent_payload = std::move(payload.bytes);
  out.record.latent_rans_len = payload.rans_len;
  out.bits = payload.bit_length;
  out.reconstruction = latent_inverse(y, z, p);
  return out;
}

CoderParams params_from_header(const BitstreamHeader& h) {
  CoderParams p;
  p.q_step = h.q_step;
  p.scale_a = h.scale_a;
  p.scale_c = h.scale_c;
  p.lambda_id = static_cast<int>(h.lambda_id);
  return p;
}

ChannelConfig channel_from_header(const BitstreamHeader& h) {
  ChannelConfig c;
  c.mode = static_cast<ChannelMode>(h.channel_mode);
  c.snr_db = h.snr_db;
  c.h = h.fading_h;
  c.seed = h.seed;
  return c;
}

// Feature-mode impairment on the latent symbols of an already CRC-checked
// payload: dequantize, pass through the fading/noise model, requantize.
Latent apply_feature_channel(const Latent& y, const CoderParams& p, const ChannelConfig& ch,
                             uint64_t noise_index) {
  std::vector<double> values = dequantize_latent(y, p);
  std::vector<double> received = transmit_features(values, ch, noise_index);
  return requantize_latent(received, y.grid_h, y.grid_w, p);
}

}  // namespace

uint64_t FrameRecord::payload_bits() const {
  uint64_t latent_bits = latent_payload.size() >= 4 ? 8 * (latent_payload.size() - 4) : 0;
  return 8 * alpha_payload.size() + 8 * motion_payload.size() + latent_bits;
}

std::vector<uint8_t> encode_alpha(const AlphaMask& a) {
  if (!a.is_binary()) throw LogicError("encode_alpha requires a binary mask");
  BitWriter bw;
  size_t n = a.data.size();
  int current = n > 0 && a.data[0] == 1.0 ? 1 : 0;
  bw.put_bit(current);
  uint64_t run = 0;
  for (size_t i = 0; i < n; ++i) {
    int bit = a.data[i] == 1.0 ? 1 : 0;
    if (bit == current) {
      ++run;
    } else {
      bw.put_exp_golomb(run - 1);
      current = bit;
      run = 1;
    }
  }
  if (run > 0) bw.put_exp_golomb(run - 1);
  return bw.finish();
}

AlphaMask decode_alpha(std::span<const uint8_t> bytes, int height, int width) {
  BitReader br(bytes);
  AlphaMask a(height, width);
  size_t n = a.data.size();
  int current = br.get_bit();
  size_t pos = 0;
  while (pos < n) {
    uint64_t run = br.get_exp_golomb() + 1;
    if (pos + run > n) throw DecodeError("alpha run overflows mask");
    for (uint64_t i = 0; i < run; ++i) a.data[pos++] = current;
    current ^= 1;
  }
  return a;
}

EncodeResult encode_stream(const VideoSequence& v, const CodecConfig& cfg) {
  v.validate();
  const Frame& first = v.frames.front();
  if (first.height % 16 != 0 || first.width % 16 != 0)
    throw DimensionError("encode_stream: dimensions must be divisible by 16");
  if (first.channels != 3) throw DimensionError("encode_stream: 3 channels required");
  cfg.coder.validate();

  int h = first.height, w = first.width;
  EncodeResult result;
  Bitstream& bs = result.stream;
  bs.header.height = static_cast<uint32_t>(h);
  bs.header.width = static_cast<uint32_t>(w);
  bs.header.channels = static_cast<uint32_t>(first.channels);
  bs.header.frame_count = static_cast<uint32_t>(v.frame_count());
  bs.header.lambda_id = static_cast<uint32_t>(cfg.coder.lambda_id);
  bs.header.q_step = cfg.coder.q_step;
  bs.header.scale_a = cfg.coder.scale_a;
  bs.header.scale_c = cfg.coder.scale_c;
  bs.header.channel_mode = static_cast<uint8_t>(cfg.channel.mode);
  bs.header.snr_db = cfg.channel.snr_db;
  bs.header.fading_h = cfg.channel.h;
  bs.header.seed = cfg.channel.seed;
  bs.header.moe_enabled = cfg.moe_enabled ? 1 : 0;
  bs.header.intra_only = cfg.intra_only ? 1 : 0;

  Context z0 = zero_context(h, w);

  // Alpha masks and composited foregrounds for every frame. Soft oracle
  // masks are binarized for transport.
  std::vector<AlphaMask> alphas;
  std::vector<Frame> composites;
  for (int t = 0; t < v.frame_count(); ++t) {
    AlphaMask a;
    if (!cfg.moe_enabled) {
      a = AlphaMask(h, w, 1.0);
    } else if (cfg.segmenter.method == SegmenterMethod::kOracle) {
      if (static_cast<size_t>(t) >= cfg.oracle_masks.size())
        throw ConfigError("oracle segmenter: missing mask for frame " + std::to_string(t));
      SegmenterConfig sc = cfg.segmenter;
      sc.oracle_mask = cfg.oracle_masks[t];
      a = binarize(estimate_alpha(v.frames[t], sc));
    } else {
      a = binarize(estimate_alpha(v.frames[t], cfg.segmenter));
    }
    composites.push_back(compose_foreground(v.frames[t], a));
    alphas.push_back(std::move(a));
  }

  // One static background payload, intra coded against the zero context.
  Frame bgr = cfg.moe_enabled ? extract_background_masked(v.frames.front(), alphas.front())
                              : Frame(h, w, 3, 0.0);
  CodedFrame bg = code_against_context(bgr, z0, cfg.coder);
  bg.record.type = FrameType::kIntra;
  bg.record.record_crc = record_body_crc(bg.record);
  Frame bgr_hat = std::move(bg.reconstruction);
  uint64_t background_bits = bg.bits;
  bs.background = std::move(bg.record);

  Frame x_prev_hat;  // closed-loop state
  for (int t = 0; t < v.frame_count(); ++t) {
    bool intra = (t == 0) || cfg.intra_only;
    CodedFrame coded;
    std::vector<uint8_t> motion_payload;
    if (intra) {
      coded = code_against_context(composites[t], z0, cfg.coder);
      coded.record.type = FrameType::kIntra;
    } else {
      FlowEstimate est = estimate_flow_detail(composites[t], x_prev_hat, cfg.motion);
      motion_payload = encode_motion(est.residuals, cfg.motion.block_size);
      Context z = extract_context(x_prev_hat, est.flow);
      coded = code_against_context(composites[t], z, cfg.coder);
      coded.record.type = FrameType::kInter;
    }
    coded.record.alpha_payload = encode_alpha(alphas[t]);
    coded.record.motion_payload = std::move(motion_payload);
    uint64_t k_t = coded.bits + 8 * coded.record.alpha_payload.size() +
                   8 * coded.record.motion_payload.size();
    if (t == 0) k_t += background_bits;  // the one-off background transmission
    coded.record.record_crc = record_body_crc(coded.record);

    x_prev_hat = coded.reconstruction;
    Frame v_hat = cfg.moe_enabled
                      ? reconstruct_frame(coded.reconstruction, alphas[t], bgr_hat)
                      : coded.reconstruction;
    result.reconstruction.frames.push_back(std::move(v_hat));
    result.per_frame_bits.push_back(k_t);
    bs.frames.push_back(std::move(coded.record));
  }
  return result;
}

DecodeResult decode_stream(const Bitstream& b, const CodecConfig& cfg) {
  const BitstreamHeader& hd = b.header;
  if (hd.height == 0 || hd.width == 0 || hd.height % 16 != 0 || hd.width % 16 != 0)
    throw DecodeError("invalid bitstream header");
  int h = static_cast<int>(hd.height), w = static_cast<int>(hd.width);
  int gh = h / kBlockSize, gw = w / kBlockSize;
  CoderParams p = params_from_header(hd);
  p.validate();
  ChannelConfig ch = channel_from_header(hd);
  ch.validate();
  bool bit_mode = ch.mode == ChannelMode::kBit;
  bool feature_mode = ch.mode == ChannelMode::kFeature;

  Context z0 = zero_context(h, w);
  DecodeResult result;

  // Background payload.
  Frame bgr_hat(h, w, 3, 0.0);
  {
    std::vector<uint8_t> payload(b.background.latent_payload);
    if (bit_mode) payload = transmit_bits(payload, ch, kBackgroundNoiseIndex);
    try {
      ScaleField wfield = entropy_estimate(z0, p);
      Latent y = decode_latent_payload(payload, b.background.latent_rans_len, wfield, gh, gw);
      if (feature_mode) y = apply_feature_channel(y, p, ch, kBackgroundNoiseIndex);
      bgr_hat = latent_inverse(y, z0, p);
    } catch (const DecodeError&) {
      // Corrupted background: fall back to black, frames still decode.
    }
  }

  Frame x_prev_hat(h, w, 3, 0.0);
  Frame v_prev_hat(h, w, 3, 0.0);
  for (uint32_t t = 0; t < hd.frame_count; ++t) {
    if (t >= b.frames.size()) throw DecodeError("bitstream missing frame records");
    const FrameRecord& rec = b.frames[t];
    FrameRecord received = rec;
    if (bit_mode) {
      // The channel corrupts the whole record body; re-split by the known
      // payload lengths.
      std::vector<uint8_t> body;
      body.insert(body.end(), rec.alpha_payload.begin(), rec.alpha_payload.end());
      body.insert(body.end(), rec.motion_payload.begin(), rec.motion_payload.end());
      body.insert(body.end(), rec.latent_payload.begin(), rec.latent_payload.end());
      std::vector<uint8_t> noisy = transmit_bits(body, ch, frame_noise_index(t));
      size_t a = rec.alpha_payload.size(), m = rec.motion_payload.size();
      received.alpha_payload.assign(noisy.begin(), noisy.begin() + a);
      received.motion_payload.assign(noisy.begin() + a, noisy.begin() + a + m);
      received.latent_payload.assign(noisy.begin() + a + m, noisy.end());
    }

    bool ok = record_body_crc(received) == rec.record_crc;
    Frame v_hat;
    if (ok) {
      try {
        AlphaMask alpha = decode_alpha(received.alpha_payload, h, w);
        Context z = z0;
        if (received.type == FrameType::kInter) {
          std::vector<FlowField> residuals =
              decode_motion(received.motion_payload, h, w, cfg.motion);
          FlowField flow = reconstruct_flow(residuals, h >> cfg.motion.levels,
                                            w >> cfg.motion.levels);
          z = extract_context(x_prev_hat, flow);
        }
        ScaleField wfield = entropy_estimate(z, p);
        Latent y = decode_latent_payload(received.latent_payload, received.latent_rans_len,
                                         wfield, gh, gw);
        if (feature_mode) y = apply_feature_channel(y, p, ch, frame_noise_index(t));
        Frame x_hat = latent_inverse(y, z, p);
        x_prev_hat = x_hat;
        if (hd.moe_enabled) {
          v_hat = reconstruct_frame(x_hat, alpha, bgr_hat);
        } else {
          v_hat = std::move(x_hat);
        }
      } catch (const DecodeError&) {
        ok = false;
      }
    }
    if (!ok) {
      // Concealment: freeze the previous reconstruction.
      v_hat = v_prev_hat;
      result.concealed.push_back(true);
    } else {
      result.concealed.push_back(false);
    }
    v_prev_hat = v_hat;
    result.reconstruction.frames.push_back(std::move(v_hat));
  }
  return result;
}

// --- serialization ---

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}
void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}
void put_f64(std::vector<uint8_t>& out, double v) {
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

struct ByteCursor {
  std::span<const uint8_t> bytes;
  size_t pos = 0;

  uint8_t u8() {
    if (pos + 1 > bytes.size()) throw DecodeError("truncated bitstream");
    return bytes[pos++];
  }
  uint32_t u32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(u8()) << (8 * i);
    return v;
  }
  uint64_t u64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::vector<uint8_t> blob(size_t n) {
    if (pos + n > bytes.size()) throw DecodeError("truncated bitstream");
    std::vector<uint8_t> out(bytes.begin() + pos, bytes.begin() + pos + n);
    pos += n;
    return out;
  }
};

void put_record(std::vector<uint8_t>& out, const FrameRecord& r) {
  out.push_back(static_cast<uint8_t>(r.type));
  put_u32(out, static_cast<uint32_t>(r.alpha_payload.size()));
  put_u32(out, static_cast<uint32_t>(r.motion_payload.size()));
  put_u32(out, r.latent_rans_len);
  put_u32(out, static_cast<uint32_t>(r.latent_payload.size()));
  out.insert(out.end(), r.alpha_payload.begin(), r.alpha_payload.end());
  out.insert(out.end(), r.motion_payload.begin(), r.motion_payload.end());
  out.insert(out.end(), r.latent_payload.begin(), r.latent_payload.end());
  put_u32(out, r.record_crc);
}

FrameRecord get_record(ByteCursor& c) {
  FrameRecord r;
  r.type = static_cast<FrameType>(c.u8());
  uint32_t alpha_len = c.u32();
  uint32_t motion_len = c.u32();
  r.latent_rans_len = c.u32();
  uint32_t latent_len = c.u32();
  r.alpha_payload = c.blob(alpha_len);
  r.motion_payload = c.blob(motion_len);
  r.latent_payload = c.blob(latent_len);
  r.record_crc = c.u32();
  return r;
}

}  // namespace

std::vector<uint8_t> serialize_bitstream(const Bitstream& b) {
  std::vector<uint8_t> out;
  out.insert(out.end(), {'S', 'V', 'B', '1'});
  put_u32(out, b.header.version);
  put_u32(out, b.header.height);
  put_u32(out, b.header.width);
  put_u32(out, b.header.channels);
  put_u32(out, b.header.frame_count);
  put_u32(out, b.header.lambda_id);
  put_f64(out, b.header.q_step);
  put_f64(out, b.header.scale_a);
  put_f64(out, b.header.scale_c);
  out.push_back(b.header.channel_mode);
  put_f64(out, b.header.snr_db);
  put_f64(out, b.header.fading_h);
  put_u64(out, b.header.seed);
  out.push_back(b.header.moe_enabled);
  out.push_back(b.header.intra_only);
  put_record(out, b.background);
  for (const FrameRecord& r : b.frames) put_record(out, r);
  return out;
}

Bitstream parse_bitstream(std::span<const uint8_t> bytes) {
  ByteCursor c{bytes};
  if (bytes.size() < 4 || bytes[0] != 'S' || bytes[1] != 'V' || bytes[2] != 'B' ||
      bytes[3] != '1')
    throw DecodeError("bad magic: not an svb stream");
  c.pos = 4;
  Bitstream b;
  b.header.version = c.u32();
  if (b.header.version != 1) throw DecodeError("unsupported bitstream version");
  b.header.height = c.u32();
  b.header.width = c.u32();
  b.header.channels = c.u32();
  b.header.frame_count = c.u32();
  b.header.lambda_id = c.u32();
  b.header.q_step = c.f64();
  b.header.scale_a = c.f64();
  b.header.scale_c = c.f64();
  b.header.channel_mode = c.u8();
  b.header.snr_db = c.f64();
  b.header.fading_h = c.f64();
  b.header.seed = c.u64();
  b.header.moe_enabled = c.u8();
  b.header.intra_only = c.u8();
  b.background = get_record(c);
  for (uint32_t t = 0; t < b.header.frame_count; ++t) b.frames.push_back(get_record(c));
  return b;
}

void write_bitstream(const Bitstream& b, const std::string& path) {
  std::vector<uint8_t> bytes = serialize_bitstream(b);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Bitstream read_bitstream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return parse_bitstream(bytes);
}

// --- reports ---

Report evaluate(const VideoSequence& original, const VideoSequence& reconstruction,
                const std::vector<uint64_t>& per_frame_bits,
                const std::vector<bool>& concealed) {
  if (original.frame_count() != reconstruction.frame_count())
    throw DimensionError("evaluate: frame count mismatch");
  const Frame& f0 = original.frames.front();
  bool msssim_ok = std::min(f0.height, f0.width) >= 176;
  Report r;
  double psnr_sum = 0.0, ssim_sum = 0.0;
  for (int t = 0; t < original.frame_count(); ++t) {
    FrameMetrics m;
    m.frame = t;
    m.bits = t < static_cast<int>(per_frame_bits.size()) ? per_frame_bits[t] : 0;
    m.psnr_db = psnr(original.frames[t], reconstruction.frames[t]);
    m.ms_ssim = msssim_ok ? ms_ssim(original.frames[t], reconstruction.frames[t]) : -1.0;
    m.concealed = t < static_cast<int>(concealed.size()) && concealed[t];
    psnr_sum += m.psnr_db;
    ssim_sum += m.ms_ssim;
    r.total_bits += m.bits;
    r.frames.push_back(m);
  }
  int t_count = original.frame_count();
  r.cbr = cbr(per_frame_bits, f0.height, f0.width, f0.channels);
  r.mean_psnr = psnr_sum / t_count;
  r.mean_ms_ssim = msssim_ok ? ssim_sum / t_count : -1.0;
  return r;
}

namespace {

CoderParams params_for_lambda(int lambda, const CodecConfig& base, const SimulationGrid& grid) {
  if (grid.params_dir) {
    std::filesystem::path p =
        std::filesystem::path(*grid.params_dir) / ("params_lambda" + std::to_string(lambda) + ".txt");
    if (std::filesystem::exists(p)) return load_params(p.string());
  }
  CoderParams p = default_params(lambda);
  p.scale_a = base.coder.scale_a;
  p.scale_c = base.coder.scale_c;
  return p;
}

Report run_decode(const VideoSequence& v, const EncodeResult& enc, const CodecConfig& cfg,
                  int lambda, ChannelMode mode, double snr_db) {
  Bitstream stream = enc.stream;
  stream.header.channel_mode = static_cast<uint8_t>(mode);
  stream.header.snr_db = snr_db;
  DecodeResult dec = decode_stream(stream, cfg);
  Report r = evaluate(v, dec.reconstruction, enc.per_frame_bits, dec.concealed);
  r.lambda_id = lambda;
  r.snr_db = snr_db;
  r.mode = channel_mode_name(mode);
  return r;
}

}  // namespace

std::vector<Report> simulate(const VideoSequence& v, const CodecConfig& base,
                             const SimulationGrid& grid) {
  std::vector<Report> reports;
  for (int lambda : grid.lambdas) {
    CodecConfig cfg = base;
    cfg.coder = params_for_lambda(lambda, base, grid);
    EncodeResult enc = encode_stream(v, cfg);

    uint64_t moe_off_total = 0;
    if (grid.include_moe_off && base.moe_enabled) {
      CodecConfig off = cfg;
      off.moe_enabled = false;
      EncodeResult enc_off = encode_stream(v, off);
      Report r = run_decode(v, enc_off, off, lambda, ChannelMode::kIdeal, 0.0);
      r.mode = "moe_off";
      moe_off_total = r.total_bits;
      reports.push_back(std::move(r));
    }

    for (ChannelMode mode : grid.modes) {
      if (mode == ChannelMode::kIdeal) {
        Report r = run_decode(v, enc, cfg, lambda, mode, 0.0);
        if (moe_off_total > r.total_bits)
          r.background_bits_saved = moe_off_total - r.total_bits;
        reports.push_back(std::move(r));
      } else {
        for (double snr : grid.snrs_db) {
          Report r = run_decode(v, enc, cfg, lambda, mode, snr);
          if (moe_off_total > r.total_bits)
            r.background_bits_saved = moe_off_total - r.total_bits;
          reports.push_back(std::move(r));
        }
      }
    }

    if (grid.include_intra_baseline) {
      CodecConfig intra = cfg;
      intra.moe_enabled = false;
      intra.intra_only = true;
      EncodeResult enc_intra = encode_stream(v, intra);
      Report r = run_decode(v, enc_intra, intra, lambda, ChannelMode::kIdeal, 0.0);
      r.mode = "intra_baseline";
      reports.push_back(std::move(r));
    }
  }
  return reports;
}

void write_report_csv(const std::vector<Report>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "frame,lambda_id,snr_db,mode,bits,psnr_db,ms_ssim,concealed\n";
  out.precision(10);
  for (const Report& r : reports)
    for (const FrameMetrics& m : r.frames)
      out << m.frame << "," << r.lambda_id << "," << r.snr_db << "," << r.mode << ","
          << m.bits << "," << m.psnr_db << "," << m.ms_ssim << ","
          << (m.concealed ? 1 : 0) << "\n";
}

void write_report_json(const std::vector<Report>& reports, const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const Report& r : reports) {
    nlohmann::json e;
    e["lambda_id"] = r.lambda_id;
    e["snr_db"] = r.snr_db;
    e["mode"] = r.mode;
    e["cbr"] = r.cbr;
    e["cbr_unit"] = "bits";
    e["mean_psnr_db"] = r.mean_psnr;
    e["mean_ms_ssim"] = r.mean_ms_ssim;
    e["total_bits"] = r.total_bits;
    e["background_bits_saved"] = r.background_bits_saved;
    j.push_back(std::move(e));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace semvid
