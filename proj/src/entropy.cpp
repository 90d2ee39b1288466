#include "semvid/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace semvid {

namespace {
constexpr double kScaleMin = 0.05;
constexpr double kScaleMax = 20.0;
constexpr uint32_t kRansLowerBound = 1u << 23;
}  // namespace

double scale_bin_value(int bin) {
  if (bin < 0 || bin >= kScaleBins) throw LogicError("scale bin out of range");
  return kScaleMin * std::pow(kScaleMax / kScaleMin, bin / double(kScaleBins - 1));
}

int quantize_scale(double raw_scale) {
  double s = std::clamp(raw_scale, kScaleMin, kScaleMax);
  double pos = std::log(s / kScaleMin) / std::log(kScaleMax / kScaleMin) * (kScaleBins - 1);
  int bin = static_cast<int>(std::lround(pos));
  return std::clamp(bin, 0, kScaleBins - 1);
}

double ProbabilityTable::entropy_bits() const {
  double h = 0.0;
  for (uint32_t f : freq) {
    double p = f / double(kRansTotal);
    h -= p * std::log2(p);
  }
  return h;
}

ProbabilityTable build_table(int scale_bin) {
  if (scale_bin < 0 || scale_bin >= kScaleBins) throw LogicError("scale bin out of range");
  double b = scale_bin_value(scale_bin);
  // Laplacian mass over [s-0.5, s+0.5].
  std::array<double, kSymbolCount> mass{};
  double total = 0.0;
  for (int s = kSymbolMin; s <= kSymbolMax; ++s) {
    double m;
    if (s == 0) {
      m = 1.0 - std::exp(-0.5 / b);
    } else {
      double a = std::abs(s);
      m = 0.5 * (std::exp(-(a - 0.5) / b) - std::exp(-(a + 0.5) / b));
    }
    mass[s - kSymbolMin] = m;
    total += m;
  }
  ProbabilityTable t;
  t.scale_bin = scale_bin;
  int64_t assigned = 0;
  for (int i = 0; i < kSymbolCount; ++i) {
    uint32_t f = static_cast<uint32_t>(std::llround(mass[i] / total * kRansTotal));
    f = std::max(f, 1u);
    t.freq[i] = f;
    assigned += f;
  }
  // Zero symbol absorbs the rounding deficit/surplus; it always holds the
  // largest mass so this cannot drive it below 1.
  int zero = -kSymbolMin;
  int64_t correction = static_cast<int64_t>(kRansTotal) - assigned;
  if (static_cast<int64_t>(t.freq[zero]) + correction < 1)
    throw LogicError("table normalization failed");
  t.freq[zero] = static_cast<uint32_t>(t.freq[zero] + correction);
  uint32_t c = 0;
  for (int i = 0; i < kSymbolCount; ++i) {
    t.cum[i] = c;
    c += t.freq[i];
  }
  t.cum[kSymbolCount] = c;
  return t;
}

const ProbabilityTable& table_for_bin(int scale_bin) {
  static std::array<ProbabilityTable, kScaleBins> tables = [] {
    std::array<ProbabilityTable, kScaleBins> ts;
    for (int i = 0; i < kScaleBins; ++i) ts[i] = build_table(i);
    return ts;
  }();
  if (scale_bin < 0 || scale_bin >= kScaleBins) throw LogicError("scale bin out of range");
  return tables[scale_bin];
}

CodeWords rans_encode(std::span<const int> symbols, std::span<const uint8_t> bins) {
  if (symbols.size() != bins.size()) throw LogicError("rans_encode: length mismatch");
  uint32_t state = kRansLowerBound;
  std::vector<uint8_t> renorm;
  // LIFO discipline: encode in reverse so the decoder runs forward.
  for (size_t i = symbols.size(); i-- > 0;) {
    int s = symbols[i];
    if (s < kSymbolMin || s > kSymbolMax) throw LogicError("symbol outside alphabet");
    const ProbabilityTable& t = table_for_bin(bins[i]);
    uint32_t f = t.freq[s - kSymbolMin];
    uint32_t c = t.cum[s - kSymbolMin];
    uint32_t x_max = ((kRansLowerBound >> kRansPrecision) << 8) * f;
    while (state >= x_max) {
      renorm.push_back(static_cast<uint8_t>(state & 0xff));
      state >>= 8;
    }
    state = ((state / f) << kRansPrecision) + (state % f) + c;
  }
  CodeWords cw;
  cw.bytes.resize(4 + renorm.size());
  for (int i = 0; i < 4; ++i) cw.bytes[i] = static_cast<uint8_t>((state >> (8 * i)) & 0xff);
  std::copy(renorm.begin(), renorm.end(), cw.bytes.begin() + 4);
  cw.bit_length = 8 * cw.bytes.size();
  cw.symbol_count = symbols.size();
  return cw;
}

std::vector<int> rans_decode(const CodeWords& cw, std::span<const uint8_t> bins, size_t n) {
  if (bins.size() != n) throw LogicError("rans_decode: bins length mismatch");
  if (cw.bytes.size() < 4) throw DecodeError("rans stream too short");
  uint32_t state = 0;
  for (int i = 0; i < 4; ++i) state |= static_cast<uint32_t>(cw.bytes[i]) << (8 * i);
  // Renorm bytes are consumed in reverse emission order.
  size_t pos = cw.bytes.size();
  std::vector<int> out(n);
  for (size_t i = 0; i < n; ++i) {
    const ProbabilityTable& t = table_for_bin(bins[i]);
    uint32_t slot = state & (kRansTotal - 1);
    // cum is strictly increasing; find the symbol owning this slot.
    auto it = std::upper_bound(t.cum.begin(), t.cum.end(), slot);
    int idx = static_cast<int>(it - t.cum.begin()) - 1;
    out[i] = idx + kSymbolMin;
    state = t.freq[idx] * (state >> kRansPrecision) + slot - t.cum[idx];
    while (state < kRansLowerBound) {
      if (pos <= 4) throw DecodeError("rans stream exhausted");
      state = (state << 8) | cw.bytes[--pos];
    }
  }
  return out;
}

static uint64_t exp_golomb_bits(uint64_t v) {
  uint64_t len = 0;
  uint64_t w = v + 1;
  while (w > 1) {
    w >>= 1;
    ++len;
  }
  return 2 * len + 1;
}

double estimate_code_length(std::span<const int> symbols, std::span<const uint8_t> bins) {
  if (symbols.size() != bins.size()) throw LogicError("estimate_code_length: length mismatch");
  double bits = 0.0;
  for (size_t i = 0; i < symbols.size(); ++i) {
    int s = symbols[i];
    uint64_t escape_bits = 0;
    // Every saturated symbol carries an overflow entry (0 = no overflow), so
    // the decoder never has to guess whether +/-51 was escaped.
    if (std::abs(s) >= kSymbolMax) {
      escape_bits = exp_golomb_bits(static_cast<uint64_t>(std::abs(s) - kSymbolMax));
      s = s < 0 ? kSymbolMin : kSymbolMax;
    }
    const ProbabilityTable& t = table_for_bin(bins[i]);
    bits += kRansPrecision - std::log2(double(t.freq[s - kSymbolMin]));
    bits += static_cast<double>(escape_bits);
  }
  return bits;
}

void BitWriter::put_bit(int b) {
  size_t byte = bits_ / 8;
  if (byte >= bytes_.size()) bytes_.push_back(0);
  if (b) bytes_[byte] |= static_cast<uint8_t>(0x80u >> (bits_ % 8));
  ++bits_;
}

void BitWriter::put_exp_golomb(uint64_t v) {
  uint64_t w = v + 1;
  int len = 0;
  while ((w >> (len + 1)) != 0) ++len;
  for (int i = 0; i < len; ++i) put_bit(0);
  for (int i = len; i >= 0; --i) put_bit((w >> i) & 1);
}

std::vector<uint8_t> BitWriter::finish() { return bytes_; }

int BitReader::get_bit() {
  size_t byte = pos_ / 8;
  if (byte >= bytes_.size()) throw DecodeError("bit stream exhausted");
  int b = (bytes_[byte] >> (7 - pos_ % 8)) & 1;
  ++pos_;
  return b;
}

uint64_t BitReader::get_exp_golomb() {
  int len = 0;
  while (get_bit() == 0) {
    if (++len > 63) throw DecodeError("malformed exp-golomb code");
  }
  uint64_t w = 1;
  for (int i = 0; i < len; ++i) w = (w << 1) | static_cast<uint64_t>(get_bit());
  return w - 1;
}

uint32_t crc32(std::span<const uint8_t> data) {
  static const auto table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  uint32_t crc = 0xFFFFFFFFu;
  for (uint8_t b : data) crc = table[(crc ^ b) & 0xff] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

}  // namespace semvid
