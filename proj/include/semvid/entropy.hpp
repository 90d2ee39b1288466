#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semvid {

struct LogicError : std::logic_error {
  explicit LogicError(const std::string& what) : std::logic_error(what) {}
};
struct DecodeError : std::runtime_error {
  explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

// Code-word space: 64 scale bins x 103 symbols, alphabet [-51, 51].
constexpr int kSymbolMin = -51;
constexpr int kSymbolMax = 51;
constexpr int kSymbolCount = 103;
constexpr int kScaleBins = 64;
constexpr int kRansPrecision = 16;
constexpr uint32_t kRansTotal = 1u << kRansPrecision;

// Logarithmic scale grid over [0.05, 20] in symbol units.
double scale_bin_value(int bin);
// Nearest bin (in log domain) for a raw scale; input clamped to the grid range.
int quantize_scale(double raw_scale);

// Discretized Laplacian over the alphabet, normalized to 2^16 with every
// frequency >= 1; rounding deficit/surplus absorbed by the zero symbol.
struct ProbabilityTable {
  int scale_bin = 0;
  std::array<uint32_t, kSymbolCount> freq{};
  std::array<uint32_t, kSymbolCount + 1> cum{};  // cum[kSymbolCount] == 2^16

  uint32_t frequency(int symbol) const { return freq[symbol - kSymbolMin]; }
  double entropy_bits() const;  // Shannon entropy of the table, bits/symbol
};

ProbabilityTable build_table(int scale_bin);
const ProbabilityTable& table_for_bin(int scale_bin);  // cached, immutable

struct CodeWords {
  std::vector<uint8_t> bytes;
  uint64_t bit_length = 0;
  uint64_t symbol_count = 0;
};

// Symbols must already be inside [-51, 51]; escape substitution is the
// caller's job. Encoding runs in reverse symbol order so decode is forward.
CodeWords rans_encode(std::span<const int> symbols, std::span<const uint8_t> bins);
std::vector<int> rans_decode(const CodeWords& cw, std::span<const uint8_t> bins, size_t n);

// Shannon estimate of the coded length in bits, including escape accounting
// for out-of-alphabet symbols (clamped symbol + Exp-Golomb overflow).
double estimate_code_length(std::span<const int> symbols, std::span<const uint8_t> bins);

// MSB-first bit writer/reader used by the Exp-Golomb side channels.
class BitWriter {
 public:
  void put_bit(int b);
  void put_exp_golomb(uint64_t v);  // order k=0
  std::vector<uint8_t> finish();    // pads to a byte boundary with zeros
  uint64_t bit_count() const { return bits_; }

 private:
  std::vector<uint8_t> bytes_;
  uint64_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}
  int get_bit();
  uint64_t get_exp_golomb();

 private:
  std::span<const uint8_t> bytes_;
  uint64_t pos_ = 0;
};

uint32_t crc32(std::span<const uint8_t> data);

}  // namespace semvid
