#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semvid/channel.hpp"

namespace semvid {

constexpr size_t kPacketHeaderSize = 16;  // 4+4+2+2 header fields + 4 crc
constexpr size_t kDefaultMtu = 1200;

struct Packet {
  uint32_t stream_id = 0;
  uint32_t frame_index = 0;
  uint16_t fragment_index = 0;
  uint16_t fragment_count = 0;
  std::vector<uint8_t> payload;  // <= mtu - 16 bytes
  uint32_t crc = 0;              // over header fields + payload
};

uint32_t packet_crc(const Packet& p);

std::vector<uint8_t> serialize_packet(const Packet& p);
std::optional<Packet> parse_packet(std::span<const uint8_t> bytes);  // nullopt on bad CRC

std::vector<Packet> packetize(std::span<const uint8_t> frame_record, uint32_t stream_id,
                              uint32_t frame_index, size_t mtu = kDefaultMtu);

struct LossReport {
  uint32_t frame_index = 0;
  uint16_t fragments_received = 0;
  uint16_t fragment_count = 0;
};

struct ReassemblyResult {
  std::optional<std::vector<uint8_t>> record;  // set when complete
  std::optional<LossReport> loss;              // set when fragments are missing
};

// Reassembles one frame from whatever packets arrived for it. Duplicates
// are ignored, out-of-order tolerated, bad-CRC packets dropped.
ReassemblyResult depacketize(const std::vector<Packet>& packets, uint32_t frame_index);

// In-memory link with seeded independent packet drops.
class LossyLink {
 public:
  LossyLink(double drop_probability, uint64_t seed)
      : drop_probability_(drop_probability), rng_(seed, 0) {}

  // Returns the surviving packets in arrival order.
  std::vector<Packet> deliver(const std::vector<Packet>& packets);

 private:
  double drop_probability_;
  NoiseStream rng_;
};

// Blocking UDP transport; packet layout as serialize_packet, little-endian.
class UdpSender {
 public:
  UdpSender(const std::string& host, uint16_t port);
  ~UdpSender();
  void send(const Packet& p);

 private:
  int fd_ = -1;
};

class UdpReceiver {
 public:
  explicit UdpReceiver(uint16_t port);
  ~UdpReceiver();
  // Waits up to timeout_ms for one packet; nullopt on timeout or bad CRC.
  std::optional<Packet> receive(int timeout_ms);

 private:
  int fd_ = -1;
};

}  // namespace semvid
