#include "semvid/link.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <set>

#include "semvid/entropy.hpp"

namespace semvid {

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}
void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
uint32_t get_u32(std::span<const uint8_t> b, size_t pos) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[pos + i]) << (8 * i);
  return v;
}
uint16_t get_u16(std::span<const uint8_t> b, size_t pos) {
  return static_cast<uint16_t>(b[pos] | (b[pos + 1] << 8));
}

std::vector<uint8_t> header_and_payload(const Packet& p) {
  std::vector<uint8_t> out;
  put_u32(out, p.stream_id);
  put_u32(out, p.frame_index);
  put_u16(out, p.fragment_index);
  put_u16(out, p.fragment_count);
  out.insert(out.end(), p.payload.begin(), p.payload.end());
  return out;
}

}  // namespace

uint32_t packet_crc(const Packet& p) { return crc32(header_and_payload(p)); }

std::vector<uint8_t> serialize_packet(const Packet& p) {
  std::vector<uint8_t> out = header_and_payload(p);
  put_u32(out, p.crc);
  return out;
}

std::optional<Packet> parse_packet(std::span<const uint8_t> bytes) {
  if (bytes.size() < kPacketHeaderSize) return std::nullopt;
  Packet p;
  p.stream_id = get_u32(bytes, 0);
  p.frame_index = get_u32(bytes, 4);
  p.fragment_index = get_u16(bytes, 8);
  p.fragment_count = get_u16(bytes, 10);
  p.payload.assign(bytes.begin() + 12, bytes.end() - 4);
  p.crc = get_u32(bytes, bytes.size() - 4);
  if (packet_crc(p) != p.crc) return std::nullopt;
  return p;
}

std::vector<Packet> packetize(std::span<const uint8_t> frame_record, uint32_t stream_id,
                              uint32_t frame_index, size_t mtu) {
  if (mtu <= kPacketHeaderSize) throw LogicError("packetize: mtu too small");
  size_t chunk = mtu - kPacketHeaderSize;
  size_t count = frame_record.empty() ? 1 : (frame_record.size() + chunk - 1) / chunk;
  if (count > 0xFFFF) throw LogicError("packetize: record too large for fragment index");
  std::vector<Packet> packets;
  for (size_t i = 0; i < count; ++i) {
    Packet p;
    p.stream_id = stream_id;
    p.frame_index = frame_index;
    p.fragment_index = static_cast<uint16_t>(i);
    p.fragment_count = static_cast<uint16_t>(count);
    size_t begin = i * chunk;
    size_t end = std::min(frame_record.size(), begin + chunk);
    p.payload.assign(frame_record.begin() + begin, frame_record.begin() + end);
    p.crc = packet_crc(p);
    packets.push_back(std::move(p));
  }
  return packets;
}

ReassemblyResult depacketize(const std::vector<Packet>& packets, uint32_t frame_index) {
  std::map<uint16_t, const Packet*> fragments;
  uint16_t count = 0;
  for (const Packet& p : packets) {
    if (p.frame_index != frame_index) continue;
    if (packet_crc(p) != p.crc) continue;
    count = std::max(count, p.fragment_count);
    if (p.fragment_index >= p.fragment_count) continue;
    fragments.emplace(p.fragment_index, &p);  // duplicates ignored
  }
  ReassemblyResult result;
  if (count == 0 || fragments.size() < count) {
    result.loss = LossReport{frame_index, static_cast<uint16_t>(fragments.size()), count};
    return result;
  }
  std::vector<uint8_t> record;
  for (uint16_t i = 0; i < count; ++i) {
    const Packet* p = fragments.at(i);
    record.insert(record.end(), p->payload.begin(), p->payload.end());
  }
  result.record = std::move(record);
  return result;
}

std::vector<Packet> LossyLink::deliver(const std::vector<Packet>& packets) {
  std::vector<Packet> out;
  for (const Packet& p : packets)
    if (rng_.uniform() >= drop_probability_) out.push_back(p);
  return out;
}

UdpSender::UdpSender(const std::string& host, uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw ConfigError("cannot create UDP socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    hostent* he = ::gethostbyname(host.c_str());
    if (!he) {
      ::close(fd_);
      throw ConfigError("cannot resolve host " + host);
    }
    std::memcpy(&addr.sin_addr, he->h_addr, sizeof(addr.sin_addr));
  }
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd_);
    throw ConfigError("cannot connect UDP socket");
  }
}

UdpSender::~UdpSender() {
  if (fd_ >= 0) ::close(fd_);
}

void UdpSender::send(const Packet& p) {
  std::vector<uint8_t> bytes = serialize_packet(p);
  if (::send(fd_, bytes.data(), bytes.size(), 0) < 0)
    throw ConfigError("UDP send failed");
}

UdpReceiver::UdpReceiver(uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw ConfigError("cannot create UDP socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd_);
    throw ConfigError("cannot bind UDP port " + std::to_string(port));
  }
}

UdpReceiver::~UdpReceiver() {
  if (fd_ >= 0) ::close(fd_);
}

std::optional<Packet> UdpReceiver::receive(int timeout_ms) {
  pollfd pfd{fd_, POLLIN, 0};
  int rc = ::poll(&pfd, 1, timeout_ms);
  if (rc <= 0) return std::nullopt;
  std::vector<uint8_t> buf(65536);
  ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
  if (n < static_cast<ssize_t>(kPacketHeaderSize)) return std::nullopt;
  buf.resize(static_cast<size_t>(n));
  return parse_packet(buf);
}

}  // namespace semvid
