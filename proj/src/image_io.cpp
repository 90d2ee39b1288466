#include "semvid/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace semvid {

namespace {

int read_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments per the PNM grammar.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  int value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw IoError("malformed PNM header");
  return value;
}

Frame read_pnm(const std::string& path, const char* magic, int channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char m[2];
  in.read(m, 2);
  if (!in || m[0] != magic[0] || m[1] != magic[1])
    throw IoError(path + ": expected " + magic);
  int w = read_pnm_token(in);
  int h = read_pnm_token(in);
  int maxval = read_pnm_token(in);
  if (maxval != 255) throw IoError(path + ": only maxval 255 supported");
  std::vector<uint8_t> raw(static_cast<size_t>(h) * w * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw IoError(path + ": truncated pixel data");
  Frame f(h, w, channels);
  for (size_t i = 0; i < raw.size(); ++i) f.data[i] = raw[i] / 255.0;
  return f;
}

void write_pnm(const Frame& f, const std::string& path, const char* magic, int channels) {
  if (f.channels != channels) throw IoError("channel count does not match format");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << magic << "\n" << f.width << " " << f.height << "\n255\n";
  std::vector<uint8_t> raw(f.data.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    double v = std::clamp(f.data[i], 0.0, 1.0);
    raw[i] = static_cast<uint8_t>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

}  // namespace

Frame read_ppm(const std::string& path) { return read_pnm(path, "P6", 3); }
void write_ppm(const Frame& f, const std::string& path) { write_pnm(f, path, "P6", 3); }
Frame read_pgm(const std::string& path) { return read_pnm(path, "P5", 1); }
void write_pgm(const Frame& f, const std::string& path) { write_pnm(f, path, "P5", 1); }

Frame read_raw(const std::string& path, int height, int width, int channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<uint8_t> raw(static_cast<size_t>(height) * width * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw IoError(path + ": truncated raw data");
  Frame f(height, width, channels);
  // Planar layout: all of channel 0, then channel 1, ...
  size_t plane = static_cast<size_t>(height) * width;
  for (int c = 0; c < channels; ++c)
    for (size_t p = 0; p < plane; ++p)
      f.data[p * channels + c] = raw[c * plane + p] / 255.0;
  return f;
}

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d.ppm", index);
  return buf;
}

VideoSequence read_sequence(const std::string& dir, int max_frames) {
  VideoSequence v;
  for (int i = 0; max_frames < 0 || i < max_frames; ++i) {
    std::filesystem::path p = std::filesystem::path(dir) / frame_filename(i);
    if (!std::filesystem::exists(p)) break;
    v.frames.push_back(read_ppm(p.string()));
  }
  if (v.frames.empty()) throw IoError("no frames found in " + dir);
  v.validate();
  return v;
}

void write_sequence(const VideoSequence& v, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < v.frame_count(); ++i) {
    std::filesystem::path p = std::filesystem::path(dir) / frame_filename(i);
    write_ppm(v.frames[i], p.string());
  }
}

void write_flow(const FlowField& flow, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  uint32_t h = flow.height, w = flow.width;
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  for (double d : flow.data) {
    float f = static_cast<float>(d);
    out.write(reinterpret_cast<const char*>(&f), 4);
  }
}

FlowField read_flow(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  uint32_t h = 0, w = 0;
  in.read(reinterpret_cast<char*>(&h), 4);
  in.read(reinterpret_cast<char*>(&w), 4);
  FlowField flow(static_cast<int>(h), static_cast<int>(w));
  for (double& d : flow.data) {
    float f = 0;
    in.read(reinterpret_cast<char*>(&f), 4);
    d = f;
  }
  if (!in) throw IoError(path + ": truncated flow data");
  return flow;
}

}  // namespace semvid
