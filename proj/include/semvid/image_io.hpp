#pragma once

#include <string>
#include <vector>

#include "semvid/frame.hpp"

namespace semvid {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Binary PPM (P6, maxval 255), samples mapped via v/255.
Frame read_ppm(const std::string& path);
void write_ppm(const Frame& f, const std::string& path);

// Binary PGM (P5, maxval 255), single channel. Used for oracle alpha masks.
Frame read_pgm(const std::string& path);
void write_pgm(const Frame& f, const std::string& path);

// Header-less raw planar 8-bit file; dimensions supplied by the caller.
Frame read_raw(const std::string& path, int height, int width, int channels);

// Directory of numbered PPM files, zero-padded 6-digit indices from 000000.
VideoSequence read_sequence(const std::string& dir, int max_frames = -1);
void write_sequence(const VideoSequence& v, const std::string& dir);

std::string frame_filename(int index);  // "000042.ppm"

// Flow dump: u32 LE height, u32 LE width, then row-major f32 LE (dx, dy) pairs.
void write_flow(const FlowField& flow, const std::string& path);
FlowField read_flow(const std::string& path);

}  // namespace semvid
