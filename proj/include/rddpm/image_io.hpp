#ifndef RDDPM_IMAGE_IO_HPP
#define RDDPM_IMAGE_IO_HPP

#include <string>

#include "rddpm/image.hpp"

namespace rddpm {

// 16-bit binary PGM (P5, maxval 65535, big-endian samples). Values are
// clamped to [0,1] and scaled on write, mapped back to [0,1] on read.
void write_pgm16(const std::string& path, const Image& img);
Image read_pgm16(const std::string& path);

// Lossless raw format: two little-endian uint64 header words (width, height)
// followed by row-major little-endian binary64 samples.
void write_f64(const std::string& path, const Image& img);
Image read_f64(const std::string& path);

// Dispatches on the file extension (".pgm" or ".f64").
void write_image(const std::string& path, const Image& img);
Image read_image(const std::string& path);

}  // namespace rddpm

#endif  // RDDPM_IMAGE_IO_HPP
