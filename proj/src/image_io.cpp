#include "rddpm/image_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace rddpm {

static_assert(std::endian::native == std::endian::little,
              "the raw .f64 format is written via memcpy and assumes a little-endian host");

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open for reading");
    return in;
}

}  // namespace

void write_pgm16(const std::string& path, const Image& img) {
    auto out = open_out(path);
    out << "P5\n" << img.width() << " " << img.height() << "\n65535\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(img.width()) * 2);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double v = img.at(y, x);
            v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
            const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
            row[static_cast<std::size_t>(x) * 2] = static_cast<unsigned char>(q >> 8);
            row[static_cast<std::size_t>(x) * 2 + 1] = static_cast<unsigned char>(q & 0xff);
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) fail(path, "write failed");
}

Image read_pgm16(const std::string& path) {
    auto in = open_in(path);
    std::string magic;
    in >> magic;
    if (magic != "P5") fail(path, "not a binary PGM (expected P5)");
    // header tokens may be separated by whitespace or comment lines
    auto next_int = [&](const char* what) {
        for (;;) {
            int ch = in.peek();
            if (ch == '#') {
                std::string line;
                std::getline(in, line);
            } else if (ch != EOF && std::isspace(static_cast<unsigned char>(ch))) {
                in.get();
            } else {
                break;
            }
        }
        long v = -1;
        if (!(in >> v) || v <= 0) fail(path, std::string("bad PGM ") + what);
        return static_cast<int>(v);
    };
    const int w = next_int("width");
    const int h = next_int("height");
    const int maxval = next_int("maxval");
    if (maxval != 65535) fail(path, "expected 16-bit PGM (maxval 65535)");
    in.get();  // single whitespace byte before the raster

    Image img(w, h);
    std::vector<unsigned char> row(static_cast<std::size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!in) fail(path, "truncated PGM raster");
        for (int x = 0; x < w; ++x) {
            const int hi = row[static_cast<std::size_t>(x) * 2];
            const int lo = row[static_cast<std::size_t>(x) * 2 + 1];
            img.at(y, x) = static_cast<double>((hi << 8) | lo) / 65535.0;
        }
    }
    return img;
}

void write_f64(const std::string& path, const Image& img) {
    auto out = open_out(path);
    const std::uint64_t dims[2] = {static_cast<std::uint64_t>(img.width()),
                                   static_cast<std::uint64_t>(img.height())};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(img.data()),
              static_cast<std::streamsize>(img.size() * sizeof(double)));
    if (!out) fail(path, "write failed");
}

Image read_f64(const std::string& path) {
    auto in = open_in(path);
    std::uint64_t dims[2] = {0, 0};
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in) fail(path, "truncated .f64 header");
    if (dims[0] == 0 || dims[1] == 0 || dims[0] > (1u << 20) || dims[1] > (1u << 20))
        fail(path, "implausible .f64 dimensions");
    Image img(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
    in.read(reinterpret_cast<char*>(img.data()),
            static_cast<std::streamsize>(img.size() * sizeof(double)));
    if (!in) fail(path, "truncated .f64 payload");
    return img;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void write_image(const std::string& path, const Image& img) {
    if (ends_with(path, ".pgm"))
        write_pgm16(path, img);
    else if (ends_with(path, ".f64"))
        write_f64(path, img);
    else
        fail(path, "unknown image extension (use .pgm or .f64)");
}

Image read_image(const std::string& path) {
    if (ends_with(path, ".pgm")) return read_pgm16(path);
    if (ends_with(path, ".f64")) return read_f64(path);
    fail(path, "unknown image extension (use .pgm or .f64)");
}

}  // namespace rddpm
