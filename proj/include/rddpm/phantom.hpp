#ifndef RDDPM_PHANTOM_HPP
#define RDDPM_PHANTOM_HPP

#include <cstdint>

#include "rddpm/image.hpp"
#include "rddpm/rng.hpp"

namespace rddpm {

// Random smooth test images: a handful of rotated ellipses and rectangles
// with anti-aliased edges on a dark background, standing in for anatomy.
struct PhantomSpec {
    int size = 64;
    int min_shapes = 3;
    int max_shapes = 8;
    double min_intensity = 0.15;
    double max_intensity = 0.95;
    std::uint64_t seed = 0;

    void validate() const;
};

// Deterministic per-image stream: image `index` depends only on (seed, index).
std::uint64_t phantom_image_seed(std::uint64_t master_seed, std::uint64_t index);

Image render_phantom(const PhantomSpec& spec, std::uint64_t index);

}  // namespace rddpm

#endif  // RDDPM_PHANTOM_HPP
