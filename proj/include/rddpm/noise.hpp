#ifndef RDDPM_NOISE_HPP
#define RDDPM_NOISE_HPP

#include <span>
#include <utility>

#include "rddpm/image.hpp"
#include "rddpm/rng.hpp"

namespace rddpm {

// Total complex-noise scale: each quadrature component gets sigma / sqrt(2),
// so E[R^2] - S^2 = sigma^2.
struct RicianParams {
    double sigma = 0.0;
    void validate() const;
};

// Noise either synthesized from Gaussian quadrature components or drawn from
// an empirical signal-free noise field.
struct NoiseSource {
    enum class Kind { gaussian, empirical };
    Kind kind = Kind::gaussian;
    RicianParams gaussian;
    Image field;          // empirical only
    bool allow_tiling = false;

    static NoiseSource make_gaussian(double sigma);
    static NoiseSource make_empirical(Image field, bool allow_tiling = false);
};

// R = sqrt((S + n1)^2 + n2^2) with n1, n2 ~ N(0, sigma^2 / 2), independent per pixel.
Image rician_magnitude(const Image& signal, const RicianParams& params, Rng& rng);

// Synthetic sodium image from a T1w image: Gaussian sources delegate to
// rician_magnitude; empirical sources use two independent crops of the noise
// field (scaled by 1/sqrt(2)) as the quadrature components.
Image synth_sodium(const Image& t1w, const NoiseSource& src, Rng& rng);

// Sample mean and unbiased (n-1) variance. Throws on fewer than two samples.
std::pair<double, double> estimate_moments(std::span<const double> samples);

}  // namespace rddpm

#endif  // RDDPM_NOISE_HPP
