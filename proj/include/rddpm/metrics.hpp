#ifndef RDDPM_METRICS_HPP
#define RDDPM_METRICS_HPP

#include <array>
#include <span>

#include "rddpm/image.hpp"

namespace rddpm {

// 10*log10(L^2 / MSE) on [0,1]-range images; +infinity when MSE is zero.
double psnr(const Image& ref, const Image& test);

struct SsimConfig {
    enum class Window { gaussian11, uniform8 };  // 11x11 sd 1.5, or flat 8x8
    Window window = Window::gaussian11;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

// Mean over fully-inside sliding windows of the standard SSIM product.
double ssim(const Image& ref, const Image& test, const SsimConfig& cfg = {});

// Mean-subtracted contrast-normalized coefficients: (I - mu) / (sigma + C)
// with 7x7 Gaussian (sd 7/6) local moments, symmetric-reflect padding, and
// C = 1/255 for the unit intensity range.
Image mscn(const Image& img);

struct AggdParams {
    double alpha;    // shape
    double sigma_l;  // sqrt(E[x^2 | x < 0])
    double sigma_r;  // sqrt(E[x^2 | x > 0])
};

// Moment-matching fit of the asymmetric generalized Gaussian, with the shape
// ratio inverted over a tabulated alpha grid [0.2, 10] in steps of 0.001.
// Needs >= 100 samples containing both signs.
AggdParams aggd_fit(std::span<const double> samples);

// AGGD mean term for the fitted parameters.
double aggd_mean(const AggdParams& p);

// 18 features per scale (original and half resolution), 36 total:
//   [0]  MSCN AGGD alpha
//   [1]  MSCN mean scale, (sigma_l + sigma_r) / 2
//   [2..5]   horizontal-product AGGD: alpha, mean, sigma_l, sigma_r
//   [6..9]   vertical product
//   [10..13] main-diagonal product
//   [14..17] secondary-diagonal product
// Requires at least 32x32 input.
std::array<double, 36> brisque_features(const Image& img);

// 2x2 box-mean downsample (used for the second BRISQUE scale).
Image downsample_half(const Image& img);

}  // namespace rddpm

#endif  // RDDPM_METRICS_HPP
