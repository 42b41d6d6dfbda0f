#include "rddpm/noise.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rddpm {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Random crop of the field (wrapping when tiling is allowed), then an
// independent pixel shuffle. The shuffle makes two draws from the same field
// usable as independent quadrature components.
Image draw_noise_component(const Image& field, int w, int h, bool allow_tiling, Rng& rng) {
    Image out(w, h);
    if (field.width() >= w && field.height() >= h) {
        const int ox = static_cast<int>(rng.below(field.width() - w + 1));
        const int oy = static_cast<int>(rng.below(field.height() - h + 1));
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.at(y, x) = field.at(oy + y, ox + x);
    } else if (allow_tiling) {
        const int ox = static_cast<int>(rng.below(field.width()));
        const int oy = static_cast<int>(rng.below(field.height()));
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(y, x) = field.at((oy + y) % field.height(), (ox + x) % field.width());
    } else {
        throw std::invalid_argument(
            "synth_sodium: empirical noise field is smaller than the image and tiling is "
            "disabled");
    }
    // Fisher-Yates
    for (std::size_t i = out.size() - 1; i > 0; --i) {
        const std::size_t j = rng.below(i + 1);
        std::swap(out[i], out[j]);
    }
    return out;
}

}  // namespace

void RicianParams::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("RicianParams: sigma must be finite and non-negative");
}

NoiseSource NoiseSource::make_gaussian(double sigma) {
    NoiseSource src;
    src.kind = Kind::gaussian;
    src.gaussian.sigma = sigma;
    src.gaussian.validate();
    return src;
}

NoiseSource NoiseSource::make_empirical(Image field, bool allow_tiling) {
    if (field.empty()) throw std::invalid_argument("NoiseSource: empirical field is empty");
    if (!field.all_finite())
        throw std::invalid_argument("NoiseSource: empirical field has non-finite values");
    NoiseSource src;
    src.kind = Kind::empirical;
    src.field = std::move(field);
    src.allow_tiling = allow_tiling;
    return src;
}

Image rician_magnitude(const Image& signal, const RicianParams& params, Rng& rng) {
    params.validate();
    if (!signal.all_finite())
        throw std::invalid_argument("rician_magnitude: signal has non-finite values");
    const double comp_sd = params.sigma * kInvSqrt2;
    Image out(signal.width(), signal.height());
    for (std::size_t i = 0; i < signal.size(); ++i) {
        const double n1 = rng.normal() * comp_sd;
        const double n2 = rng.normal() * comp_sd;
        const double re = signal[i] + n1;
        out[i] = std::sqrt(re * re + n2 * n2);
    }
    return out;
}

Image synth_sodium(const Image& t1w, const NoiseSource& src, Rng& rng) {
    for (std::size_t i = 0; i < t1w.size(); ++i)
        if (!(t1w[i] >= 0.0 && t1w[i] <= 1.0))
            throw std::invalid_argument("synth_sodium: t1w values must lie in [0,1]");

    if (src.kind == NoiseSource::Kind::gaussian)
        return rician_magnitude(t1w, src.gaussian, rng);

    const Image c1 = draw_noise_component(src.field, t1w.width(), t1w.height(), src.allow_tiling, rng);
    const Image c2 = draw_noise_component(src.field, t1w.width(), t1w.height(), src.allow_tiling, rng);
    Image out(t1w.width(), t1w.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double re = t1w[i] + c1[i] * kInvSqrt2;
        const double im = c2[i] * kInvSqrt2;
        out[i] = std::sqrt(re * re + im * im);
    }
    return out;
}

std::pair<double, double> estimate_moments(std::span<const double> samples) {
    if (samples.size() < 2)
        throw std::invalid_argument("estimate_moments: need at least two samples");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= n - 1.0;
    return {mean, var};
}

}  // namespace rddpm
