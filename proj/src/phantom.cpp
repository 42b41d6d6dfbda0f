#include "rddpm/phantom.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rddpm {

void PhantomSpec::validate() const {
    if (size < 32) throw std::invalid_argument("PhantomSpec: size must be at least 32");
    if (min_shapes < 1 || max_shapes < min_shapes)
        throw std::invalid_argument("PhantomSpec: shape count range must satisfy 1 <= min <= max");
    if (!(min_intensity >= 0.0 && max_intensity <= 1.0 && min_intensity <= max_intensity))
        throw std::invalid_argument("PhantomSpec: intensity range must lie within [0,1]");
}

std::uint64_t phantom_image_seed(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t state = master_seed ^ 0x7061696e7465720aULL;
    splitmix64(state);
    state ^= index;
    std::uint64_t out = splitmix64(state);
    return splitmix64(out);
}

namespace {

struct Shape {
    bool ellipse;
    double cx, cy;      // center, pixel units
    double ax, ay;      // semi-axes, pixel units
    double cosr, sinr;  // rotation
    double intensity;
    double softness;    // edge half-width in pixels

    // signed coverage in [0,1]: 1 deep inside, 0 outside, smooth across the edge
    double coverage(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        const double u = (dx * cosr + dy * sinr) / ax;
        const double v = (-dx * sinr + dy * cosr) / ay;
        // normalized boundary distance: d = 1 on the outline
        double d;
        if (ellipse) {
            d = std::sqrt(u * u + v * v);
        } else {
            d = std::max(std::abs(u), std::abs(v));
        }
        // convert the normalized distance to an approximate pixel distance
        const double scale = std::min(ax, ay);
        const double px = (d - 1.0) * scale;
        if (px <= -softness) return 1.0;
        if (px >= softness) return 0.0;
        const double s = px / softness;  // -1..1 across the edge
        return 0.5 - 0.5 * std::sin(0.5 * 3.14159265358979323846 * s);
    }
};

}  // namespace

Image render_phantom(const PhantomSpec& spec, std::uint64_t index) {
    spec.validate();
    Rng rng(phantom_image_seed(spec.seed, index));
    const int n = spec.size;

    const int count =
        spec.min_shapes + static_cast<int>(rng.below(static_cast<std::uint64_t>(
                              spec.max_shapes - spec.min_shapes + 1)));
    std::vector<Shape> shapes(static_cast<std::size_t>(count));
    for (auto& s : shapes) {
        s.ellipse = rng.uniform() < 0.5;
        s.cx = (0.2 + 0.6 * rng.uniform()) * n;
        s.cy = (0.2 + 0.6 * rng.uniform()) * n;
        s.ax = (0.08 + 0.27 * rng.uniform()) * n;
        s.ay = (0.08 + 0.27 * rng.uniform()) * n;
        const double rot = rng.uniform() * 3.14159265358979323846;
        s.cosr = std::cos(rot);
        s.sinr = std::sin(rot);
        s.intensity =
            spec.min_intensity + (spec.max_intensity - spec.min_intensity) * rng.uniform();
        s.softness = 0.75 + 1.5 * rng.uniform();
    }

    const double background = 0.02 + 0.04 * rng.uniform();
    Image img(n, n, background);
    // 4x4 supersampling for anti-aliased edges
    constexpr int ss = 4;
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int sy = 0; sy < ss; ++sy) {
                for (int sx = 0; sx < ss; ++sx) {
                    const double px = x + (sx + 0.5) / ss;
                    const double py = y + (sy + 0.5) / ss;
                    double v = background;
                    for (const auto& s : shapes) {
                        const double c = s.coverage(px, py);
                        v = v + c * (s.intensity - v);  // paint over
                    }
                    acc += v;
                }
            }
            img.at(y, x) = acc / (ss * ss);
        }
    }
    img.clamp(0.0, 1.0);
    return img;
}

}  // namespace rddpm
