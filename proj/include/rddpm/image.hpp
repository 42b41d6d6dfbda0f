#ifndef RDDPM_IMAGE_HPP
#define RDDPM_IMAGE_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rddpm {

// Single-channel 2D image, row-major doubles.
class Image {
public:
    Image() = default;
    Image(int width, int height, double fill = 0.0)
        : width_(width), height_(height), pix_(static_cast<std::size_t>(width) * height, fill) {
        if (width <= 0 || height <= 0)
            throw std::invalid_argument("Image: dimensions must be positive");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return pix_.size(); }
    bool empty() const { return pix_.empty(); }

    double& at(int y, int x) { return pix_[static_cast<std::size_t>(y) * width_ + x]; }
    double at(int y, int x) const { return pix_[static_cast<std::size_t>(y) * width_ + x]; }
    double& operator[](std::size_t i) { return pix_[i]; }
    double operator[](std::size_t i) const { return pix_[i]; }

    double* data() { return pix_.data(); }
    const double* data() const { return pix_.data(); }

    bool same_shape(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool all_finite() const {
        for (double v : pix_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Image& apply(double (*f)(double)) {
        for (double& v : pix_) v = f(v);
        return *this;
    }

    Image squared() const {
        Image out = *this;
        for (double& v : out.pix_) v *= v;
        return out;
    }

    Image& clamp(double lo, double hi) {
        for (double& v : pix_) v = v < lo ? lo : (v > hi ? hi : v);
        return *this;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> pix_;
};

inline void require_same_shape(const Image& a, const Image& b, const std::string& where) {
    if (!a.same_shape(b))
        throw std::invalid_argument(where + ": image shapes differ (" + std::to_string(a.width()) +
                                    "x" + std::to_string(a.height()) + " vs " +
                                    std::to_string(b.width()) + "x" + std::to_string(b.height()) +
                                    ")");
}

inline double mse(const Image& a, const Image& b) {
    require_same_shape(a, b, "mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

inline double max_abs_diff(const Image& a, const Image& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace rddpm

#endif  // RDDPM_IMAGE_HPP
