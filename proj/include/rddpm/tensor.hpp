#ifndef RDDPM_TENSOR_HPP
#define RDDPM_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rddpm/image.hpp"

namespace rddpm {

// Dense NCHW tensor of doubles.
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_, double fill = 0.0)
        : n(n_), c(c_), h(h_), w(w_), v(count(n_, c_, h_, w_), fill) {}

    static std::size_t count(int n, int c, int h, int w) {
        if (n <= 0 || c <= 0 || h <= 0 || w <= 0)
            throw std::invalid_argument("Tensor4: dimensions must be positive");
        return static_cast<std::size_t>(n) * c * h * w;
    }

    std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
    std::size_t size() const { return v.size(); }

    double* slice(int in, int ic) {
        return v.data() + (static_cast<std::size_t>(in) * c + ic) * plane();
    }
    const double* slice(int in, int ic) const {
        return v.data() + (static_cast<std::size_t>(in) * c + ic) * plane();
    }

    bool same_shape(const Tensor4& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

inline Tensor4 to_tensor(const Image& img) {
    Tensor4 t(1, 1, img.height(), img.width());
    std::copy(img.data(), img.data() + img.size(), t.v.begin());
    return t;
}

inline Tensor4 to_tensor(const std::vector<Image>& batch) {
    if (batch.empty()) throw std::invalid_argument("to_tensor: empty batch");
    Tensor4 t(static_cast<int>(batch.size()), 1, batch[0].height(), batch[0].width());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        require_same_shape(batch[0], batch[i], "to_tensor");
        std::copy(batch[i].data(), batch[i].data() + batch[i].size(),
                  t.v.begin() + i * t.plane());
    }
    return t;
}

inline Image to_image(const Tensor4& t, int item = 0) {
    if (t.c != 1) throw std::invalid_argument("to_image: tensor must have one channel");
    Image img(t.w, t.h);
    std::copy(t.slice(item, 0), t.slice(item, 0) + t.plane(), img.data());
    return img;
}

}  // namespace rddpm

#endif  // RDDPM_TENSOR_HPP
