#include "rddpm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rddpm {

namespace {

std::vector<double> gaussian_kernel_2d(int size, double sd) {
    std::vector<double> k(static_cast<std::size_t>(size) * size);
    const int half = size / 2;
    double sum = 0.0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double dy = y - half, dx = x - half;
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sd * sd));
            k[static_cast<std::size_t>(y) * size + x] = v;
            sum += v;
        }
    }
    for (double& v : k) v /= sum;
    return k;
}

// symmetric reflection: index -1 maps to 0, index n maps to n-1
int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
    }
    return i;
}

double ggd_ratio(double alpha) {
    return std::exp(2.0 * std::lgamma(2.0 / alpha) - std::lgamma(1.0 / alpha) -
                    std::lgamma(3.0 / alpha));
}

struct AlphaGrid {
    std::vector<double> alpha, ratio;
    AlphaGrid() {
        for (double a = 0.2; a <= 10.0 + 1e-12; a += 0.001) {
            alpha.push_back(a);
            ratio.push_back(ggd_ratio(a));
        }
    }
};

const AlphaGrid& alpha_grid() {
    static const AlphaGrid grid;
    return grid;
}

AggdParams fit_or_name(std::span<const double> samples, const std::string& stage) {
    try {
        return aggd_fit(samples);
    } catch (const std::exception& e) {
        throw std::runtime_error("brisque_features: " + stage + ": " + e.what());
    }
}

// noinline so both ssim arguments take the identical instruction sequence,
// keeping the score bitwise symmetric
[[gnu::noinline]] void window_moments(const Image& img, int y0, int x0, int k, const double* win,
                                      double& mean, double& variance) {
    double m = 0.0, s = 0.0;
    for (int y = 0; y < k; ++y)
        for (int x = 0; x < k; ++x) {
            const double w = win[static_cast<std::size_t>(y) * k + x];
            const double v = img.at(y0 + y, x0 + x);
            m += w * v;
            s += w * v * v;
        }
    mean = m;
    variance = s - m * m;
}

}  // namespace

double psnr(const Image& ref, const Image& test) {
    require_same_shape(ref, test, "psnr");
    const double m = mse(ref, test);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(m);
}

double ssim(const Image& ref, const Image& test, const SsimConfig& cfg) {
    require_same_shape(ref, test, "ssim");
    const int k = cfg.window == SsimConfig::Window::gaussian11 ? 11 : 8;
    if (ref.width() < k || ref.height() < k)
        throw std::invalid_argument("ssim: image smaller than the " + std::to_string(k) +
                                    "x" + std::to_string(k) + " window");

    std::vector<double> win;
    if (cfg.window == SsimConfig::Window::gaussian11) {
        win = gaussian_kernel_2d(11, 1.5);
    } else {
        win.assign(64, 1.0 / 64.0);
    }

    const double c1 = cfg.k1 * cfg.dynamic_range * cfg.k1 * cfg.dynamic_range;
    const double c2 = cfg.k2 * cfg.dynamic_range * cfg.k2 * cfg.dynamic_range;

    double total = 0.0;
    std::size_t windows = 0;
    for (int y0 = 0; y0 + k <= ref.height(); ++y0) {
        for (int x0 = 0; x0 + k <= ref.width(); ++x0) {
            // both images go through the same moment routine, and the squared
            // means are order-normalized, so the score is exactly symmetric
            double mx, my, vx, vy;
            window_moments(ref, y0, x0, k, win.data(), mx, vx);
            window_moments(test, y0, x0, k, win.data(), my, vy);
            double sxy = 0.0;
            for (int y = 0; y < k; ++y)
                for (int x = 0; x < k; ++x)
                    sxy += win[static_cast<std::size_t>(y) * k + x] *
                           (ref.at(y0 + y, x0 + x) * test.at(y0 + y, x0 + x));
            const double cov = sxy - mx * my;
            const double qlo = std::min(mx * mx, my * my);
            const double qhi = std::max(mx * mx, my * my);
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                     ((qlo + qhi + c1) * (vx + vy + c2));
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

Image mscn(const Image& img) {
    constexpr int kSize = 7;
    constexpr double kC = 1.0 / 255.0;
    static const std::vector<double> kernel = gaussian_kernel_2d(kSize, 7.0 / 6.0);

    const int w = img.width(), h = img.height();
    Image out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double mu = 0.0, mu2 = 0.0;
            for (int ky = 0; ky < kSize; ++ky) {
                const int sy = reflect(y + ky - kSize / 2, h);
                for (int kx = 0; kx < kSize; ++kx) {
                    const int sx = reflect(x + kx - kSize / 2, w);
                    const double kw = kernel[static_cast<std::size_t>(ky) * kSize + kx];
                    const double v = img.at(sy, sx);
                    mu += kw * v;
                    mu2 += kw * v * v;
                }
            }
            const double sigma = std::sqrt(std::max(mu2 - mu * mu, 0.0));
            out.at(y, x) = (img.at(y, x) - mu) / (sigma + kC);
        }
    }
    return out;
}

AggdParams aggd_fit(std::span<const double> samples) {
    if (samples.size() < 100)
        throw std::invalid_argument("aggd_fit: need at least 100 samples");

    double neg_sq = 0.0, pos_sq = 0.0, abs_sum = 0.0, sq_sum = 0.0;
    std::size_t neg_n = 0, pos_n = 0;
    for (double s : samples) {
        if (s < 0.0) {
            neg_sq += s * s;
            ++neg_n;
        } else if (s > 0.0) {
            pos_sq += s * s;
            ++pos_n;
        }
        abs_sum += std::abs(s);
        sq_sum += s * s;
    }
    if (neg_n == 0 || pos_n == 0)
        throw std::invalid_argument("aggd_fit: samples must contain both signs");

    const double n = static_cast<double>(samples.size());
    const double sigma_l = std::sqrt(neg_sq / static_cast<double>(neg_n));
    const double sigma_r = std::sqrt(pos_sq / static_cast<double>(pos_n));
    const double gamma_hat = sigma_l / sigma_r;
    const double r_hat = (abs_sum / n) * (abs_sum / n) / (sq_sum / n);
    const double g2 = gamma_hat * gamma_hat;
    const double r_norm = r_hat * (gamma_hat * g2 + 1.0) * (gamma_hat + 1.0) /
                          ((g2 + 1.0) * (g2 + 1.0));

    const AlphaGrid& grid = alpha_grid();
    std::size_t best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.alpha.size(); ++i) {
        const double d = grid.ratio[i] - r_norm;
        if (d * d < best_err) {
            best_err = d * d;
            best = i;
        }
    }
    return {grid.alpha[best], sigma_l, sigma_r};
}

double aggd_mean(const AggdParams& p) {
    const double a = p.alpha;
    return (p.sigma_r - p.sigma_l) * std::exp(std::lgamma(2.0 / a) - std::lgamma(1.0 / a)) *
           std::sqrt(std::exp(std::lgamma(1.0 / a) - std::lgamma(3.0 / a)));
}

Image downsample_half(const Image& img) {
    const int w = img.width() / 2, h = img.height() / 2;
    Image out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(y, x) = 0.25 * (img.at(2 * y, 2 * x) + img.at(2 * y, 2 * x + 1) +
                                   img.at(2 * y + 1, 2 * x) + img.at(2 * y + 1, 2 * x + 1));
    return out;
}

std::array<double, 36> brisque_features(const Image& img) {
    if (img.width() < 32 || img.height() < 32)
        throw std::invalid_argument("brisque_features: image must be at least 32x32");

    std::array<double, 36> feat{};
    Image scaled = img;
    for (int scale = 0; scale < 2; ++scale) {
        if (scale == 1) scaled = downsample_half(scaled);
        const Image m = mscn(scaled);
        const int w = m.width(), h = m.height();
        double* out = feat.data() + scale * 18;

        const std::string tag = "scale " + std::to_string(scale);
        {
            const AggdParams p =
                fit_or_name(std::span<const double>(m.data(), m.size()), tag + " mscn fit");
            out[0] = p.alpha;
            out[1] = 0.5 * (p.sigma_l + p.sigma_r);
        }

        // order: horizontal, vertical, main diagonal, secondary diagonal
        const int dy[4] = {0, 1, 1, 1};
        const int dx[4] = {1, 0, 1, -1};
        const char* names[4] = {"horizontal", "vertical", "diagonal", "anti-diagonal"};
        for (int o = 0; o < 4; ++o) {
            std::vector<double> prod;
            prod.reserve(m.size());
            for (int y = 0; y + dy[o] < h; ++y) {
                const int x_begin = dx[o] < 0 ? 1 : 0;
                const int x_end = dx[o] > 0 ? w - 1 : w;
                for (int x = x_begin; x < x_end; ++x)
                    prod.push_back(m.at(y, x) * m.at(y + dy[o], x + dx[o]));
            }
            const AggdParams p =
                fit_or_name(prod, tag + " " + names[o] + " product fit");
            out[2 + 4 * o + 0] = p.alpha;
            out[2 + 4 * o + 1] = aggd_mean(p);
            out[2 + 4 * o + 2] = p.sigma_l;
            out[2 + 4 * o + 3] = p.sigma_r;
        }
    }
    return feat;
}

}  // namespace rddpm
