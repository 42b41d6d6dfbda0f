#include "rddpm/net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rddpm {

namespace {

// out[y][x] += sum_k k9[ky*3+kx] * in[y+ky-1][x+kx-1], zero padding.
void conv3x3_acc(const double* in, int h, int w, const double* k, double* out) {
    for (int y = 0; y < h; ++y) {
        const double* top = y > 0 ? in + static_cast<std::size_t>(y - 1) * w : nullptr;
        const double* mid = in + static_cast<std::size_t>(y) * w;
        const double* bot = y < h - 1 ? in + static_cast<std::size_t>(y + 1) * w : nullptr;
        double* dst = out + static_cast<std::size_t>(y) * w;

        if (w == 1) {
            double a = k[4] * mid[0];
            if (top) a += k[1] * top[0];
            if (bot) a += k[7] * bot[0];
            dst[0] += a;
            continue;
        }

        {
            double a = k[4] * mid[0] + k[5] * mid[1];
            if (top) a += k[1] * top[0] + k[2] * top[1];
            if (bot) a += k[7] * bot[0] + k[8] * bot[1];
            dst[0] += a;
        }
        if (top && bot) {
            for (int x = 1; x < w - 1; ++x) {
                dst[x] += k[0] * top[x - 1] + k[1] * top[x] + k[2] * top[x + 1] +
                          k[3] * mid[x - 1] + k[4] * mid[x] + k[5] * mid[x + 1] +
                          k[6] * bot[x - 1] + k[7] * bot[x] + k[8] * bot[x + 1];
            }
        } else if (top) {
            for (int x = 1; x < w - 1; ++x) {
                dst[x] += k[0] * top[x - 1] + k[1] * top[x] + k[2] * top[x + 1] +
                          k[3] * mid[x - 1] + k[4] * mid[x] + k[5] * mid[x + 1];
            }
        } else if (bot) {
            for (int x = 1; x < w - 1; ++x) {
                dst[x] += k[3] * mid[x - 1] + k[4] * mid[x] + k[5] * mid[x + 1] +
                          k[6] * bot[x - 1] + k[7] * bot[x] + k[8] * bot[x + 1];
            }
        } else {
            for (int x = 1; x < w - 1; ++x) {
                dst[x] += k[3] * mid[x - 1] + k[4] * mid[x] + k[5] * mid[x + 1];
            }
        }
        {
            const int x = w - 1;
            double a = k[3] * mid[x - 1] + k[4] * mid[x];
            if (top) a += k[0] * top[x - 1] + k[1] * top[x];
            if (bot) a += k[6] * bot[x - 1] + k[7] * bot[x];
            dst[x] += a;
        }
    }
}

// k9[ky*3+kx] += sum over valid (y,x) of dout[y][x] * in[y+ky-1][x+kx-1].
void conv3x3_wgrad(const double* in, const double* dout, int h, int w, double* k9) {
    for (int ky = 0; ky < 3; ++ky) {
        const int y0 = std::max(0, 1 - ky);
        const int y1 = std::min(h, h + 1 - ky);
        double a0 = 0.0, a1 = 0.0, a2 = 0.0;  // kx = 0, 1, 2
        for (int y = y0; y < y1; ++y) {
            const double* g = dout + static_cast<std::size_t>(y) * w;
            const double* s = in + static_cast<std::size_t>(y + ky - 1) * w;
            double r0 = 0.0, r1 = 0.0, r2 = 0.0;
            if (w == 1) {
                r1 = g[0] * s[0];
            } else {
#pragma omp simd reduction(+ : r0, r1, r2)
                for (int x = 1; x < w - 1; ++x) {
                    const double gx = g[x];
                    r0 += gx * s[x - 1];
                    r1 += gx * s[x];
                    r2 += gx * s[x + 1];
                }
                r1 += g[0] * s[0] + g[w - 1] * s[w - 1];
                r2 += g[0] * s[1];
                r0 += g[w - 1] * s[w - 2];
            }
            a0 += r0;
            a1 += r1;
            a2 += r2;
        }
        k9[ky * 3 + 0] += a0;
        k9[ky * 3 + 1] += a1;
        k9[ky * 3 + 2] += a2;
    }
}

void flip_kernel(const double* k, double* out) {
    for (int i = 0; i < 9; ++i) out[i] = k[8 - i];
}

}  // namespace

void NetSpec::validate() const {
    if (channels.size() < 2) throw std::invalid_argument("NetSpec: need at least one conv layer");
    for (int c : channels)
        if (c < 1) throw std::invalid_argument("NetSpec: channel counts must be positive");
    if (channels.back() != 1) throw std::invalid_argument("NetSpec: final output channels must be 1");
    if (residual && channels.front() != channels.back())
        throw std::invalid_argument("NetSpec: residual add needs matching input/output channels");
    if (time_embed_dim < 0 || time_embed_dim % 2 != 0)
        throw std::invalid_argument("NetSpec: time_embed_dim must be even and non-negative");
}

std::size_t NetSpec::param_count() const {
    std::size_t n = 0;
    for (int l = 0; l < layer_count(); ++l)
        n += static_cast<std::size_t>(channels[l + 1]) * channels[l] * 9 + channels[l + 1];
    if (time_embed_dim > 0) n += static_cast<std::size_t>(channels[1]) * time_embed_dim;
    return n;
}

std::vector<double> time_embedding(int t, int dim) {
    std::vector<double> emb(dim);
    const double log_base = std::log(10000.0);
    for (int i = 0; i < dim / 2; ++i) {
        const double freq = std::exp(-log_base * (2.0 * i / dim));
        emb[2 * i] = std::sin(t * freq);
        emb[2 * i + 1] = std::cos(t * freq);
    }
    return emb;
}

ConvNet::ConvNet(NetSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    std::size_t off = 0;
    for (int l = 0; l < spec_.layer_count(); ++l) {
        weight_off_.push_back(off);
        off += static_cast<std::size_t>(spec_.channels[l + 1]) * spec_.channels[l] * 9;
        bias_off_.push_back(off);
        off += spec_.channels[l + 1];
    }
    tproj_off_ = off;
    if (spec_.time_embed_dim > 0)
        off += static_cast<std::size_t>(spec_.channels[1]) * spec_.time_embed_dim;
    params_.assign(off, 0.0);
}

ConvNet ConvNet::kaiming(NetSpec spec, Rng& rng) {
    ConvNet net(std::move(spec));
    const NetSpec& s = net.spec_;
    const int last = s.layer_count() - 1;
    for (int l = 0; l < last; ++l) {
        const double bound = std::sqrt(6.0 / (s.channels[l] * 9.0));
        double* w = net.params_.data() + net.weight_off_[l];
        const std::size_t n = static_cast<std::size_t>(s.channels[l + 1]) * s.channels[l] * 9;
        for (std::size_t i = 0; i < n; ++i) w[i] = (2.0 * rng.uniform() - 1.0) * bound;
    }
    // final conv stays zero, so a residual net starts as the identity map
    if (s.time_embed_dim > 0) {
        const double bound = std::sqrt(6.0 / s.time_embed_dim);
        double* w = net.params_.data() + net.tproj_off_;
        const std::size_t n = static_cast<std::size_t>(s.channels[1]) * s.time_embed_dim;
        for (std::size_t i = 0; i < n; ++i) w[i] = (2.0 * rng.uniform() - 1.0) * bound;
    }
    return net;
}

std::size_t ConvNet::weight_offset(int layer) const { return weight_off_.at(layer); }
std::size_t ConvNet::bias_offset(int layer) const { return bias_off_.at(layer); }
std::size_t ConvNet::tproj_offset() const { return tproj_off_; }

void ConvNet::check_input(const Tensor4& x, std::span<const int> t) const {
    if (x.c != spec_.channels.front())
        throw std::invalid_argument("ConvNet::forward: input has " + std::to_string(x.c) +
                                    " channels, net expects " +
                                    std::to_string(spec_.channels.front()));
    if (t.size() != 1 && t.size() != static_cast<std::size_t>(x.n))
        throw std::invalid_argument("ConvNet::forward: timestep count must be 1 or batch size");
    if (spec_.time_embed_dim > 0)
        for (int ti : t)
            if (ti < 1) throw std::invalid_argument("ConvNet::forward: timestep must be >= 1");
}

Tensor4 ConvNet::run(const Tensor4& x, std::span<const int> t, Cache* cache) const {
    check_input(x, t);
    const int layers = spec_.layer_count();
    const int batch = x.n;
    const std::size_t plane = x.plane();

    if (cache) {
        cache->input = x;
        cache->pre.clear();
        cache->emb.assign(batch, {});
    }

    Tensor4 cur = x;
    for (int l = 0; l < layers; ++l) {
        const int cin = spec_.channels[l];
        const int cout = spec_.channels[l + 1];
        Tensor4 next(batch, cout, x.h, x.w);
        const double* bias = params_.data() + bias_off_[l];
        for (int n = 0; n < batch; ++n) {
            for (int oc = 0; oc < cout; ++oc) {
                double* out = next.slice(n, oc);
                std::fill(out, out + plane, bias[oc]);
                const double* wbase = params_.data() + weight_off_[l] +
                                      static_cast<std::size_t>(oc) * cin * 9;
                for (int ic = 0; ic < cin; ++ic)
                    conv3x3_acc(cur.slice(n, ic), x.h, x.w, wbase + ic * 9, out);
            }
        }
        if (l == 0 && spec_.time_embed_dim > 0) {
            const double* proj = params_.data() + tproj_off_;
            for (int n = 0; n < batch; ++n) {
                const int tn = t.size() == 1 ? t[0] : t[n];
                std::vector<double> emb = time_embedding(tn, spec_.time_embed_dim);
                for (int oc = 0; oc < cout; ++oc) {
                    double b = 0.0;
                    const double* row = proj + static_cast<std::size_t>(oc) * spec_.time_embed_dim;
                    for (int k = 0; k < spec_.time_embed_dim; ++k) b += row[k] * emb[k];
                    double* out = next.slice(n, oc);
                    for (std::size_t i = 0; i < plane; ++i) out[i] += b;
                }
                if (cache) cache->emb[n] = std::move(emb);
            }
        }
        if (cache) {
            if (!next.all_finite())
                throw std::runtime_error("ConvNet: non-finite activations in conv layer " +
                                         std::to_string(l));
            cache->pre.push_back(next);
        }
        if (l < layers - 1)
            for (double& v : next.v) v = v > 0.0 ? v : 0.0;
        cur = std::move(next);
    }

    if (spec_.residual)
        for (std::size_t i = 0; i < cur.size(); ++i) cur.v[i] += x.v[i];
    return cur;
}

Tensor4 ConvNet::forward(const Tensor4& x, std::span<const int> t) const {
    return run(x, t, nullptr);
}

Tensor4 ConvNet::forward(const Tensor4& x, int t) const {
    const int ts[1] = {t};
    return run(x, ts, nullptr);
}

Image ConvNet::forward_image(const Image& x, int t) const {
    return to_image(forward(to_tensor(x), t));
}

Tensor4 ConvNet::forward_cached(const Tensor4& x, std::span<const int> t, Cache& cache) const {
    return run(x, t, &cache);
}

void ConvNet::backward(const Cache& cache, const Tensor4& d_out, std::span<double> grads) const {
    if (grads.size() != params_.size())
        throw std::invalid_argument("ConvNet::backward: gradient buffer size mismatch");
    const int layers = spec_.layer_count();
    const Tensor4& x = cache.input;
    const int batch = x.n;
    const std::size_t plane = x.plane();

    // Residual path carries no parameters, so d(pre) of the last layer is d_out.
    Tensor4 d = d_out;
    double flipped[9];

    Tensor4 below_act;
    for (int l = layers - 1; l >= 0; --l) {
        const int cin = spec_.channels[l];
        const int cout = spec_.channels[l + 1];
        // activation feeding this layer: the input for l == 0, relu(pre) otherwise
        const Tensor4* below = &x;
        if (l > 0) {
            below_act = cache.pre[l - 1];
            for (double& v : below_act.v) v = v > 0.0 ? v : 0.0;
            below = &below_act;
        }

        double* gw = grads.data() + weight_off_[l];
        double* gb = grads.data() + bias_off_[l];
        for (int n = 0; n < batch; ++n) {
            for (int oc = 0; oc < cout; ++oc) {
                const double* dp = d.slice(n, oc);
                double bacc = 0.0;
#pragma omp simd reduction(+ : bacc)
                for (std::size_t i = 0; i < plane; ++i) bacc += dp[i];
                gb[oc] += bacc;
                for (int ic = 0; ic < cin; ++ic)
                    conv3x3_wgrad(below->slice(n, ic), dp, x.h, x.w,
                                  gw + (static_cast<std::size_t>(oc) * cin + ic) * 9);
            }
        }

        if (l == 0 && spec_.time_embed_dim > 0) {
            double* gp = grads.data() + tproj_off_;
            for (int n = 0; n < batch; ++n) {
                const std::vector<double>& emb = cache.emb[n];
                for (int oc = 0; oc < cout; ++oc) {
                    const double* dp = d.slice(n, oc);
                    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
                    for (std::size_t i = 0; i < plane; ++i) acc += dp[i];
                    double* row = gp + static_cast<std::size_t>(oc) * spec_.time_embed_dim;
                    for (int k = 0; k < spec_.time_embed_dim; ++k) row[k] += acc * emb[k];
                }
            }
        }

        if (l == 0) break;  // input gradients are not needed

        Tensor4 dnext(batch, cin, x.h, x.w, 0.0);
        for (int n = 0; n < batch; ++n) {
            for (int ic = 0; ic < cin; ++ic) {
                double* out = dnext.slice(n, ic);
                for (int oc = 0; oc < cout; ++oc) {
                    flip_kernel(params_.data() + weight_off_[l] +
                                    (static_cast<std::size_t>(oc) * cin + ic) * 9,
                                flipped);
                    conv3x3_acc(d.slice(n, oc), x.h, x.w, flipped, out);
                }
            }
        }
        // gate through the ReLU between layers l-1 and l
        const Tensor4& pre = cache.pre[l - 1];
        for (std::size_t i = 0; i < dnext.size(); ++i)
            if (pre.v[i] <= 0.0) dnext.v[i] = 0.0;
        d = std::move(dnext);
    }
}

double mse_loss(const Tensor4& out, const Tensor4& target) {
    if (!out.same_shape(target)) throw std::invalid_argument("mse_loss: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double dd = out.v[i] - target.v[i];
        acc += dd * dd;
    }
    return acc / static_cast<double>(out.size());
}

double loss_and_grads(const ConvNet& net, const Tensor4& x, std::span<const int> t,
                      const Tensor4& target, std::vector<double>& grads) {
    ConvNet::Cache cache;
    Tensor4 out = net.forward_cached(x, t, cache);
    if (!out.same_shape(target))
        throw std::invalid_argument("loss_and_grads: target shape differs from net output");
    grads.assign(net.param_count(), 0.0);
    Tensor4 d(out.n, out.c, out.h, out.w);
    const double scale = 2.0 / static_cast<double>(out.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double diff = out.v[i] - target.v[i];
        loss += diff * diff;
        d.v[i] = scale * diff;
    }
    net.backward(cache, d, grads);
    return loss / static_cast<double>(out.size());
}

double loss_and_grads(const ConvNet& net, const Tensor4& x, int t, const Tensor4& target,
                      std::vector<double>& grads) {
    const int ts[1] = {t};
    return loss_and_grads(net, x, std::span<const int>(ts), target, grads);
}

}  // namespace rddpm
