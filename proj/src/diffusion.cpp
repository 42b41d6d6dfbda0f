#include "rddpm/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rddpm/tensor.hpp"

namespace rddpm {

Image q_sample(const Image& x0, int t, const Image& eps, const NoiseSchedule& sched) {
    require_same_shape(x0, eps, "q_sample");
    const ScheduleEntry e = lookup(sched, t);
    const double a = std::sqrt(e.alpha_bar);
    const double b = std::sqrt(1.0 - e.alpha_bar);
    Image out(x0.width(), x0.height());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + b * eps[i];
    return out;
}

double ddpm_train_step(DdpmTrainer& tr, const std::vector<Image>& x0_batch, Rng& rng) {
    if (x0_batch.empty()) throw std::invalid_argument("ddpm_train_step: empty batch");
    const int T = tr.model.sched.T;

    std::vector<int> ts(x0_batch.size());
    std::vector<Image> noisy, eps;
    noisy.reserve(x0_batch.size());
    eps.reserve(x0_batch.size());
    for (std::size_t i = 0; i < x0_batch.size(); ++i) {
        ts[i] = static_cast<int>(rng.below(T)) + 1;
        Image e(x0_batch[i].width(), x0_batch[i].height());
        for (std::size_t p = 0; p < e.size(); ++p) e[p] = rng.normal();
        noisy.push_back(q_sample(x0_batch[i], ts[i], e, tr.model.sched));
        eps.push_back(std::move(e));
    }

    std::vector<double> grads;
    double loss;
    try {
        loss = loss_and_grads(tr.model.net, to_tensor(noisy), ts, to_tensor(eps), grads);
    } catch (const std::runtime_error& err) {
        throw std::runtime_error(std::string("ddpm_train_step: ") + err.what());
    }
    if (!std::isfinite(loss))
        throw std::runtime_error("ddpm_train_step: non-finite loss at step " +
                                 std::to_string(tr.opt.k + 1));
    adam_step(tr.model.net.params(), grads, tr.opt);
    return loss;
}

Image reverse_step(const DdpmModel& m, const Image& x_t, int t, const Image& z,
                   ReverseCoef mode) {
    require_same_shape(x_t, z, "reverse_step");
    const ScheduleEntry e = lookup(m.sched, t);
    const double coef =
        mode == ReverseCoef::standard ? 1.0 / std::sqrt(e.alpha) : 1.0 / std::sqrt(e.alpha_bar);
    const double noise_coef = (1.0 - e.alpha) / std::sqrt(1.0 - e.alpha_bar);

    const Image eps_hat = m.net.forward_image(x_t, t);
    Image out(x_t.width(), x_t.height());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = coef * (x_t[i] - noise_coef * eps_hat[i]) + e.sigma * z[i];
    return out;
}

Image ddpm_denoise_from(const DdpmModel& m, const Image& x_start, int t0, Rng& rng,
                        ReverseCoef mode) {
    if (t0 < 1 || t0 > m.sched.T)
        throw std::invalid_argument("ddpm_denoise_from: T0 outside schedule range");
    Image x = x_start;
    Image z(x.width(), x.height(), 0.0);
    for (int t = t0; t >= 1; --t) {
        if (t != 1)
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.normal();
        else
            std::fill(z.data(), z.data() + z.size(), 0.0);
        x = reverse_step(m, x, t, z, mode);
    }
    return x.clamp(0.0, 1.0);
}

}  // namespace rddpm
