#include "rddpm/rddpm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rddpm/tensor.hpp"

namespace rddpm {

void RddpmTrainConfig::validate(const NoiseSchedule& sched) const {
    if (t_max < 1 || t_max > sched.T)
        throw std::invalid_argument("RddpmTrainConfig: need 1 <= t_max <= schedule T");
    if (inner_iters < 1) throw std::invalid_argument("RddpmTrainConfig: inner_iters must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("RddpmTrainConfig: lr must be positive");
}

Image make_rician_magnitude_at(const Image& x_t, int t, const NoiseSchedule& sched, Rng& rng) {
    const ScheduleEntry e = lookup(sched, t);
    const double sd = std::sqrt(1.0 - e.alpha_bar);
    Image out(x_t.width(), x_t.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double n = sd * rng.normal();
        out[i] = std::sqrt(x_t[i] * x_t[i] + n * n);
    }
    return out;
}

SqPredictor net_predictor(const ConvNet& theta) {
    return [&theta](const Image& a_sq, int t) { return theta.forward_image(a_sq, t); };
}

SqPredictor oracle_predictor(const NoiseSchedule& sched) {
    return [&sched](const Image& a_sq, int t) { return oracle_subtract(a_sq, t, sched); };
}

Conversion convert_rician_to_gaussian(const SqPredictor& theta, const Image& a_t, int t) {
    for (std::size_t i = 0; i < a_t.size(); ++i)
        if (!(a_t[i] >= 0.0))
            throw std::invalid_argument("convert_rician_to_gaussian: magnitude must be >= 0");
    Image pred = theta(a_t.squared(), t);
    require_same_shape(pred, a_t, "convert_rician_to_gaussian");
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0.0) {
            pred[i] = 0.0;
            ++clamped;
        } else {
            pred[i] = std::sqrt(pred[i]);
        }
    }
    return {std::move(pred), static_cast<double>(clamped) / static_cast<double>(a_t.size())};
}

Conversion convert_rician_to_gaussian(const ConvNet& theta, const Image& a_t, int t) {
    return convert_rician_to_gaussian(net_predictor(theta), a_t, t);
}

double rddpm_train_step(ThetaTrainer& tr, const std::vector<Image>& x0_batch, Rng& rng) {
    if (x0_batch.empty()) throw std::invalid_argument("rddpm_train_step: empty batch");

    std::vector<int> ts(x0_batch.size());
    std::vector<Image> x_t;
    x_t.reserve(x0_batch.size());
    for (std::size_t i = 0; i < x0_batch.size(); ++i) {
        ts[i] = static_cast<int>(rng.below(tr.cfg.t_max)) + 1;
        Image e(x0_batch[i].width(), x0_batch[i].height());
        for (std::size_t p = 0; p < e.size(); ++p) e[p] = rng.normal();
        x_t.push_back(q_sample(x0_batch[i], ts[i], e, tr.sched));
    }

    std::vector<Image> target_sq;
    target_sq.reserve(x_t.size());
    for (const Image& img : x_t) target_sq.push_back(img.squared());
    const Tensor4 target = to_tensor(target_sq);

    auto draw_magnitudes = [&] {
        std::vector<Image> a_sq;
        a_sq.reserve(x_t.size());
        for (std::size_t i = 0; i < x_t.size(); ++i)
            a_sq.push_back(make_rician_magnitude_at(x_t[i], ts[i], tr.sched, rng).squared());
        return to_tensor(a_sq);
    };

    auto grad_step = [&](const Tensor4& input) {
        std::vector<double> grads;
        double loss;
        try {
            loss = loss_and_grads(tr.net, input, ts, target, grads);
        } catch (const std::runtime_error& err) {
            throw std::runtime_error(std::string("rddpm_train_step: ") + err.what());
        }
        if (!std::isfinite(loss)) {
            std::string tlist;
            for (int t : ts) tlist += (tlist.empty() ? "" : ",") + std::to_string(t);
            throw std::runtime_error("rddpm_train_step: non-finite loss at t in {" + tlist + "}");
        }
        adam_step(tr.net.params(), grads, tr.opt);
        return loss;
    };

    double last_loss = 0.0;
    if (tr.cfg.inner_mode == InnerStepMode::per_sample) {
        for (int p = 0; p < tr.cfg.inner_iters; ++p) last_loss = grad_step(draw_magnitudes());
    } else {
        // literal reading: resample p_i + 1 times, one step on the last draw
        Tensor4 input = draw_magnitudes();
        for (int p = 0; p < tr.cfg.inner_iters; ++p) input = draw_magnitudes();
        last_loss = grad_step(input);
    }
    return last_loss;
}

Image rddpm_denoise(const RddpmModel& model, const Image& a_start,
                    const RddpmDenoiseOptions& opts, Rng& rng, RddpmDenoiseStats* stats) {
    const NoiseSchedule& sched = model.ddpm.sched;
    if (opts.t0 < 1 || opts.t0 > sched.T)
        throw std::invalid_argument("rddpm_denoise: T0 outside schedule range");
    for (std::size_t i = 0; i < a_start.size(); ++i)
        if (!(a_start[i] >= 0.0))
            throw std::invalid_argument("rddpm_denoise: magnitude input must be >= 0");

    Image magnitude = a_start;
    Image gaussian_track;  // the completed ancestral sample; overwritten by conversion
    double clamp_acc = 0.0;

    for (int t = opts.t0; t >= 1; --t) {
        Conversion conv = convert_rician_to_gaussian(model.theta, magnitude, t);
        clamp_acc += conv.clamped_fraction;
        const Image& x_hat = conv.x;

        const ScheduleEntry e = lookup(sched, t);
        const double coef = opts.coef == ReverseCoef::standard ? 1.0 / std::sqrt(e.alpha)
                                                               : 1.0 / std::sqrt(e.alpha_bar);
        const double noise_coef = (1.0 - e.alpha) / std::sqrt(1.0 - e.alpha_bar);
        const Image eps_hat = model.ddpm.net.forward_image(x_hat, t);

        Image mean(x_hat.width(), x_hat.height());
        for (std::size_t i = 0; i < mean.size(); ++i)
            mean[i] = coef * (x_hat[i] - noise_coef * eps_hat[i]);
        if (!mean.all_finite())
            throw std::runtime_error("rddpm_denoise: non-finite state at timestep " +
                                     std::to_string(t));

        if (t != 1) {
            const double renoise_sd = opts.renoise == RenoiseScale::paper
                                          ? e.sigma
                                          : std::sqrt(1.0 - lookup(sched, t - 1).alpha_bar);
            gaussian_track = mean;
            magnitude = Image(mean.width(), mean.height());
            if (opts.inject_noise) {
                for (std::size_t i = 0; i < mean.size(); ++i)
                    gaussian_track[i] = mean[i] + e.sigma * rng.normal();
                for (std::size_t i = 0; i < mean.size(); ++i) {
                    const double n = renoise_sd * rng.normal();
                    magnitude[i] = std::sqrt(mean[i] * mean[i] + n * n);
                }
            } else {
                for (std::size_t i = 0; i < mean.size(); ++i) magnitude[i] = std::abs(mean[i]);
            }
        } else {
            gaussian_track = std::move(mean);
        }
    }

    if (stats) stats->mean_clamped_fraction = clamp_acc / opts.t0;
    return gaussian_track.clamp(0.0, 1.0);
}

Image oracle_subtract(const Image& a_sq, int t, const NoiseSchedule& sched) {
    const ScheduleEntry e = lookup(sched, t);
    const double shift = 1.0 - e.alpha_bar;
    Image out(a_sq.width(), a_sq.height());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a_sq[i] - shift;
    return out;
}

double holdout_conversion_mse(const SqPredictor& pred, const std::vector<Image>& x0s, int t_max,
                              const NoiseSchedule& sched, int draws_per_image, Rng& rng) {
    if (x0s.empty() || draws_per_image < 1)
        throw std::invalid_argument("holdout_conversion_mse: need images and draws");
    double acc = 0.0;
    std::size_t count = 0;
    for (const Image& x0 : x0s) {
        for (int d = 0; d < draws_per_image; ++d) {
            const int t = static_cast<int>(rng.below(t_max)) + 1;
            Image eps(x0.width(), x0.height());
            for (std::size_t p = 0; p < eps.size(); ++p) eps[p] = rng.normal();
            const Image x_t = q_sample(x0, t, eps, sched);
            const Image a = make_rician_magnitude_at(x_t, t, sched, rng);
            acc += mse(x_t.squared(), pred(a.squared(), t));
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

}  // namespace rddpm
