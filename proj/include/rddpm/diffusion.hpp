#ifndef RDDPM_DIFFUSION_HPP
#define RDDPM_DIFFUSION_HPP

#include <vector>

#include "rddpm/adam.hpp"
#include "rddpm/image.hpp"
#include "rddpm/net.hpp"
#include "rddpm/rng.hpp"
#include "rddpm/schedule.hpp"

namespace rddpm {

// Coefficient in front of the reverse-step mean update. The standard ancestral
// update uses 1/sqrt(alpha_t); paper_literal keeps 1/sqrt(alpha_bar_t).
enum class ReverseCoef { standard, paper_literal };

struct DdpmModel {
    ConvNet net;
    NoiseSchedule sched;
};

// x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps.
Image q_sample(const Image& x0, int t, const Image& eps, const NoiseSchedule& sched);

struct DdpmTrainer {
    DdpmModel model;
    AdamState opt;

    DdpmTrainer(DdpmModel m, double lr)
        : model(std::move(m)), opt(model.net.param_count(), AdamHyper{.lr = lr}) {}
};

// Samples t ~ U{1..T} and eps ~ N(0,I) per item, forms x_t, and takes one
// Adam step on mean ||eps - eps_theta(x_t, t)||^2. Returns the batch loss.
double ddpm_train_step(DdpmTrainer& tr, const std::vector<Image>& x0_batch, Rng& rng);

// x_{t-1} = coef * (x_t - (1-alpha_t)/sqrt(1-alpha_bar_t) * eps_theta(x_t,t)) + sigma_t * z.
Image reverse_step(const DdpmModel& m, const Image& x_t, int t, const Image& z,
                   ReverseCoef mode = ReverseCoef::standard);

// Treats x_start as x_{T0} and runs reverse steps down to t=1 (no injected
// noise at the last step). Output clamped to [0,1].
Image ddpm_denoise_from(const DdpmModel& m, const Image& x_start, int t0, Rng& rng,
                        ReverseCoef mode = ReverseCoef::standard);

}  // namespace rddpm

#endif  // RDDPM_DIFFUSION_HPP
