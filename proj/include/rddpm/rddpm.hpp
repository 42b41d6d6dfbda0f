#ifndef RDDPM_RDDPM_HPP
#define RDDPM_RDDPM_HPP

#include <functional>
#include <vector>

#include "rddpm/diffusion.hpp"

namespace rddpm {

// Scale of the fresh quadrature noise when re-forming the magnitude track
// between reverse steps: the printed sigma_t, or sqrt(1 - alpha_bar_{t-1})
// which matches the conversion net's training distribution.
enum class RenoiseScale { paper, consistent };

// Gradient placement for the inner resampling loop of the training procedure:
// one step per fresh magnitude draw, or a single step after the whole loop.
enum class InnerStepMode { per_sample, literal };

struct RddpmTrainConfig {
    int t_max = 40;       // maximum diffusion length T_m
    int inner_iters = 50;  // inner iteration count p_i
    double lr = 2e-4;
    InnerStepMode inner_mode = InnerStepMode::per_sample;

    void validate(const NoiseSchedule& sched) const;
};

// Conversion net plus the frozen pre-trained DDPM it is paired with. The DDPM
// weights are never touched by theta training or by sampling.
struct RddpmModel {
    ConvNet theta;
    DdpmModel ddpm;
};

struct RddpmDenoiseOptions {
    int t0 = 15;
    ReverseCoef coef = ReverseCoef::standard;
    RenoiseScale renoise = RenoiseScale::paper;
    bool inject_noise = true;  // false forces every z to zero
};

struct RddpmDenoiseStats {
    double mean_clamped_fraction = 0.0;  // negative theta outputs clamped per step, averaged
};

// A_t = sqrt(x_t^2 + (sqrt(1 - alpha_bar_t) * eps)^2) with a fresh eps draw.
Image make_rician_magnitude_at(const Image& x_t, int t, const NoiseSchedule& sched, Rng& rng);

// Squared-domain conversion predictor: maps (A_t^2, t) to a prediction of x_t^2.
using SqPredictor = std::function<Image(const Image& a_sq, int t)>;

SqPredictor net_predictor(const ConvNet& theta);
// Analytic unbiased baseline: A^2 - (1 - alpha_bar_t).
SqPredictor oracle_predictor(const NoiseSchedule& sched);

struct Conversion {
    Image x;                  // sqrt of the clamped squared prediction
    double clamped_fraction;  // share of pixels with negative predictions
};

Conversion convert_rician_to_gaussian(const SqPredictor& theta, const Image& a_t, int t);
Conversion convert_rician_to_gaussian(const ConvNet& theta, const Image& a_t, int t);

struct ThetaTrainer {
    ConvNet net;
    NoiseSchedule sched;
    RddpmTrainConfig cfg;
    AdamState opt;

    ThetaTrainer(ConvNet n, NoiseSchedule s, RddpmTrainConfig c)
        : net(std::move(n)), sched(std::move(s)), cfg(c),
          opt(net.param_count(), AdamHyper{.lr = c.lr}) {
        cfg.validate(sched);
    }
};

// One outer training iteration: per item t ~ U{1..T_m} and x_t via q_sample,
// then the inner loop of fresh magnitude draws with gradient steps on
// mean ||x_t^2 - theta(A_t^2, t)||^2. Returns the last inner loss.
double rddpm_train_step(ThetaTrainer& tr, const std::vector<Image>& x0_batch, Rng& rng);

// Reverse chain that converts the magnitude track to the Gaussian track with
// theta at every timestep before applying the frozen DDPM update.
Image rddpm_denoise(const RddpmModel& model, const Image& a_start,
                    const RddpmDenoiseOptions& opts, Rng& rng,
                    RddpmDenoiseStats* stats = nullptr);

// A^2 - (1 - alpha_bar_t), no clamping.
Image oracle_subtract(const Image& a_sq, int t, const NoiseSchedule& sched);

// Mean conversion MSE over fresh (x_t, A_t) draws from the given clean images.
// Seeding the rng identically makes runs directly comparable across predictors.
double holdout_conversion_mse(const SqPredictor& pred, const std::vector<Image>& x0s, int t_max,
                              const NoiseSchedule& sched, int draws_per_image, Rng& rng);

}  // namespace rddpm

#endif  // RDDPM_RDDPM_HPP
