#ifndef RDDPM_CONFIG_HPP
#define RDDPM_CONFIG_HPP

#include <cstdint>
#include <string>

#include "rddpm/diffusion.hpp"
#include "rddpm/net.hpp"
#include "rddpm/phantom.hpp"
#include "rddpm/rddpm.hpp"

namespace rddpm {

// Flat experiment configuration. Every field maps 1:1 to a key in the
// key=value config file and to a CLI flag; CLI values override file values.
struct ExperimentConfig {
    // dataset
    std::string data_dir = "data";
    std::string out_dir = "out";
    int train_images = 40;
    int test_images = 20;
    int image_size = 64;
    int min_shapes = 3;
    int max_shapes = 8;
    double min_intensity = 0.15;
    double max_intensity = 0.95;
    double sigma = 0.1;

    // schedule
    int T = 40;
    double beta_start = 1e-4;
    double beta_end = 0.02;

    // sampling / conversion
    int t0 = 15;
    int t_max = 40;
    int inner_iters = 50;

    // training budgets
    double baseline_lr = 1e-3;
    int baseline_batch = 10;
    int baseline_epochs = 250;
    double ddpm_lr = 2e-4;
    int ddpm_batch = 10;
    int ddpm_epochs = 1000;
    double theta_lr = 2e-4;
    int theta_batch = 10;
    int theta_outer_iters = 1000;  // training budget for the conversion net
    int crop = 32;                 // training crop size; 0 trains on full images

    // net shape (shared by all three models)
    int net_width = 32;
    int net_hidden = 3;

    // modes
    std::string reverse_coef = "standard";    // standard | paper
    std::string renoise_scale = "paper";      // paper | consistent
    std::string inner_step = "per-sample";    // per-sample | literal

    std::uint64_t seed = 2026;

    void validate() const;

    NetSpec baseline_net_spec() const;  // residual, no time conditioning
    NetSpec ddpm_net_spec() const;      // non-residual noise predictor
    NetSpec theta_net_spec() const;     // residual squared-domain predictor

    ReverseCoef reverse_coef_mode() const;
    RenoiseScale renoise_scale_mode() const;
    InnerStepMode inner_step_mode() const;

    PhantomSpec phantom_spec() const;
};

// Applies one key=value assignment; throws on unknown keys or bad values.
void apply_config_kv(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Reads a key=value file ('#' comments and blank lines allowed) on top of the
// defaults already present in cfg.
void load_config_file(const std::string& path, ExperimentConfig& cfg);

// Every key in a fixed order; parseable by load_config_file.
std::string config_to_string(const ExperimentConfig& cfg);
void write_config(const std::string& path, const ExperimentConfig& cfg);

}  // namespace rddpm

#endif  // RDDPM_CONFIG_HPP
