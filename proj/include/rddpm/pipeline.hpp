#ifndef RDDPM_PIPELINE_HPP
#define RDDPM_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rddpm/checkpoint.hpp"
#include "rddpm/config.hpp"
#include "rddpm/image.hpp"

namespace rddpm {

struct ManifestEntry {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;  // per-image generation seed
    std::string clean_file;  // relative to the dataset directory
    std::string noisy_file;
};

struct Manifest {
    std::string split;  // "train" or "test"
    std::uint64_t master_seed = 0;
    double sigma = 0.0;
    std::vector<ManifestEntry> entries;
};

void save_manifest(const std::string& path, const Manifest& m);
Manifest load_manifest(const std::string& path);

struct ImagePair {
    Image clean;
    Image noisy;
};

std::vector<ImagePair> load_pairs(const std::string& dataset_dir, const Manifest& m);

// The clean-image stand-ins both diffusion trainers consume: the baseline's
// outputs over the training noisy images, unclamped.
std::vector<Image> baseline_outputs(const Checkpoint& baseline, const std::vector<ImagePair>& pairs);

// Writes clean/noisy .f64 pairs for disjoint train and test splits plus the
// two manifests into cfg.data_dir. Fully determined by the config seed.
void generate_phantom_dataset(const ExperimentConfig& cfg);

// Conventional artifact locations under cfg.out_dir / cfg.data_dir.
std::string train_manifest_path(const ExperimentConfig& cfg);
std::string test_manifest_path(const ExperimentConfig& cfg);
std::string baseline_ckpt_path(const ExperimentConfig& cfg);
std::string ddpm_ckpt_path(const ExperimentConfig& cfg);
std::string theta_ckpt_path(const ExperimentConfig& cfg);
std::string report_csv_path(const ExperimentConfig& cfg);

// Raised when training hits a non-finite loss; the checkpoint of the last
// finite state has already been written when this is thrown.
struct TrainDiverged : std::runtime_error {
    std::string retained_path;
    TrainDiverged(const std::string& what, std::string retained)
        : std::runtime_error(what), retained_path(std::move(retained)) {}
};

// Supervised denoiser on (noisy, clean) pairs; writes per-epoch losses to
// <out_dir>/baseline_loss.csv and the checkpoint to baseline_ckpt_path(cfg).
// Returns the checkpoint path.
std::string train_baseline(const ExperimentConfig& cfg);

// Noise-prediction diffusion model trained on the baseline's outputs over the
// training noisy images (not on the clean images). Loss CSV: ddpm_loss.csv.
std::string train_diffusion(const ExperimentConfig& cfg, const std::string& baseline_ckpt);

// Squared-domain conversion net against the same baseline-derived targets,
// with the frozen schedule from the config. Loss CSV: theta_loss.csv.
std::string train_rddpm_theta(const ExperimentConfig& cfg, const std::string& baseline_ckpt);

struct EvalCheckpoints {
    std::string baseline;
    std::string ddpm;
    std::string theta;
};

// Scores every test image under the four methods (noisy / baseline / ddpm /
// rddpm), writes denoised PGMs under <out_dir>/eval/, and emits the CSV report
// (per-image rows plus per-method mean rows). Returns the CSV path.
std::string evaluate(const ExperimentConfig& cfg, const EvalCheckpoints& ckpts);

// Per-image single-shot denoising used by the CLI.
Image denoise_with_baseline(const Checkpoint& baseline, const Image& noisy);
Image denoise_with_ddpm(const ExperimentConfig& cfg, const Checkpoint& ddpm, const Image& noisy,
                        std::uint64_t seed);
Image denoise_with_rddpm(const ExperimentConfig& cfg, const Checkpoint& theta,
                         const Checkpoint& ddpm, const Image& noisy, std::uint64_t seed);

}  // namespace rddpm

#endif  // RDDPM_PIPELINE_HPP
