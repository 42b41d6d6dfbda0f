#ifndef RDDPM_CHECKPOINT_HPP
#define RDDPM_CHECKPOINT_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rddpm/net.hpp"

namespace rddpm {

enum class ModelKind : std::uint32_t { baseline = 0, ddpm = 1, theta = 2 };

std::string to_string(ModelKind kind);

// Everything needed to reconstruct a trained model: the net layout, the
// schedule it was trained against, training metadata, and the flat parameter
// blob in ConvNet layout (per layer weights then biases, then the time
// projection). Serialized little-endian; round trips byte-identically.
struct Checkpoint {
    ModelKind kind = ModelKind::baseline;
    NetSpec net;
    int T = 0;  // 0 when no schedule is attached (baseline)
    double beta_start = 0.0;
    double beta_end = 0.0;
    std::uint64_t steps = 0;
    double final_loss = 0.0;
    std::uint64_t seed = 0;
    std::uint8_t reverse_coef = 0;   // ReverseCoef as stored flag
    std::uint8_t renoise_scale = 0;  // RenoiseScale
    std::uint8_t inner_step = 0;     // InnerStepMode
    std::vector<double> weights;

    ConvNet restore_net() const;
};

struct CheckpointError : std::runtime_error {
    enum class Code { io, bad_magic, bad_version, truncated, kind_mismatch, inconsistent };
    Code code;
    CheckpointError(Code c, const std::string& what) : std::runtime_error(what), code(c) {}
};

// Atomic write (temp file + rename).
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

Checkpoint load_checkpoint(const std::string& path);
Checkpoint load_checkpoint(const std::string& path, ModelKind expected);

// FNV-1a over the raw little-endian bytes of the parameter blob.
std::uint64_t weight_hash(std::span<const double> weights);

}  // namespace rddpm

#endif  // RDDPM_CHECKPOINT_HPP
