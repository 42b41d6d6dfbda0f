#include "rddpm/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace rddpm {

static_assert(std::endian::native == std::endian::little,
              "checkpoints are written via memcpy and assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'R', 'D', 'P', 'M'};
constexpr std::uint32_t kVersion = 1;

using Code = CheckpointError::Code;

struct Writer {
    std::ofstream out;
    explicit Writer(const std::string& path) : out(path, std::ios::binary | std::ios::trunc) {
        if (!out) throw CheckpointError(Code::io, path + ": cannot open for writing");
    }
    void bytes(const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }
    template <class T>
    void scalar(T v) {
        bytes(&v, sizeof(T));
    }
};

struct Reader {
    std::ifstream in;
    std::string path;
    explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
        if (!in) throw CheckpointError(Code::io, p + ": cannot open for reading");
    }
    void bytes(void* p, std::size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in) throw CheckpointError(Code::truncated, path + ": checkpoint file is truncated");
    }
    template <class T>
    T scalar() {
        T v;
        bytes(&v, sizeof(T));
        return v;
    }
};

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::baseline: return "baseline";
        case ModelKind::ddpm: return "ddpm";
        case ModelKind::theta: return "theta";
    }
    return "unknown";
}

ConvNet Checkpoint::restore_net() const {
    ConvNet n(net);
    if (weights.size() != n.param_count())
        throw CheckpointError(Code::inconsistent,
                              "checkpoint weight blob does not match the net layout (" +
                                  std::to_string(weights.size()) + " vs " +
                                  std::to_string(n.param_count()) + " parameters)");
    std::copy(weights.begin(), weights.end(), n.params().begin());
    return n;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    if (ckpt.weights.size() != ckpt.net.param_count())
        throw CheckpointError(Code::inconsistent,
                              path + ": weight blob length " + std::to_string(ckpt.weights.size()) +
                                  " does not match the net spec (" +
                                  std::to_string(ckpt.net.param_count()) + " parameters)");
    const std::string tmp = path + ".tmp";
    {
        Writer w(tmp);
        w.bytes(kMagic, 4);
        w.scalar<std::uint32_t>(kVersion);
        w.scalar<std::uint32_t>(static_cast<std::uint32_t>(ckpt.kind));
        w.scalar<std::uint32_t>(static_cast<std::uint32_t>(ckpt.net.channels.size()));
        for (int c : ckpt.net.channels) w.scalar<std::uint32_t>(static_cast<std::uint32_t>(c));
        w.scalar<std::uint32_t>(ckpt.net.residual ? 1u : 0u);
        w.scalar<std::uint32_t>(static_cast<std::uint32_t>(ckpt.net.time_embed_dim));
        w.scalar<std::uint32_t>(static_cast<std::uint32_t>(ckpt.T));
        w.scalar<double>(ckpt.beta_start);
        w.scalar<double>(ckpt.beta_end);
        w.scalar<std::uint64_t>(ckpt.steps);
        w.scalar<double>(ckpt.final_loss);
        w.scalar<std::uint64_t>(ckpt.seed);
        w.scalar<std::uint8_t>(ckpt.reverse_coef);
        w.scalar<std::uint8_t>(ckpt.renoise_scale);
        w.scalar<std::uint8_t>(ckpt.inner_step);
        w.scalar<std::uint8_t>(0);  // pad
        w.scalar<std::uint64_t>(static_cast<std::uint64_t>(ckpt.weights.size()));
        w.bytes(ckpt.weights.data(), ckpt.weights.size() * sizeof(double));
        if (!w.out.flush()) throw CheckpointError(Code::io, tmp + ": write failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw CheckpointError(Code::io, path + ": rename failed: " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointError(Code::bad_magic, path + ": not a checkpoint file (bad magic)");
    const auto version = r.scalar<std::uint32_t>();
    if (version != kVersion)
        throw CheckpointError(Code::bad_version, path + ": unsupported checkpoint version " +
                                                     std::to_string(version) + " (expected " +
                                                     std::to_string(kVersion) + ")");
    Checkpoint c;
    const auto kind = r.scalar<std::uint32_t>();
    if (kind > 2)
        throw CheckpointError(Code::inconsistent,
                              path + ": unknown model kind " + std::to_string(kind));
    c.kind = static_cast<ModelKind>(kind);
    const auto n_channels = r.scalar<std::uint32_t>();
    if (n_channels < 2 || n_channels > 64)
        throw CheckpointError(Code::inconsistent, path + ": implausible channel count");
    c.net.channels.resize(n_channels);
    for (auto& ch : c.net.channels) ch = static_cast<int>(r.scalar<std::uint32_t>());
    c.net.residual = r.scalar<std::uint32_t>() != 0;
    c.net.time_embed_dim = static_cast<int>(r.scalar<std::uint32_t>());
    c.T = static_cast<int>(r.scalar<std::uint32_t>());
    c.beta_start = r.scalar<double>();
    c.beta_end = r.scalar<double>();
    c.steps = r.scalar<std::uint64_t>();
    c.final_loss = r.scalar<double>();
    c.seed = r.scalar<std::uint64_t>();
    c.reverse_coef = r.scalar<std::uint8_t>();
    c.renoise_scale = r.scalar<std::uint8_t>();
    c.inner_step = r.scalar<std::uint8_t>();
    r.scalar<std::uint8_t>();  // pad
    const auto count = r.scalar<std::uint64_t>();
    c.net.validate();
    if (count != c.net.param_count())
        throw CheckpointError(Code::inconsistent,
                              path + ": weight blob length does not match the net spec");
    c.weights.resize(count);
    r.bytes(c.weights.data(), count * sizeof(double));
    return c;
}

Checkpoint load_checkpoint(const std::string& path, ModelKind expected) {
    Checkpoint c = load_checkpoint(path);
    if (c.kind != expected)
        throw CheckpointError(Code::kind_mismatch, path + ": expected a " + to_string(expected) +
                                                       " checkpoint but found " +
                                                       to_string(c.kind));
    return c;
}

std::uint64_t weight_hash(std::span<const double> weights) {
    std::uint64_t h = 1469598103934665603ULL;
    for (double v : weights) {
        unsigned char b[sizeof(double)];
        std::memcpy(b, &v, sizeof(double));
        for (unsigned char byte : b) {
            h ^= byte;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

}  // namespace rddpm
