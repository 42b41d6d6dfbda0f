#include "rddpm/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rddpm/diffusion.hpp"
#include "rddpm/image_io.hpp"
#include "rddpm/metrics.hpp"
#include "rddpm/noise.hpp"
#include "rddpm/rddpm.hpp"

namespace rddpm {

namespace {

namespace fs = std::filesystem;

// fixed stream salts so every stage draws from its own deterministic stream
constexpr std::uint64_t kSaltNoise = 0x6e6f697365ULL;
constexpr std::uint64_t kSaltBaselineInit = 0x62617365ULL;
constexpr std::uint64_t kSaltBaselineTrain = 0x62747261696eULL;
constexpr std::uint64_t kSaltDdpmInit = 0x6464706dULL;
constexpr std::uint64_t kSaltDdpmTrain = 0x64747261696eULL;
constexpr std::uint64_t kSaltThetaInit = 0x7468657461ULL;
constexpr std::uint64_t kSaltThetaTrain = 0x74747261696eULL;
constexpr std::uint64_t kSaltEval = 0x6576616cULL;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt, std::uint64_t index = 0) {
    std::uint64_t state = master ^ salt;
    splitmix64(state);
    state ^= index;
    std::uint64_t out = splitmix64(state);
    return splitmix64(out);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string index_name(const char* prefix, std::uint64_t index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%04llu.f64", prefix,
                  static_cast<unsigned long long>(index));
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error(dir + ": cannot create directory: " + ec.message());
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.below(i)]);
}

Image random_crop(const Image& img, int crop, Rng& rng) {
    if (crop <= 0 || crop >= img.width() || crop >= img.height()) return img;
    const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height() - crop + 1)));
    const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width() - crop + 1)));
    Image out(crop, crop);
    for (int y = 0; y < crop; ++y)
        for (int x = 0; x < crop; ++x) out.at(y, x) = img.at(y0 + y, x0 + x);
    return out;
}

struct LossCsv {
    std::ofstream out;
    LossCsv(const std::string& path, const char* index_col) : out(path, std::ios::trunc) {
        if (!out) throw std::runtime_error(path + ": cannot open for writing");
        out << index_col << ",loss\n";
    }
    void row(long step, double loss) { out << step << "," << format_double(loss) << "\n"; }
};

Checkpoint make_checkpoint(ModelKind kind, const ConvNet& net, const ExperimentConfig& cfg,
                           bool with_schedule, std::uint64_t steps, double final_loss) {
    Checkpoint c;
    c.kind = kind;
    c.net = net.spec();
    if (with_schedule) {
        c.T = cfg.T;
        c.beta_start = cfg.beta_start;
        c.beta_end = cfg.beta_end;
    }
    c.steps = steps;
    c.final_loss = final_loss;
    c.seed = cfg.seed;
    c.reverse_coef = cfg.reverse_coef_mode() == ReverseCoef::standard ? 0 : 1;
    c.renoise_scale = cfg.renoise_scale_mode() == RenoiseScale::paper ? 0 : 1;
    c.inner_step = cfg.inner_step_mode() == InnerStepMode::per_sample ? 0 : 1;
    c.weights.assign(net.params().begin(), net.params().end());
    return c;
}

NoiseSchedule schedule_from(const Checkpoint& c) {
    if (c.T < 1)
        throw CheckpointError(CheckpointError::Code::inconsistent,
                              "checkpoint carries no noise schedule");
    return make_schedule(c.T, c.beta_start, c.beta_end);
}

}  // namespace

void save_manifest(const std::string& path, const Manifest& m) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "split = " << m.split << "\n";
    out << "master_seed = " << m.master_seed << "\n";
    out << "sigma = " << format_double(m.sigma) << "\n";
    for (const auto& e : m.entries)
        out << "image = " << e.index << " " << e.seed << " " << e.clean_file << " " << e.noisy_file
            << "\n";
    if (!out) throw std::runtime_error(path + ": write failed");
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open manifest");
    Manifest m;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key, eq;
        ls >> key >> eq;
        if (eq != "=")
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        if (key == "split") {
            ls >> m.split;
        } else if (key == "master_seed") {
            ls >> m.master_seed;
        } else if (key == "sigma") {
            ls >> m.sigma;
        } else if (key == "image") {
            ManifestEntry e;
            ls >> e.index >> e.seed >> e.clean_file >> e.noisy_file;
            if (!ls)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": malformed image entry");
            m.entries.push_back(std::move(e));
        } else {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unknown manifest key '" + key + "'");
        }
    }
    return m;
}

std::vector<ImagePair> load_pairs(const std::string& dataset_dir, const Manifest& m) {
    std::vector<ImagePair> pairs;
    pairs.reserve(m.entries.size());
    for (const auto& e : m.entries) {
        ImagePair p;
        p.clean = read_f64((fs::path(dataset_dir) / e.clean_file).string());
        p.noisy = read_f64((fs::path(dataset_dir) / e.noisy_file).string());
        pairs.push_back(std::move(p));
    }
    return pairs;
}

std::string train_manifest_path(const ExperimentConfig& cfg) {
    return (fs::path(cfg.data_dir) / "manifest_train.txt").string();
}
std::string test_manifest_path(const ExperimentConfig& cfg) {
    return (fs::path(cfg.data_dir) / "manifest_test.txt").string();
}
std::string baseline_ckpt_path(const ExperimentConfig& cfg) {
    return (fs::path(cfg.out_dir) / "baseline.ckpt").string();
}
std::string ddpm_ckpt_path(const ExperimentConfig& cfg) {
    return (fs::path(cfg.out_dir) / "ddpm.ckpt").string();
}
std::string theta_ckpt_path(const ExperimentConfig& cfg) {
    return (fs::path(cfg.out_dir) / "theta.ckpt").string();
}
std::string report_csv_path(const ExperimentConfig& cfg) {
    return (fs::path(cfg.out_dir) / "report.csv").string();
}

void generate_phantom_dataset(const ExperimentConfig& cfg) {
    cfg.validate();
    ensure_dir(cfg.data_dir);
    const PhantomSpec pspec = cfg.phantom_spec();
    const NoiseSource src = NoiseSource::make_gaussian(cfg.sigma);

    auto emit_split = [&](const char* split, std::uint64_t first, int count) {
        Manifest m;
        m.split = split;
        m.master_seed = cfg.seed;
        m.sigma = cfg.sigma;
        for (int i = 0; i < count; ++i) {
            const std::uint64_t index = first + static_cast<std::uint64_t>(i);
            ManifestEntry e;
            e.index = index;
            e.seed = phantom_image_seed(cfg.seed, index);
            e.clean_file = index_name("clean", index);
            e.noisy_file = index_name("noisy", index);

            const Image clean = render_phantom(pspec, index);
            Rng noise_rng(derive_seed(cfg.seed, kSaltNoise, index));
            const Image noisy = synth_sodium(clean, src, noise_rng);
            write_f64((fs::path(cfg.data_dir) / e.clean_file).string(), clean);
            write_f64((fs::path(cfg.data_dir) / e.noisy_file).string(), noisy);
            m.entries.push_back(std::move(e));
        }
        save_manifest((fs::path(cfg.data_dir) / (std::string("manifest_") + split + ".txt")).string(),
                      m);
    };

    emit_split("train", 0, cfg.train_images);
    emit_split("test", static_cast<std::uint64_t>(cfg.train_images), cfg.test_images);
}

std::vector<Image> baseline_outputs(const Checkpoint& baseline, const std::vector<ImagePair>& pairs) {
    const ConvNet net = baseline.restore_net();
    std::vector<Image> outs;
    outs.reserve(pairs.size());
    for (const auto& p : pairs) outs.push_back(net.forward_image(p.noisy, 1));
    return outs;
}

std::string train_baseline(const ExperimentConfig& cfg) {
    cfg.validate();
    ensure_dir(cfg.out_dir);
    const Manifest m = load_manifest(train_manifest_path(cfg));
    const std::vector<ImagePair> pairs = load_pairs(cfg.data_dir, m);
    if (pairs.empty()) throw std::runtime_error("train_baseline: empty training manifest");

    Rng init_rng(derive_seed(cfg.seed, kSaltBaselineInit));
    ConvNet net = ConvNet::kaiming(cfg.baseline_net_spec(), init_rng);
    AdamState opt(net.param_count(), AdamHyper{.lr = cfg.baseline_lr});
    std::vector<double> grads;

    Rng rng(derive_seed(cfg.seed, kSaltBaselineTrain));
    LossCsv csv((fs::path(cfg.out_dir) / "baseline_loss.csv").string(), "epoch");

    std::vector<double> last_good(net.params().begin(), net.params().end());
    const std::string path = baseline_ckpt_path(cfg);
    std::uint64_t total_steps = 0;
    double epoch_mean = 0.0;

    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 1; epoch <= cfg.baseline_epochs; ++epoch) {
        shuffle_indices(order, rng);
        double sum = 0.0;
        int steps = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.baseline_batch)) {
            std::vector<Image> in, target;
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.baseline_batch));
            for (std::size_t k = start; k < stop; ++k) {
                const auto& p = pairs[order[k]];
                // identical crop window for input and target
                Rng crop_rng(rng.next_u64());
                Rng crop_rng2 = crop_rng;
                in.push_back(random_crop(p.noisy, cfg.crop, crop_rng));
                target.push_back(random_crop(p.clean, cfg.crop, crop_rng2));
            }
            const double loss = loss_and_grads(net, to_tensor(in), 1, to_tensor(target), grads);
            if (!std::isfinite(loss)) {
                Checkpoint c = make_checkpoint(ModelKind::baseline, net, cfg, false, total_steps,
                                               std::numeric_limits<double>::quiet_NaN());
                c.weights = last_good;
                save_checkpoint(path, c);
                throw TrainDiverged(
                    "train_baseline: non-finite loss at step " + std::to_string(total_steps + 1) +
                        "; checkpoint of the last finite state retained at " + path,
                    path);
            }
            adam_step(net.params(), grads, opt);
            last_good.assign(net.params().begin(), net.params().end());
            sum += loss;
            ++steps;
            ++total_steps;
        }
        epoch_mean = sum / std::max(steps, 1);
        csv.row(epoch, epoch_mean);
    }

    save_checkpoint(path,
                    make_checkpoint(ModelKind::baseline, net, cfg, false, total_steps, epoch_mean));
    return path;
}

std::string train_diffusion(const ExperimentConfig& cfg, const std::string& baseline_ckpt) {
    cfg.validate();
    ensure_dir(cfg.out_dir);
    const Manifest m = load_manifest(train_manifest_path(cfg));
    const std::vector<ImagePair> pairs = load_pairs(cfg.data_dir, m);
    if (pairs.empty()) throw std::runtime_error("train_diffusion: empty training manifest");
    const Checkpoint base = load_checkpoint(baseline_ckpt, ModelKind::baseline);
    const std::vector<Image> x0s = baseline_outputs(base, pairs);

    Rng init_rng(derive_seed(cfg.seed, kSaltDdpmInit));
    DdpmTrainer tr({ConvNet::kaiming(cfg.ddpm_net_spec(), init_rng),
                    make_schedule(cfg.T, cfg.beta_start, cfg.beta_end)},
                   cfg.ddpm_lr);

    Rng rng(derive_seed(cfg.seed, kSaltDdpmTrain));
    LossCsv csv((fs::path(cfg.out_dir) / "ddpm_loss.csv").string(), "epoch");

    std::vector<double> last_good(tr.model.net.params().begin(), tr.model.net.params().end());
    const std::string path = ddpm_ckpt_path(cfg);
    std::uint64_t total_steps = 0;
    double epoch_mean = 0.0;

    std::vector<std::size_t> order(x0s.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 1; epoch <= cfg.ddpm_epochs; ++epoch) {
        shuffle_indices(order, rng);
        double sum = 0.0;
        int steps = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.ddpm_batch)) {
            std::vector<Image> batch;
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.ddpm_batch));
            for (std::size_t k = start; k < stop; ++k)
                batch.push_back(random_crop(x0s[order[k]], cfg.crop, rng));
            double loss = 0.0;
            try {
                loss = ddpm_train_step(tr, batch, rng);
            } catch (const std::runtime_error& e) {
                Checkpoint c = make_checkpoint(ModelKind::ddpm, tr.model.net, cfg, true,
                                               total_steps, std::numeric_limits<double>::quiet_NaN());
                c.weights = last_good;
                save_checkpoint(path, c);
                throw TrainDiverged(std::string("train_diffusion: ") + e.what() +
                                        "; checkpoint of the last finite state retained at " + path,
                                    path);
            }
            last_good.assign(tr.model.net.params().begin(), tr.model.net.params().end());
            sum += loss;
            ++steps;
            ++total_steps;
        }
        epoch_mean = sum / std::max(steps, 1);
        csv.row(epoch, epoch_mean);
    }

    save_checkpoint(
        path, make_checkpoint(ModelKind::ddpm, tr.model.net, cfg, true, total_steps, epoch_mean));
    return path;
}

std::string train_rddpm_theta(const ExperimentConfig& cfg, const std::string& baseline_ckpt) {
    cfg.validate();
    ensure_dir(cfg.out_dir);
    const Manifest m = load_manifest(train_manifest_path(cfg));
    const std::vector<ImagePair> pairs = load_pairs(cfg.data_dir, m);
    if (pairs.empty()) throw std::runtime_error("train_rddpm_theta: empty training manifest");
    const Checkpoint base = load_checkpoint(baseline_ckpt, ModelKind::baseline);
    const std::vector<Image> x0s = baseline_outputs(base, pairs);

    Rng init_rng(derive_seed(cfg.seed, kSaltThetaInit));
    RddpmTrainConfig tcfg;
    tcfg.t_max = cfg.t_max;
    tcfg.inner_iters = cfg.inner_iters;
    tcfg.lr = cfg.theta_lr;
    tcfg.inner_mode = cfg.inner_step_mode();
    ThetaTrainer tr(ConvNet::kaiming(cfg.theta_net_spec(), init_rng),
                    make_schedule(cfg.T, cfg.beta_start, cfg.beta_end), tcfg);

    Rng rng(derive_seed(cfg.seed, kSaltThetaTrain));
    LossCsv csv((fs::path(cfg.out_dir) / "theta_loss.csv").string(), "iter");

    std::vector<double> last_good(tr.net.params().begin(), tr.net.params().end());
    const std::string path = theta_ckpt_path(cfg);
    double last_loss = 0.0;

    std::vector<std::size_t> order(x0s.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t cursor = order.size();  // forces an initial shuffle
    for (int iter = 1; iter <= cfg.theta_outer_iters; ++iter) {
        std::vector<Image> batch;
        for (int k = 0; k < cfg.theta_batch; ++k) {
            if (cursor >= order.size()) {
                shuffle_indices(order, rng);
                cursor = 0;
            }
            batch.push_back(random_crop(x0s[order[cursor++]], cfg.crop, rng));
        }
        try {
            last_loss = rddpm_train_step(tr, batch, rng);
        } catch (const std::runtime_error& e) {
            Checkpoint c = make_checkpoint(ModelKind::theta, tr.net, cfg, true,
                                           static_cast<std::uint64_t>(iter - 1),
                                           std::numeric_limits<double>::quiet_NaN());
            c.weights = last_good;
            save_checkpoint(path, c);
            throw TrainDiverged(std::string("train_rddpm_theta: ") + e.what() +
                                    "; checkpoint of the last finite state retained at " + path,
                                path);
        }
        last_good.assign(tr.net.params().begin(), tr.net.params().end());
        csv.row(iter, last_loss);
    }

    save_checkpoint(path, make_checkpoint(ModelKind::theta, tr.net, cfg, true,
                                          static_cast<std::uint64_t>(cfg.theta_outer_iters),
                                          last_loss));
    return path;
}

Image denoise_with_baseline(const Checkpoint& baseline, const Image& noisy) {
    if (baseline.kind != ModelKind::baseline)
        throw CheckpointError(CheckpointError::Code::kind_mismatch,
                              "denoise: expected a baseline checkpoint");
    Image out = baseline.restore_net().forward_image(noisy, 1);
    out.clamp(0.0, 1.0);
    return out;
}

Image denoise_with_ddpm(const ExperimentConfig& cfg, const Checkpoint& ddpm, const Image& noisy,
                        std::uint64_t seed) {
    if (ddpm.kind != ModelKind::ddpm)
        throw CheckpointError(CheckpointError::Code::kind_mismatch,
                              "denoise: expected a ddpm checkpoint");
    DdpmModel model{ddpm.restore_net(), schedule_from(ddpm)};
    Rng rng(seed);
    return ddpm_denoise_from(model, noisy, cfg.t0, rng, cfg.reverse_coef_mode());
}

Image denoise_with_rddpm(const ExperimentConfig& cfg, const Checkpoint& theta,
                         const Checkpoint& ddpm, const Image& noisy, std::uint64_t seed) {
    if (theta.kind != ModelKind::theta)
        throw CheckpointError(CheckpointError::Code::kind_mismatch,
                              "denoise: expected a theta checkpoint");
    if (ddpm.kind != ModelKind::ddpm)
        throw CheckpointError(CheckpointError::Code::kind_mismatch,
                              "denoise: expected a ddpm checkpoint");
    if (theta.T != ddpm.T || theta.beta_start != ddpm.beta_start || theta.beta_end != ddpm.beta_end)
        throw CheckpointError(CheckpointError::Code::inconsistent,
                              "denoise: theta and ddpm checkpoints carry different schedules");
    RddpmModel model{theta.restore_net(), DdpmModel{ddpm.restore_net(), schedule_from(ddpm)}};
    RddpmDenoiseOptions opts;
    opts.t0 = cfg.t0;
    opts.coef = cfg.reverse_coef_mode();
    opts.renoise = cfg.renoise_scale_mode();
    Rng rng(seed);
    return rddpm_denoise(model, noisy, opts, rng);
}

std::string evaluate(const ExperimentConfig& cfg, const EvalCheckpoints& ckpts) {
    cfg.validate();
    ensure_dir(cfg.out_dir);

    const char* names[3] = {"baseline", "ddpm", "theta"};
    const std::string* paths[3] = {&ckpts.baseline, &ckpts.ddpm, &ckpts.theta};
    std::string missing;
    for (int i = 0; i < 3; ++i) {
        if (paths[i]->empty() || !fs::exists(*paths[i])) {
            if (!missing.empty()) missing += ", ";
            missing += names[i];
            missing += " (";
            missing += paths[i]->empty() ? "no path given" : *paths[i];
            missing += ")";
        }
    }
    if (!missing.empty()) throw std::runtime_error("evaluate: missing checkpoints: " + missing);

    const Checkpoint base = load_checkpoint(ckpts.baseline, ModelKind::baseline);
    const Checkpoint ddpm = load_checkpoint(ckpts.ddpm, ModelKind::ddpm);
    const Checkpoint theta = load_checkpoint(ckpts.theta, ModelKind::theta);
    if (cfg.t0 > ddpm.T)
        throw std::invalid_argument("evaluate: t0 exceeds the checkpoint schedule length");

    const Manifest m = load_manifest(test_manifest_path(cfg));
    const std::vector<ImagePair> pairs = load_pairs(cfg.data_dir, m);
    if (pairs.empty()) throw std::runtime_error("evaluate: empty test manifest");

    const std::string eval_dir = (fs::path(cfg.out_dir) / "eval").string();
    ensure_dir(eval_dir);

    static const char* kMethods[4] = {"noisy", "baseline", "ddpm", "rddpm"};
    constexpr int kCols = 2 + 36;  // psnr, ssim, brisque features
    std::vector<std::array<double, kCols>> rows[4];

    const std::string csv_path = report_csv_path(cfg);
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw std::runtime_error(csv_path + ": cannot open for writing");
    csv << "method,image,psnr,ssim";
    for (int i = 0; i < 36; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), ",brisque_%02d", i);
        csv << buf;
    }
    csv << "\n";

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::uint64_t index = m.entries[i].index;
        const Image& clean = pairs[i].clean;
        const Image& noisy = pairs[i].noisy;

        Image outputs[4];
        outputs[0] = noisy;
        outputs[0].clamp(0.0, 1.0);
        outputs[1] = denoise_with_baseline(base, noisy);
        outputs[2] = denoise_with_ddpm(cfg, ddpm, noisy, derive_seed(cfg.seed, kSaltEval, index * 4 + 2));
        outputs[3] = denoise_with_rddpm(cfg, theta, ddpm, noisy,
                                        derive_seed(cfg.seed, kSaltEval, index * 4 + 3));

        for (int mth = 0; mth < 4; ++mth) {
            char name[64];
            std::snprintf(name, sizeof(name), "%s_%04llu.pgm", kMethods[mth],
                          static_cast<unsigned long long>(index));
            write_pgm16((fs::path(eval_dir) / name).string(), outputs[mth]);

            std::array<double, kCols> row{};
            row[0] = psnr(clean, outputs[mth]);
            row[1] = ssim(clean, outputs[mth]);
            const auto feats = brisque_features(outputs[mth]);
            std::copy(feats.begin(), feats.end(), row.begin() + 2);
            rows[mth].push_back(row);

            csv << kMethods[mth] << "," << index;
            for (double v : row) csv << "," << format_double(v);
            csv << "\n";
        }
    }

    for (int mth = 0; mth < 4; ++mth) {
        std::array<double, kCols> mean{};
        for (const auto& row : rows[mth])
            for (int c = 0; c < kCols; ++c) mean[c] += row[c];
        for (int c = 0; c < kCols; ++c) mean[c] /= static_cast<double>(rows[mth].size());
        csv << kMethods[mth] << ",mean";
        for (double v : mean) csv << "," << format_double(v);
        csv << "\n";
    }
    if (!csv) throw std::runtime_error(csv_path + ": write failed");
    return csv_path;
}

}  // namespace rddpm
