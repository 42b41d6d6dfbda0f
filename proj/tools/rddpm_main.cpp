#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "rddpm/checkpoint.hpp"
#include "rddpm/config.hpp"
#include "rddpm/image_io.hpp"
#include "rddpm/pipeline.hpp"

namespace {

using rddpm::ExperimentConfig;

// Every config key doubles as a CLI flag. Values are collected as strings and
// funneled through the same key=value parser as the config file; explicit
// flags override the file regardless of argument order.
struct ConfigCli {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;

    void attach(CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value config file");
        static const char* keys[] = {
            "data_dir",     "out_dir",        "train_images",   "test_images",
            "image_size",   "min_shapes",     "max_shapes",     "min_intensity",
            "max_intensity", "sigma",         "T",              "beta_start",
            "beta_end",     "t0",             "t_max",          "inner_iters",
            "baseline_lr",  "baseline_batch", "baseline_epochs", "ddpm_lr",
            "ddpm_batch",   "ddpm_epochs",    "theta_lr",       "theta_batch",
            "theta_outer_iters", "crop",      "net_width",      "net_hidden",
            "reverse_coef", "renoise_scale",  "inner_step",     "seed",
        };
        for (const char* key : keys) {
            std::string flag = "--" + std::string(key);
            for (auto& c : flag)
                if (c == '_') c = '-';
            sub->add_option_function<std::string>(
                flag,
                [this, key](const std::string& v) { overrides.emplace_back(key, v); },
                std::string("config key ") + key);
        }
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg;
        if (!config_path.empty()) rddpm::load_config_file(config_path, cfg);
        for (const auto& [k, v] : overrides) rddpm::apply_config_kv(cfg, k, v);
        cfg.validate();
        return cfg;
    }
};

void echo_config(const ExperimentConfig& cfg, const std::string& dir, const std::string& verb) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    rddpm::write_config((std::filesystem::path(dir) / ("config_" + verb + ".txt")).string(), cfg);
}

int run(int argc, char** argv) {
    CLI::App app{"Rician-noise-aware diffusion denoising for synthetic MR phantoms"};
    app.require_subcommand(1);

    ConfigCli synth_cfg, tb_cfg, td_cfg, tt_cfg, dn_cfg, ev_cfg;

    auto* synth = app.add_subcommand("synth", "generate the paired phantom dataset");
    synth_cfg.attach(synth);

    auto* tb = app.add_subcommand("train-baseline", "train the supervised denoiser");
    tb_cfg.attach(tb);

    auto* td = app.add_subcommand("train-ddpm", "train the diffusion noise predictor");
    td_cfg.attach(td);
    std::string td_baseline;
    td->add_option("--baseline", td_baseline, "baseline checkpoint (default <out_dir>/baseline.ckpt)");

    auto* tt = app.add_subcommand("train-rddpm", "train the squared-domain conversion net");
    tt_cfg.attach(tt);
    std::string tt_baseline;
    tt->add_option("--baseline", tt_baseline, "baseline checkpoint (default <out_dir>/baseline.ckpt)");

    auto* dn = app.add_subcommand("denoise", "denoise one image with a trained model");
    dn_cfg.attach(dn);
    std::string dn_input, dn_output, dn_method = "rddpm";
    std::string dn_baseline, dn_ddpm, dn_theta;
    dn->add_option("--input", dn_input, "input image (.pgm or .f64)")->required();
    dn->add_option("--output", dn_output, "output image (.pgm or .f64)")->required();
    dn->add_option("--method", dn_method, "baseline | ddpm | rddpm");
    dn->add_option("--baseline", dn_baseline, "baseline checkpoint");
    dn->add_option("--ddpm", dn_ddpm, "ddpm checkpoint");
    dn->add_option("--theta", dn_theta, "theta checkpoint");

    auto* ev = app.add_subcommand("evaluate", "score the test split and write the CSV report");
    ev_cfg.attach(ev);
    std::string ev_baseline, ev_ddpm, ev_theta;
    ev->add_option("--baseline", ev_baseline, "baseline checkpoint");
    ev->add_option("--ddpm", ev_ddpm, "ddpm checkpoint");
    ev->add_option("--theta", ev_theta, "theta checkpoint");

    auto* ins = app.add_subcommand("inspect-checkpoint", "print checkpoint metadata");
    std::string ins_path;
    ins->add_option("path", ins_path, "checkpoint file")->required();

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) {
        const ExperimentConfig cfg = synth_cfg.resolve();
        rddpm::generate_phantom_dataset(cfg);
        echo_config(cfg, cfg.data_dir, "synth");
        std::printf("wrote %d train + %d test pairs under %s\n", cfg.train_images,
                    cfg.test_images, cfg.data_dir.c_str());
    } else if (tb->parsed()) {
        const ExperimentConfig cfg = tb_cfg.resolve();
        echo_config(cfg, cfg.out_dir, "train_baseline");
        const std::string path = rddpm::train_baseline(cfg);
        std::printf("baseline checkpoint: %s\n", path.c_str());
    } else if (td->parsed()) {
        const ExperimentConfig cfg = td_cfg.resolve();
        echo_config(cfg, cfg.out_dir, "train_ddpm");
        const std::string base =
            td_baseline.empty() ? rddpm::baseline_ckpt_path(cfg) : td_baseline;
        const std::string path = rddpm::train_diffusion(cfg, base);
        std::printf("ddpm checkpoint: %s\n", path.c_str());
    } else if (tt->parsed()) {
        const ExperimentConfig cfg = tt_cfg.resolve();
        echo_config(cfg, cfg.out_dir, "train_rddpm");
        const std::string base =
            tt_baseline.empty() ? rddpm::baseline_ckpt_path(cfg) : tt_baseline;
        const std::string path = rddpm::train_rddpm_theta(cfg, base);
        std::printf("theta checkpoint: %s\n", path.c_str());
    } else if (dn->parsed()) {
        const ExperimentConfig cfg = dn_cfg.resolve();
        echo_config(cfg, cfg.out_dir, "denoise");
        const rddpm::Image noisy = rddpm::read_image(dn_input);
        rddpm::Image out;
        if (dn_method == "baseline") {
            const auto ckpt = rddpm::load_checkpoint(
                dn_baseline.empty() ? rddpm::baseline_ckpt_path(cfg) : dn_baseline,
                rddpm::ModelKind::baseline);
            out = rddpm::denoise_with_baseline(ckpt, noisy);
        } else if (dn_method == "ddpm") {
            const auto ckpt = rddpm::load_checkpoint(
                dn_ddpm.empty() ? rddpm::ddpm_ckpt_path(cfg) : dn_ddpm, rddpm::ModelKind::ddpm);
            out = rddpm::denoise_with_ddpm(cfg, ckpt, noisy, cfg.seed);
        } else if (dn_method == "rddpm") {
            const auto theta = rddpm::load_checkpoint(
                dn_theta.empty() ? rddpm::theta_ckpt_path(cfg) : dn_theta,
                rddpm::ModelKind::theta);
            const auto ddpm = rddpm::load_checkpoint(
                dn_ddpm.empty() ? rddpm::ddpm_ckpt_path(cfg) : dn_ddpm, rddpm::ModelKind::ddpm);
            out = rddpm::denoise_with_rddpm(cfg, theta, ddpm, noisy, cfg.seed);
        } else {
            throw std::invalid_argument("denoise: unknown method '" + dn_method +
                                        "' (expected baseline | ddpm | rddpm)");
        }
        rddpm::write_image(dn_output, out);
        std::printf("wrote %s\n", dn_output.c_str());
    } else if (ev->parsed()) {
        const ExperimentConfig cfg = ev_cfg.resolve();
        echo_config(cfg, cfg.out_dir, "evaluate");
        rddpm::EvalCheckpoints ckpts;
        ckpts.baseline = ev_baseline.empty() ? rddpm::baseline_ckpt_path(cfg) : ev_baseline;
        ckpts.ddpm = ev_ddpm.empty() ? rddpm::ddpm_ckpt_path(cfg) : ev_ddpm;
        ckpts.theta = ev_theta.empty() ? rddpm::theta_ckpt_path(cfg) : ev_theta;
        const std::string csv = rddpm::evaluate(cfg, ckpts);
        std::printf("report: %s\n", csv.c_str());
    } else if (ins->parsed()) {
        const rddpm::Checkpoint c = rddpm::load_checkpoint(ins_path);
        std::printf("kind: %s\n", rddpm::to_string(c.kind).c_str());
        std::printf("channels:");
        for (int ch : c.net.channels) std::printf(" %d", ch);
        std::printf("\nresidual: %s\n", c.net.residual ? "yes" : "no");
        std::printf("time_embed_dim: %d\n", c.net.time_embed_dim);
        if (c.T > 0)
            std::printf("schedule: T=%d beta=[%g, %g]\n", c.T, c.beta_start, c.beta_end);
        else
            std::printf("schedule: none\n");
        std::printf("steps: %llu\n", static_cast<unsigned long long>(c.steps));
        std::printf("final_loss: %.17g\n", c.final_loss);
        std::printf("seed: %llu\n", static_cast<unsigned long long>(c.seed));
        std::printf("modes: reverse_coef=%s renoise_scale=%s inner_step=%s\n",
                    c.reverse_coef ? "paper" : "standard",
                    c.renoise_scale ? "consistent" : "paper",
                    c.inner_step ? "literal" : "per-sample");
        std::printf("params: %llu (hash %016llx)\n",
                    static_cast<unsigned long long>(c.weights.size()),
                    static_cast<unsigned long long>(rddpm::weight_hash(c.weights)));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const rddpm::TrainDiverged& e) {
        std::fprintf(stderr, "training diverged: %s\n", e.what());
        return 5;
    } catch (const rddpm::CheckpointError& e) {
        std::fprintf(stderr, "checkpoint error: %s\n", e.what());
        return 4;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
