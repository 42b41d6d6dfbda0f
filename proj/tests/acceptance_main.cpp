// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. All tolerances are pinned here.
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rddpm/checkpoint.hpp"
#include "rddpm/config.hpp"
#include "rddpm/diffusion.hpp"
#include "rddpm/metrics.hpp"
#include "rddpm/net.hpp"
#include "rddpm/noise.hpp"
#include "rddpm/phantom.hpp"
#include "rddpm/pipeline.hpp"
#include "rddpm/rddpm.hpp"
#include "rddpm/rng.hpp"
#include "rddpm/schedule.hpp"
#include "rddpm/tensor.hpp"

using namespace rddpm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

Image normal_image(int w, int h, Rng& rng) {
    Image img(w, h);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = rng.normal();
    return img;
}

// ---------------------------------------------------------------------------
// Criterion 1: reverse-mode gradients vs central finite differences on a
// battery of >= 20 random small nets covering every layer configuration.
Outcome criterion1() {
    const auto start = std::chrono::steady_clock::now();
    struct Case {
        std::vector<int> channels;
        bool residual;
        int ted;
        int batch, size;
    };
    std::vector<Case> cases;
    const std::vector<std::vector<int>> shapes = {
        {1, 1}, {1, 2, 1}, {1, 3, 1}, {1, 4, 2, 1}, {1, 2, 2, 2, 1}, {1, 3, 3, 1}};
    int k = 0;
    for (const auto& ch : shapes)
        for (bool residual : {false, true})
            for (int ted : {0, 6}) {
                cases.push_back({ch, residual, ted, 1 + (k % 2), 4 + (k % 3)});
                ++k;
            }
    // 6 shapes x 2 residual x 2 embeddings = 24 nets
    const double h = 1e-5;
    double worst = 0.0;
    int nets = 0;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const Case& cse = cases[c];
        ConvNet net(NetSpec{cse.channels, cse.residual, cse.ted});
        Rng rng(1000 + c);
        for (double& p : net.params()) p = 0.6 * rng.normal();

        Tensor4 x(cse.batch, 1, cse.size, cse.size);
        Tensor4 target(cse.batch, 1, cse.size, cse.size);
        for (auto& v : x.v) v = rng.normal();
        for (auto& v : target.v) v = rng.normal();
        std::vector<int> ts(cse.batch);
        for (int& t : ts) t = 1 + static_cast<int>(rng.below(40));

        std::vector<double> grads;
        loss_and_grads(net, x, std::span<const int>(ts), target, grads);

        std::span<double> p = net.params();
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double orig = p[i];
            p[i] = orig + h;
            const double lp = mse_loss(net.forward(x, std::span<const int>(ts)), target);
            p[i] = orig - h;
            const double lm = mse_loss(net.forward(x, std::span<const int>(ts)), target);
            p[i] = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double rel =
                std::abs(grads[i] - fd) / std::max({1e-6, std::abs(grads[i]), std::abs(fd)});
            worst = std::max(worst, rel);
        }
        ++nets;
    }
    const double secs = seconds_since(start);
    const bool pass = nets >= 20 && worst <= 1e-4 && secs < 60.0;
    return {pass, fmt("%d nets, max relative gradient error %.3g (limit 1e-4), %.1fs", nets,
                      worst, secs)};
}

// ---------------------------------------------------------------------------
// Criterion 2: Rician second-moment identity and Rayleigh mean at 1e6 samples.
Outcome criterion2() {
    const auto start = std::chrono::steady_clock::now();
    const int n = 1000;  // 1000x1000 = 1e6 samples
    struct Case {
        double S, sigma;
        std::uint64_t seed;
    };
    const Case cases[] = {{0.0, 1.0, 4242}, {0.5, 0.2, 4243}, {1.0, 0.1, 15}};
    bool pass = true;
    std::string detail;
    for (const Case& cse : cases) {
        const Image clean(n, n, cse.S);
        Rng rng(cse.seed);
        const Image noisy = synth_sodium(clean, NoiseSource::make_gaussian(cse.sigma), rng);
        double acc = 0.0;
        for (std::size_t i = 0; i < noisy.size(); ++i)
            acc += noisy[i] * noisy[i] - cse.S * cse.S;
        const double est = acc / static_cast<double>(noisy.size());
        const double want = cse.sigma * cse.sigma;
        const double rel = std::abs(est - want) / want;
        pass = pass && rel <= 0.02;
        detail += fmt("S=%g sigma=%g rel %.4f; ", cse.S, cse.sigma, rel);
    }
    {
        const Image clean(n, n, 0.0);
        Rng r2(3131);
        const Image noisy = synth_sodium(clean, NoiseSource::make_gaussian(1.0), r2);
        double acc = 0.0;
        for (std::size_t i = 0; i < noisy.size(); ++i) acc += noisy[i];
        const double mean = acc / static_cast<double>(noisy.size());
        const double want = std::sqrt(M_PI) / 2.0;  // E[R] for S=0, sigma=1
        pass = pass && std::abs(mean - want) <= 0.003;
        detail += fmt("Rayleigh mean %.5f vs %.5f", mean, want);
    }
    const double secs = seconds_since(start);
    pass = pass && secs < 60.0;
    return {pass, detail + fmt(", %.1fs", secs)};
}

// ---------------------------------------------------------------------------
// Criterion 3: forward-marginal moments, oracle reverse round-trip, schedule
// product identity.
Outcome criterion3() {
    const auto start = std::chrono::steady_clock::now();
    const NoiseSchedule sched = make_schedule(40, 1e-4, 0.02);
    bool pass = true;
    std::string detail;

    // schedule product identity
    double prod = 1.0, worst_prod = 0.0;
    for (int t = 1; t <= sched.T; ++t) {
        const ScheduleEntry e = lookup(sched, t);
        prod *= e.alpha;
        worst_prod = std::max({worst_prod, std::abs(e.alpha_bar - prod),
                               std::abs(e.alpha - (1.0 - e.beta))});
    }
    pass = pass && worst_prod <= 1e-12;
    detail += fmt("schedule identity err %.2g; ", worst_prod);

    // q_sample moments at 1e5 draws
    const double x0v = 0.6;
    const Image x0(1, 1, x0v);
    double worst_mean = 0.0, worst_var = 0.0;
    Rng rng(777);
    for (int t : {1, 10, 25, 40}) {
        const int draws = 100000;
        double s = 0.0, s2 = 0.0;
        Image eps(1, 1);
        for (int d = 0; d < draws; ++d) {
            eps[0] = rng.normal();
            const double v = q_sample(x0, t, eps, sched)[0];
            s += v;
            s2 += v * v;
        }
        const double mean = s / draws;
        const double var = s2 / draws - mean * mean;
        const ScheduleEntry e = lookup(sched, t);
        worst_mean = std::max(worst_mean,
                              std::abs(mean - std::sqrt(e.alpha_bar) * x0v) /
                                  (std::sqrt(e.alpha_bar) * x0v));
        worst_var = std::max(worst_var, std::abs(var - (1.0 - e.alpha_bar)) / (1.0 - e.alpha_bar));
    }
    pass = pass && worst_mean <= 0.02 && worst_var <= 0.02;
    detail += fmt("moment rel err mean %.4f var %.4f; ", worst_mean, worst_var);

    // per-step oracle reverse recovers x0
    Rng rr(9);
    Image base = normal_image(8, 8, rr);
    for (std::size_t i = 0; i < base.size(); ++i) base[i] = 0.1 + 0.8 * std::abs(base[i]) / 3.0;
    double worst_rt = 0.0;
    for (int t0 : {5, 15, 40}) {
        Image x = q_sample(base, t0, normal_image(8, 8, rr), sched);
        for (int t = t0; t >= 1; --t) {
            const ScheduleEntry e = lookup(sched, t);
            const double sab = std::sqrt(e.alpha_bar);
            const double somb = std::sqrt(1.0 - e.alpha_bar);
            const double noise_coef = (1.0 - e.alpha) / somb;
            const double coef = 1.0 / std::sqrt(e.alpha);
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double eps_oracle = (x[i] - sab * base[i]) / somb;
                x[i] = coef * (x[i] - noise_coef * eps_oracle);
            }
        }
        for (std::size_t i = 0; i < x.size(); ++i)
            worst_rt = std::max(worst_rt, std::abs(x[i] - base[i]));
    }
    pass = pass && worst_rt <= 1e-6;
    detail += fmt("round-trip max err %.2g", worst_rt);

    const double secs = seconds_since(start);
    pass = pass && secs < 60.0;
    return {pass, detail + fmt(", %.1fs", secs)};
}

// ---------------------------------------------------------------------------
// Criterion 4: oracle_subtract is unbiased; a trained conversion net is at
// least as good as the oracle (held-out MSE <= 1.1x) on phantom data.
Outcome criterion4() {
    const auto start = std::chrono::steady_clock::now();
    const NoiseSchedule sched = make_schedule(40, 1e-4, 0.02);
    bool pass = true;
    std::string detail;

    // unbiasedness: mean(oracle_subtract(A^2) - x_t^2) ~ 0, scale 1 - alpha_bar
    double worst_bias = 0.0;
    Rng rng(6001);
    for (int t : {5, 20, 40}) {
        const Image x0(1000, 1000, 0.5);
        const Image x_t = q_sample(x0, t, normal_image(1000, 1000, rng), sched);
        const Image a = make_rician_magnitude_at(x_t, t, sched, rng);
        const Image pred = oracle_subtract(a.squared(), t, sched);
        double acc = 0.0;
        for (std::size_t i = 0; i < pred.size(); ++i) acc += pred[i] - x_t[i] * x_t[i];
        const double scale = 1.0 - lookup(sched, t).alpha_bar;
        worst_bias = std::max(worst_bias, std::abs(acc / static_cast<double>(pred.size())) / scale);
    }
    pass = pass && worst_bias <= 0.02;
    detail += fmt("oracle_subtract worst relative bias %.4f; ", worst_bias);

    // train a conversion net on clean phantoms, compare held-out MSE to oracle
    PhantomSpec pspec;
    pspec.seed = 515;
    std::vector<Image> train, holdout;
    for (int i = 0; i < 12; ++i) train.push_back(render_phantom(pspec, i));
    for (int i = 12; i < 18; ++i) holdout.push_back(render_phantom(pspec, i));

    Rng init(52);
    RddpmTrainConfig tcfg;
    tcfg.t_max = 40;
    tcfg.inner_iters = 20;
    tcfg.lr = 2e-4;
    ThetaTrainer tr(ConvNet::kaiming(NetSpec{{1, 32, 32, 32, 1}, true, 32}, init), sched, tcfg);
    Rng trng(53);
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t cursor = order.size();
    for (int iter = 0; iter < 45; ++iter) {
        std::vector<Image> batch;
        for (int b = 0; b < 6; ++b) {
            if (cursor >= order.size()) {
                for (std::size_t i = order.size(); i > 1; --i)
                    std::swap(order[i - 1], order[trng.below(i)]);
                cursor = 0;
            }
            const Image& src = train[order[cursor++]];
            const int y = static_cast<int>(trng.below(src.height() - 32 + 1));
            const int x = static_cast<int>(trng.below(src.width() - 32 + 1));
            Image crop(32, 32);
            for (int yy = 0; yy < 32; ++yy)
                for (int xx = 0; xx < 32; ++xx) crop.at(yy, xx) = src.at(y + yy, x + xx);
            batch.push_back(std::move(crop));
        }
        rddpm_train_step(tr, batch, trng);
    }

    Rng ha(6100), hb(6100);  // identical draw sequences for both predictors
    const double net_mse = holdout_conversion_mse(net_predictor(tr.net), holdout, 40, sched, 8, ha);
    const double orc_mse =
        holdout_conversion_mse(oracle_predictor(sched), holdout, 40, sched, 8, hb);
    const double ratio = net_mse / orc_mse;
    pass = pass && ratio <= 1.1;
    detail += fmt("held-out conversion MSE net %.4g vs oracle %.4g, ratio %.3f (limit 1.1)",
                  net_mse, orc_mse, ratio);

    const double secs = seconds_since(start);
    pass = pass && secs < 900.0;
    return {pass, detail + fmt(", %.0fs", secs)};
}

// ---------------------------------------------------------------------------
// Criterion 5: denoiser-net weights are bit-frozen across conversion-net
// training and across 100 full denoise calls.
Outcome criterion5() {
    const auto start = std::chrono::steady_clock::now();
    const NoiseSchedule sched = make_schedule(40, 1e-4, 0.02);
    Rng init(71);
    DdpmModel ddpm{ConvNet::kaiming(NetSpec{{1, 16, 16, 1}, false, 32}, init), sched};
    auto hash_of = [](const ConvNet& net) {
        return weight_hash(std::vector<double>(net.params().begin(), net.params().end()));
    };
    const std::uint64_t before = hash_of(ddpm.net);

    PhantomSpec pspec;
    pspec.size = 32;
    pspec.seed = 81;
    std::vector<Image> x0s;
    for (int i = 0; i < 6; ++i) x0s.push_back(render_phantom(pspec, i));

    RddpmTrainConfig tcfg;
    tcfg.t_max = 8;
    tcfg.inner_iters = 5;
    tcfg.lr = 2e-4;
    ThetaTrainer tr(ConvNet::kaiming(NetSpec{{1, 16, 16, 1}, true, 32}, init), sched, tcfg);
    Rng trng(82);
    for (int iter = 0; iter < 4; ++iter) rddpm_train_step(tr, x0s, trng);
    const std::uint64_t after_train = hash_of(ddpm.net);

    RddpmModel model{tr.net, ddpm};
    RddpmDenoiseOptions opts;
    opts.t0 = 5;
    Rng drng(83);
    for (int call = 0; call < 100; ++call) {
        Image a = x0s[call % x0s.size()];
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double nq = 0.1 * drng.normal();  // orthogonal quadrature sample
            a[i] = std::sqrt(a[i] * a[i] + nq * nq);
        }
        rddpm_denoise(model, a, opts, drng);
    }
    const std::uint64_t after_denoise = hash_of(model.ddpm.net);

    const bool pass = before == after_train && before == after_denoise;
    return {pass, fmt("weight hash %016llx unchanged across training and 100 denoise calls, %.0fs",
                      static_cast<unsigned long long>(before), seconds_since(start))};
}

// ---------------------------------------------------------------------------
// shared full-pipeline runner used by criteria 6 and 8
std::map<std::string, std::pair<double, double>> mean_rows(const std::string& csv_path) {
    std::ifstream in(csv_path);
    std::map<std::string, std::pair<double, double>> out;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string method, image, p, s;
        std::getline(ls, method, ',');
        std::getline(ls, image, ',');
        std::getline(ls, p, ',');
        std::getline(ls, s, ',');
        if (image == "mean") out[method] = {std::stod(p), std::stod(s)};
    }
    return out;
}

std::string run_pipeline(const ExperimentConfig& cfg) {
    generate_phantom_dataset(cfg);
    const std::string base = train_baseline(cfg);
    const std::string ddpm = train_diffusion(cfg, base);
    const std::string theta = train_rddpm_theta(cfg, base);
    return evaluate(cfg, EvalCheckpoints{base, ddpm, theta});
}

// Criterion 6: end-to-end desk-scale ranking on 20 held-out 64x64 phantoms,
// Rician sigma = 0.1. The start step and conversion-training range are set to
// the values matched to this noise level (t0 = 5: sqrt(1 - alpha_bar_5) ~
// sigma/sqrt(2); conversion net trained over the timestep range the sampler
// actually visits).
Outcome criterion6(const fs::path& scratch) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.data_dir = (scratch / "c6" / "data").string();
    cfg.out_dir = (scratch / "c6" / "out").string();
    cfg.train_images = 40;
    cfg.test_images = 20;
    cfg.image_size = 64;
    cfg.sigma = 0.1;
    cfg.seed = 7;
    cfg.t0 = 5;
    cfg.t_max = 8;
    cfg.theta_outer_iters = 100;
    cfg.inner_iters = 20;
    cfg.ddpm_epochs = 600;

    const std::string csv = run_pipeline(cfg);
    auto rows = mean_rows(csv);
    const auto [p_noisy, s_noisy] = rows.at("noisy");
    const auto [p_ddpm, s_ddpm] = rows.at("ddpm");
    const auto [p_rddpm, s_rddpm] = rows.at("rddpm");

    // training-health regression on this run: the 100-step moving average of
    // the denoiser loss decays overall and never climbs far above its running
    // minimum (strict monotonicity does not hold for a stochastic loss)
    std::vector<double> epoch_loss;
    {
        std::ifstream in(fs::path(cfg.out_dir) / "ddpm_loss.csv");
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line))
            epoch_loss.push_back(std::stod(line.substr(line.find(',') + 1)));
    }
    // 40 images / batch 10 = 4 steps per epoch, so 25 epochs span 100 steps
    const int win = 25;
    bool loss_ok = epoch_loss.size() >= 2 * win;
    double ma_first = 0.0, ma_last = 0.0, run_min = 1e300;
    for (std::size_t i = 0; loss_ok && i + win <= epoch_loss.size(); ++i) {
        double ma = 0.0;
        for (int k = 0; k < win; ++k) ma += epoch_loss[i + k];
        ma /= win;
        if (i == 0) ma_first = ma;
        ma_last = ma;
        run_min = std::min(run_min, ma);
        loss_ok = loss_ok && ma <= 1.25 * run_min;
    }
    loss_ok = loss_ok && ma_last <= 0.5 * ma_first;

    const double secs = seconds_since(start);
    const bool pass = p_rddpm >= p_ddpm && p_rddpm >= p_noisy + 2.0 && s_rddpm >= s_noisy &&
                      loss_ok && secs <= 1800.0;
    return {pass,
            fmt("PSNR rddpm %.2f >= ddpm %.2f, rddpm >= noisy %.2f + 2 dB; SSIM rddpm %.3f >= "
                "noisy %.3f; denoiser loss 100-step avg %.3f -> %.3f within 1.25x envelope: %s; "
                "%.0fs (limit 1800)",
                p_rddpm, p_ddpm, p_noisy, s_rddpm, s_noisy, ma_first, ma_last,
                loss_ok ? "yes" : "NO", secs)};
}

// ---------------------------------------------------------------------------
// Criterion 7: PSNR/SSIM against brute-force recomputation; AGGD shape
// recovery for Gaussian and Laplace samples.
Outcome criterion7() {
    const auto start = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;

    Rng rng(2077);
    Image ref(40, 40), test(40, 40);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        ref[i] = rng.uniform();
        test[i] = std::min(1.0, std::max(0.0, ref[i] + 0.1 * rng.normal()));
    }

    // brute-force PSNR
    double se = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i)
        se += (ref[i] - test[i]) * (ref[i] - test[i]);
    const double brute_psnr = 10.0 * std::log10(1.0 / (se / static_cast<double>(ref.size())));
    const double psnr_err = std::abs(psnr(ref, test) - brute_psnr);
    pass = pass && psnr_err <= 1e-9;
    detail += fmt("psnr err %.2g; ", psnr_err);

    // brute-force SSIM: direct per-window evaluation with an explicitly
    // normalized 11x11 Gaussian (sd 1.5) and the standard constants
    const int K = 11;
    double win[K * K];
    {
        double sum = 0.0;
        for (int y = 0; y < K; ++y)
            for (int x = 0; x < K; ++x) {
                const double dy = y - (K - 1) / 2.0, dx = x - (K - 1) / 2.0;
                win[y * K + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5));
                sum += win[y * K + x];
            }
        for (double& w : win) w /= sum;
    }
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double total = 0.0;
    int wins = 0;
    for (int y0 = 0; y0 + K <= ref.height(); ++y0)
        for (int x0 = 0; x0 + K <= ref.width(); ++x0) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int y = 0; y < K; ++y)
                for (int x = 0; x < K; ++x) {
                    const double w = win[y * K + x];
                    const double a = ref.at(y0 + y, x0 + x), b = test.at(y0 + y, x0 + x);
                    mx += w * a;
                    my += w * b;
                    sxx += w * a * a;
                    syy += w * b * b;
                    sxy += w * a * b;
                }
            const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cov + c2)) /
                     ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++wins;
        }
    const double ssim_err = std::abs(ssim(ref, test) - total / wins);
    pass = pass && ssim_err <= 1e-9;
    detail += fmt("ssim err %.2g; ", ssim_err);

    // AGGD shape recovery at 1e6 samples
    Rng grng(2078);
    std::vector<double> gauss(1000000), laplace(1000000);
    for (double& v : gauss) v = grng.normal();
    for (double& v : laplace) {
        const double u = grng.uniform() - 0.5;
        v = (u < 0 ? 1.0 : -1.0) * std::log(std::max(1.0 - 2.0 * std::abs(u), 1e-300));
    }
    const AggdParams gfit = aggd_fit(gauss);
    const AggdParams lfit = aggd_fit(laplace);
    pass = pass && std::abs(gfit.alpha - 2.0) <= 0.1 && std::abs(lfit.alpha - 1.0) <= 0.1;
    detail += fmt("aggd alpha gauss %.3f laplace %.3f", gfit.alpha, lfit.alpha);

    const double secs = seconds_since(start);
    return {pass, detail + fmt(", %.1fs", secs)};
}

// ---------------------------------------------------------------------------
// Criterion 8: two same-seed full-pipeline runs produce byte-identical
// reports and checkpoints.
Outcome criterion8(const fs::path& scratch) {
    const auto start = std::chrono::steady_clock::now();
    auto small_cfg = [&](const char* name) {
        ExperimentConfig cfg;
        cfg.data_dir = (scratch / "c8" / name / "data").string();
        cfg.out_dir = (scratch / "c8" / name / "out").string();
        cfg.train_images = 8;
        cfg.test_images = 4;
        cfg.image_size = 48;
        cfg.sigma = 0.1;
        cfg.seed = 11;
        cfg.t0 = 5;
        cfg.t_max = 8;
        cfg.net_width = 16;
        cfg.net_hidden = 2;
        cfg.crop = 24;
        cfg.baseline_epochs = 30;
        cfg.ddpm_epochs = 30;
        cfg.theta_outer_iters = 6;
        cfg.inner_iters = 10;
        return cfg;
    };
    const ExperimentConfig a = small_cfg("a"), b = small_cfg("b");
    const std::string csv_a = run_pipeline(a);
    const std::string csv_b = run_pipeline(b);

    auto bytes = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    bool pass = true;
    std::string detail;
    const std::pair<std::string, std::string> files[] = {
        {csv_a, csv_b},
        {baseline_ckpt_path(a), baseline_ckpt_path(b)},
        {ddpm_ckpt_path(a), ddpm_ckpt_path(b)},
        {theta_ckpt_path(a), theta_ckpt_path(b)},
    };
    int identical = 0;
    for (const auto& [fa, fb] : files) {
        const std::string ba = bytes(fa), bb = bytes(fb);
        if (!ba.empty() && ba == bb)
            ++identical;
        else
            pass = false;
    }
    detail = fmt("%d/4 artifacts byte-identical (report + 3 checkpoints), %.0fs", identical,
                 seconds_since(start));
    return {pass, detail};
}

}  // namespace

int main() {
    fs::path scratch = fs::current_path() / "acceptance_scratch";
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    struct Entry {
        int number;
        const char* title;
        std::function<Outcome()> run;
    };
    const Entry entries[] = {
        {1, "gradient exactness", criterion1},
        {2, "magnitude-noise statistics", criterion2},
        {3, "diffusion algebra", criterion3},
        {4, "conversion-model soundness", criterion4},
        {5, "frozen denoiser weights", criterion5},
        {6, "end-to-end desk-scale ranking", [&] { return criterion6(scratch); }},
        {7, "metric correctness", criterion7},
        {8, "determinism", [&] { return criterion8(scratch); }},
    };

    bool all_pass = true;
    for (const Entry& e : entries) {
        Outcome out;
        try {
            out = e.run();
        } catch (const std::exception& ex) {
            out = {false, std::string("exception: ") + ex.what()};
        }
        std::printf("%s criterion %d (%s): %s\n", out.pass ? "PASS" : "FAIL", e.number, e.title,
                    out.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && out.pass;
    }
    return all_pass ? 0 : 1;
}
