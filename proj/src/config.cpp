#include "rddpm/config.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rddpm {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
    throw std::invalid_argument("config: key '" + key + "' got '" + value + "' (expected " +
                                expected + ")");
}

int parse_int(const std::string& key, const std::string& value) {
    int out = 0;
    const auto* begin = value.data();
    const auto* end = begin + value.size();
    auto [p, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || p != end) bad_value(key, value, "an integer");
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const auto* begin = value.data();
    const auto* end = begin + value.size();
    auto [p, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || p != end) bad_value(key, value, "an unsigned integer");
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double out = std::stod(value, &used);
        if (used != value.size()) bad_value(key, value, "a real number");
        return out;
    } catch (const std::invalid_argument&) {
        bad_value(key, value, "a real number");
    } catch (const std::out_of_range&) {
        bad_value(key, value, "a representable real number");
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (train_images < 1 || test_images < 1)
        throw std::invalid_argument("config: train_images and test_images must be positive");
    if (image_size < 32) throw std::invalid_argument("config: image_size must be at least 32");
    phantom_spec().validate();
    if (sigma < 0.0) throw std::invalid_argument("config: sigma must be non-negative");
    if (T < 1) throw std::invalid_argument("config: T must be positive");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
        throw std::invalid_argument("config: need 0 < beta_start <= beta_end < 1");
    if (t0 < 1 || t0 > T) throw std::invalid_argument("config: t0 must lie in [1, T]");
    if (t_max < 1 || t_max > T) throw std::invalid_argument("config: t_max must lie in [1, T]");
    if (inner_iters < 1) throw std::invalid_argument("config: inner_iters must be positive");
    if (!(baseline_lr > 0.0 && ddpm_lr > 0.0 && theta_lr > 0.0))
        throw std::invalid_argument("config: learning rates must be positive");
    if (baseline_batch < 1 || ddpm_batch < 1 || theta_batch < 1)
        throw std::invalid_argument("config: batch sizes must be positive");
    if (baseline_epochs < 1 || ddpm_epochs < 1 || theta_outer_iters < 1)
        throw std::invalid_argument("config: training budgets must be positive");
    if (crop != 0 && (crop < 16 || crop > image_size))
        throw std::invalid_argument("config: crop must be 0 (full image) or in [16, image_size]");
    if (net_width < 1 || net_hidden < 0)
        throw std::invalid_argument("config: net_width must be positive and net_hidden >= 0");
    reverse_coef_mode();
    renoise_scale_mode();
    inner_step_mode();
}

NetSpec ExperimentConfig::baseline_net_spec() const {
    NetSpec s;
    s.channels.assign(static_cast<std::size_t>(net_hidden) + 2, net_width);
    s.channels.front() = 1;
    s.channels.back() = 1;
    s.residual = true;
    s.time_embed_dim = 0;
    return s;
}

NetSpec ExperimentConfig::ddpm_net_spec() const {
    NetSpec s = baseline_net_spec();
    s.residual = false;
    s.time_embed_dim = 32;
    return s;
}

NetSpec ExperimentConfig::theta_net_spec() const {
    NetSpec s = baseline_net_spec();
    s.residual = true;
    s.time_embed_dim = 32;
    return s;
}

ReverseCoef ExperimentConfig::reverse_coef_mode() const {
    if (reverse_coef == "standard") return ReverseCoef::standard;
    if (reverse_coef == "paper") return ReverseCoef::paper_literal;
    bad_value("reverse_coef", reverse_coef, "standard | paper");
}

RenoiseScale ExperimentConfig::renoise_scale_mode() const {
    if (renoise_scale == "paper") return RenoiseScale::paper;
    if (renoise_scale == "consistent") return RenoiseScale::consistent;
    bad_value("renoise_scale", renoise_scale, "paper | consistent");
}

InnerStepMode ExperimentConfig::inner_step_mode() const {
    if (inner_step == "per-sample") return InnerStepMode::per_sample;
    if (inner_step == "literal") return InnerStepMode::literal;
    bad_value("inner_step", inner_step, "per-sample | literal");
}

PhantomSpec ExperimentConfig::phantom_spec() const {
    PhantomSpec p;
    p.size = image_size;
    p.min_shapes = min_shapes;
    p.max_shapes = max_shapes;
    p.min_intensity = min_intensity;
    p.max_intensity = max_intensity;
    p.seed = seed;
    return p;
}

void apply_config_kv(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;
    static const std::map<std::string, Setter> setters = {
        {"data_dir", [](auto& c, auto&, auto& v) { c.data_dir = v; }},
        {"out_dir", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
        {"train_images", [](auto& c, auto& k, auto& v) { c.train_images = parse_int(k, v); }},
        {"test_images", [](auto& c, auto& k, auto& v) { c.test_images = parse_int(k, v); }},
        {"image_size", [](auto& c, auto& k, auto& v) { c.image_size = parse_int(k, v); }},
        {"min_shapes", [](auto& c, auto& k, auto& v) { c.min_shapes = parse_int(k, v); }},
        {"max_shapes", [](auto& c, auto& k, auto& v) { c.max_shapes = parse_int(k, v); }},
        {"min_intensity", [](auto& c, auto& k, auto& v) { c.min_intensity = parse_double(k, v); }},
        {"max_intensity", [](auto& c, auto& k, auto& v) { c.max_intensity = parse_double(k, v); }},
        {"sigma", [](auto& c, auto& k, auto& v) { c.sigma = parse_double(k, v); }},
        {"T", [](auto& c, auto& k, auto& v) { c.T = parse_int(k, v); }},
        {"beta_start", [](auto& c, auto& k, auto& v) { c.beta_start = parse_double(k, v); }},
        {"beta_end", [](auto& c, auto& k, auto& v) { c.beta_end = parse_double(k, v); }},
        {"t0", [](auto& c, auto& k, auto& v) { c.t0 = parse_int(k, v); }},
        {"t_max", [](auto& c, auto& k, auto& v) { c.t_max = parse_int(k, v); }},
        {"inner_iters", [](auto& c, auto& k, auto& v) { c.inner_iters = parse_int(k, v); }},
        {"baseline_lr", [](auto& c, auto& k, auto& v) { c.baseline_lr = parse_double(k, v); }},
        {"baseline_batch", [](auto& c, auto& k, auto& v) { c.baseline_batch = parse_int(k, v); }},
        {"baseline_epochs", [](auto& c, auto& k, auto& v) { c.baseline_epochs = parse_int(k, v); }},
        {"ddpm_lr", [](auto& c, auto& k, auto& v) { c.ddpm_lr = parse_double(k, v); }},
        {"ddpm_batch", [](auto& c, auto& k, auto& v) { c.ddpm_batch = parse_int(k, v); }},
        {"ddpm_epochs", [](auto& c, auto& k, auto& v) { c.ddpm_epochs = parse_int(k, v); }},
        {"theta_lr", [](auto& c, auto& k, auto& v) { c.theta_lr = parse_double(k, v); }},
        {"theta_batch", [](auto& c, auto& k, auto& v) { c.theta_batch = parse_int(k, v); }},
        {"theta_outer_iters",
         [](auto& c, auto& k, auto& v) { c.theta_outer_iters = parse_int(k, v); }},
        {"crop", [](auto& c, auto& k, auto& v) { c.crop = parse_int(k, v); }},
        {"net_width", [](auto& c, auto& k, auto& v) { c.net_width = parse_int(k, v); }},
        {"net_hidden", [](auto& c, auto& k, auto& v) { c.net_hidden = parse_int(k, v); }},
        {"reverse_coef", [](auto& c, auto&, auto& v) { c.reverse_coef = v; }},
        {"renoise_scale", [](auto& c, auto&, auto& v) { c.renoise_scale = v; }},
        {"inner_step", [](auto& c, auto&, auto& v) { c.inner_step = v; }},
        {"seed", [](auto& c, auto& k, auto& v) { c.seed = parse_u64(k, v); }},
    };
    const auto it = setters.find(key);
    if (it == setters.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
    it->second(cfg, key, value);
}

void load_config_file(const std::string& path, ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: " + path + ":" + std::to_string(lineno) +
                                        ": expected key=value");
        apply_config_kv(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

std::string config_to_string(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "data_dir = " << c.data_dir << "\n";
    out << "out_dir = " << c.out_dir << "\n";
    out << "train_images = " << c.train_images << "\n";
    out << "test_images = " << c.test_images << "\n";
    out << "image_size = " << c.image_size << "\n";
    out << "min_shapes = " << c.min_shapes << "\n";
    out << "max_shapes = " << c.max_shapes << "\n";
    out << "min_intensity = " << format_double(c.min_intensity) << "\n";
    out << "max_intensity = " << format_double(c.max_intensity) << "\n";
    out << "sigma = " << format_double(c.sigma) << "\n";
    out << "T = " << c.T << "\n";
    out << "beta_start = " << format_double(c.beta_start) << "\n";
    out << "beta_end = " << format_double(c.beta_end) << "\n";
    out << "t0 = " << c.t0 << "\n";
    out << "t_max = " << c.t_max << "\n";
    out << "inner_iters = " << c.inner_iters << "\n";
    out << "baseline_lr = " << format_double(c.baseline_lr) << "\n";
    out << "baseline_batch = " << c.baseline_batch << "\n";
    out << "baseline_epochs = " << c.baseline_epochs << "\n";
    out << "ddpm_lr = " << format_double(c.ddpm_lr) << "\n";
    out << "ddpm_batch = " << c.ddpm_batch << "\n";
    out << "ddpm_epochs = " << c.ddpm_epochs << "\n";
    out << "theta_lr = " << format_double(c.theta_lr) << "\n";
    out << "theta_batch = " << c.theta_batch << "\n";
    out << "theta_outer_iters = " << c.theta_outer_iters << "\n";
    out << "crop = " << c.crop << "\n";
    out << "net_width = " << c.net_width << "\n";
    out << "net_hidden = " << c.net_hidden << "\n";
    out << "reverse_coef = " << c.reverse_coef << "\n";
    out << "renoise_scale = " << c.renoise_scale << "\n";
    out << "inner_step = " << c.inner_step << "\n";
    out << "seed = " << c.seed << "\n";
    return out.str();
}

void write_config(const std::string& path, const ExperimentConfig& cfg) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("config: cannot write " + path);
    out << "# resolved experiment configuration\n" << config_to_string(cfg);
    if (!out) throw std::runtime_error("config: write failed for " + path);
}

}  // namespace rddpm
