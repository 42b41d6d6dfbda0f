#ifndef RDDPM_NET_HPP
#define RDDPM_NET_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "rddpm/rng.hpp"
#include "rddpm/tensor.hpp"

namespace rddpm {

// Stack of 3x3 / stride-1 / zero-pad-1 conv layers with ReLU between them,
// an optional input->output residual add, and an optional sinusoidal timestep
// embedding projected to a per-channel bias after the first conv.
struct NetSpec {
    std::vector<int> channels = {1, 32, 32, 32, 1};  // conv l maps channels[l] -> channels[l+1]
    bool residual = true;
    int time_embed_dim = 32;  // 0 disables time conditioning

    int layer_count() const { return static_cast<int>(channels.size()) - 1; }
    void validate() const;
    std::size_t param_count() const;
    bool operator==(const NetSpec&) const = default;
};

std::vector<double> time_embedding(int t, int dim);

// Parameter block is a single flat vector:
//   for each conv layer l: weight[oc][ic][ky][kx], then bias[oc];
//   finally (if time_embed_dim > 0) the projection matrix [channels[1]][time_embed_dim].
class ConvNet {
public:
    explicit ConvNet(NetSpec spec);  // all parameters zero

    // Kaiming-uniform fan-in conv weights, zero biases, zero final layer.
    static ConvNet kaiming(NetSpec spec, Rng& rng);

    const NetSpec& spec() const { return spec_; }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }
    std::size_t param_count() const { return params_.size(); }

    std::size_t weight_offset(int layer) const;
    std::size_t bias_offset(int layer) const;
    std::size_t tproj_offset() const;

    Tensor4 forward(const Tensor4& x, std::span<const int> t) const;
    Tensor4 forward(const Tensor4& x, int t) const;
    Image forward_image(const Image& x, int t) const;

    // Activation cache for the backward pass.
    struct Cache {
        Tensor4 input;
        std::vector<Tensor4> pre;        // pre-activation of each layer (time bias included)
        std::vector<std::vector<double>> emb;  // per-item timestep embedding
    };

    Tensor4 forward_cached(const Tensor4& x, std::span<const int> t, Cache& cache) const;

    // Accumulates dLoss/dParams into `grads` (same layout/length as params).
    void backward(const Cache& cache, const Tensor4& d_out, std::span<double> grads) const;

private:
    void check_input(const Tensor4& x, std::span<const int> t) const;
    Tensor4 run(const Tensor4& x, std::span<const int> t, Cache* cache) const;

    NetSpec spec_;
    std::vector<double> params_;
    std::vector<std::size_t> weight_off_, bias_off_;
    std::size_t tproj_off_ = 0;
};

double mse_loss(const Tensor4& out, const Tensor4& target);

// Mean-squared-error loss of forward(net, x, t) against target, plus exact
// reverse-mode gradients for every parameter. `grads` is resized and zeroed.
double loss_and_grads(const ConvNet& net, const Tensor4& x, std::span<const int> t,
                      const Tensor4& target, std::vector<double>& grads);
double loss_and_grads(const ConvNet& net, const Tensor4& x, int t, const Tensor4& target,
                      std::vector<double>& grads);

}  // namespace rddpm

#endif  // RDDPM_NET_HPP
