#ifndef RDDPM_ADAM_HPP
#define RDDPM_ADAM_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rddpm {

struct AdamHyper {
    double lr = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamHyper hyper;
    std::vector<double> m;  // first moment
    std::vector<double> v;  // second moment
    std::uint64_t k = 0;    // completed steps

    AdamState() = default;
    explicit AdamState(std::size_t param_count, AdamHyper h = {})
        : hyper(h), m(param_count, 0.0), v(param_count, 0.0) {}
};

// One Adam update with bias correction, in place.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& st) {
    if (params.size() != grads.size() || params.size() != st.m.size())
        throw std::invalid_argument("adam_step: size mismatch");
    st.k += 1;
    const double b1 = st.hyper.beta1, b2 = st.hyper.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.k));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.k));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        st.m[i] = b1 * st.m[i] + (1.0 - b1) * g;
        st.v[i] = b2 * st.v[i] + (1.0 - b2) * g * g;
        const double mhat = st.m[i] / c1;
        const double vhat = st.v[i] / c2;
        params[i] -= st.hyper.lr * mhat / (std::sqrt(vhat) + st.hyper.eps);
    }
}

}  // namespace rddpm

#endif  // RDDPM_ADAM_HPP
