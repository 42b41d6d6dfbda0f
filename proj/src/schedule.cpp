#include "rddpm/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rddpm {

NoiseSchedule make_schedule(int T, double beta_start, double beta_end) {
    if (T < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
        throw std::invalid_argument("make_schedule: need 0 < beta_start <= beta_end < 1");

    NoiseSchedule s;
    s.T = T;
    s.beta_start = beta_start;
    s.beta_end = beta_end;
    s.beta.resize(T);
    s.alpha.resize(T);
    s.alpha_bar.resize(T);
    s.sigma.resize(T);
    double prod = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double frac = T == 1 ? 0.0 : static_cast<double>(t - 1) / (T - 1);
        const double b = beta_start + frac * (beta_end - beta_start);
        prod *= 1.0 - b;
        s.beta[t - 1] = b;
        s.alpha[t - 1] = 1.0 - b;
        s.alpha_bar[t - 1] = prod;
        s.sigma[t - 1] = std::sqrt(b);
    }
    return s;
}

ScheduleEntry lookup(const NoiseSchedule& sched, int t) {
    if (t < 1 || t > sched.T)
        throw std::invalid_argument("lookup: timestep " + std::to_string(t) +
                                    " outside schedule range 1.." + std::to_string(sched.T));
    const int i = t - 1;
    return {sched.beta[i], sched.alpha[i], sched.alpha_bar[i], sched.sigma[i]};
}

}  // namespace rddpm
