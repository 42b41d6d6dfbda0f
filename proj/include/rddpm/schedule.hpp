#ifndef RDDPM_SCHEDULE_HPP
#define RDDPM_SCHEDULE_HPP

#include <vector>

namespace rddpm {

// Per-timestep variance schedule: beta_t, alpha_t = 1 - beta_t, the running
// product alpha_bar_t, and sigma_t = sqrt(beta_t). Arrays are stored for
// t = 1..T; index with t, not t-1.
struct NoiseSchedule {
    int T = 0;
    std::vector<double> beta, alpha, alpha_bar, sigma;  // each of length T
    double beta_start = 0.0, beta_end = 0.0;
};

struct ScheduleEntry {
    double beta, alpha, alpha_bar, sigma;
};

// Linear beta ramp from beta_start (t=1) to beta_end (t=T).
NoiseSchedule make_schedule(int T, double beta_start, double beta_end);

ScheduleEntry lookup(const NoiseSchedule& sched, int t);

}  // namespace rddpm

#endif  // RDDPM_SCHEDULE_HPP
