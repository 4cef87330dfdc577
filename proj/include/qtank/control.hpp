#pragma once

#include <array>
#include <stdexcept>
#include <vector>

namespace qtank::control {

class EmptySchedule : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// PI gains for one loop: u = K (e + integral/Ti). K may be negative (the
/// non-minimum-phase tuning uses one), Ti must be nonzero.
struct PiGains {
    double K = 0.0;
    double Ti = 1.0;
};

struct PiState {
    std::array<double, 2> integral{}; // accumulated error per loop
};

struct SetpointEntry {
    double t_start = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
};

/// Piecewise-constant references on the measured outputs; entries must start
/// at t = 0 and be strictly increasing in time.
struct SetpointSchedule {
    std::vector<SetpointEntry> entries;
};

double pi_output(const PiGains& g, double error, double integral);

/// Integrator right-hand side d(integral)/dt = error.
double pi_rhs(double error);

/// Last entry with t_start <= t (left-closed).
std::array<double, 2> schedule_lookup(const SetpointSchedule& s, double t);

/// Throws std::invalid_argument unless the schedule invariants hold.
void validate(const SetpointSchedule& s);

} // namespace qtank::control
