#include "qtank/control.hpp"

namespace qtank::control {

double pi_output(const PiGains& g, double error, double integral) {
    return g.K * (error + integral / g.Ti);
}

double pi_rhs(double error) { return error; }

std::array<double, 2> schedule_lookup(const SetpointSchedule& s, double t) {
    if (s.entries.empty()) {
        throw EmptySchedule("schedule_lookup: empty schedule");
    }
    const SetpointEntry* active = &s.entries.front();
    for (const auto& e : s.entries) {
        if (e.t_start <= t) {
            active = &e;
        } else {
            break;
        }
    }
    return {active->r1, active->r2};
}

void validate(const SetpointSchedule& s) {
    if (s.entries.empty()) {
        throw std::invalid_argument("setpoint schedule is empty");
    }
    if (s.entries.front().t_start != 0.0) {
        throw std::invalid_argument("setpoint schedule must start at t = 0");
    }
    for (std::size_t i = 1; i < s.entries.size(); ++i) {
        if (s.entries[i].t_start <= s.entries[i - 1].t_start) {
            throw std::invalid_argument("setpoint times must be strictly increasing");
        }
    }
}

} // namespace qtank::control
