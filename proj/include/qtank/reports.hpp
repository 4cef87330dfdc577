#pragma once

#include <string>

#include "qtank/sim_engine.hpp"

namespace qtank::cli {

/// Frequency-domain report: time constants, transfer gains, eta, zeros with
/// classification, RGA, input-gain determinant. Line-oriented with stable
/// key prefixes.
std::string analyze_report(const sim::SimConfig& cfg);

/// Observer synthesis report: per node sigma, basis permutation, gain
/// acceptance/rejection, Lyapunov residual, beta; global coupling condition
/// and the stacked error-dynamics Hurwitz verdict.
std::string design_observer_report(const sim::SimConfig& cfg);

/// Runs the scenario, writes the trace CSV to out_path and returns the
/// metrics summary.
std::string simulate_to_csv(const sim::SimConfig& cfg, const std::string& out_path);

/// Settling band used by the summary: 2% of the largest set-point step
/// magnitude (0.02 when the schedule never changes).
double settling_band(const control::SetpointSchedule& schedule);

} // namespace qtank::cli
