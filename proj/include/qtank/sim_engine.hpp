#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qtank/control.hpp"
#include "qtank/observer_net.hpp"
#include "qtank/plant.hpp"

namespace qtank::sim {

class NonFiniteState : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DesignRejected : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Observer-side configuration as carried by the scenario file: node count,
/// coupling gain, eps_bar, per-node weights, optional explicit injection
/// gains (empty = design by pole placement) and the adjacency list.
struct ObserverConfig {
    std::size_t n_nodes = 2;
    double gamma_coupling = 6.0;
    double eps_bar = 1.0;
    std::vector<double> k_weight{3.0, 4.5};
    std::vector<std::vector<double>> l_given{{3.0, 1.0}, {-1.0, 3.0}};
    std::vector<std::pair<std::size_t, std::size_t>> edges{{0, 1}};
};

struct SimConfig {
    plant::TankGeometry geometry;
    plant::OperatingPoint op;
    std::array<control::PiGains, 2> pi_gains{};
    control::SetpointSchedule schedule;
    ObserverConfig observer;
    double dt = 0.01;
    double t_end = 500.0;
    std::array<double, 4> x0_deviation{};
    std::vector<std::array<double, 4>> estimate_init; // deviation; empty = zeros
    bool nonlinear_plant = true;
    bool observer_feedforward = true;
    bool force_design = false; // run even if the error dynamics fail the Hurwitz gate
};

/// The reference scenario for one phase: laboratory rig parameters, the
/// stock PI and observer gains, set-point steps at {100, 200, 300, 350} s
/// with unit magnitudes, dt = 0.01 s, t_end = 500 s (minimum phase) or
/// 5000 s (non-minimum), x0 = [8, 5, -2, 1].
SimConfig default_config(plant::Phase phase);

/// Snapshot of everything the integrator advances: absolute levels, PI
/// accumulators and the per-node estimate vectors (deviation variables).
struct ClosedLoopState {
    plant::PlantState levels;
    control::PiState pi;
    std::vector<std::array<double, 4>> estimates;
};

struct TraceRow {
    double t = 0.0;
    std::array<double, 4> h{};
    std::array<double, 2> v{};
    std::array<double, 2> y{};
    std::array<double, 2> r{};
    std::vector<std::array<double, 4>> xhat;
    std::vector<double> err_norm;
};

struct SimTrace {
    std::size_t n_nodes = 0;
    std::vector<TraceRow> rows;
};

struct DesignNote {
    std::size_t node = 0;
    std::string message;
};

struct BankBuild {
    observer::ObserverBank bank;
    std::vector<DesignNote> notes;
};

/// Builds the observer bank for a config: partitions the output rows across
/// nodes, decomposes, validates or replaces the supplied injection gains
/// (rejections are returned as notes), and assembles the lifted gains.
BankBuild build_observer_bank(const plant::LinearModel& model, const ObserverConfig& cfg);

/// One classic fourth-order Runge-Kutta step of the autonomous-in-t system
/// given by rhs(state, t, out). Inputs held by the caller must be frozen over
/// the step.
std::vector<double> rk4_step(const std::vector<double>& state, double t, double dt,
                             const std::function<void(const std::vector<double>&, double,
                                                      std::vector<double>&)>& rhs);

/// Runs the closed loop (plant + decentralized PI + observer bank) on a
/// uniform grid and records every step. Throws DesignRejected when the
/// stacked error dynamics fail the Hurwitz gate (unless force_design) and
/// NonFiniteState when the state leaves the finite range.
SimTrace run_scenario(const SimConfig& cfg);

struct Metrics {
    // absolute time from which the output stays inside the band; empty = NotSettled
    std::array<std::optional<double>, 2> settling_time{};
    std::vector<double> final_estimation_error;
    std::vector<double> peak_estimation_error_after_steps;
};

/// Settling is measured from the last set-point change; the peak estimation
/// error is taken over all times past the first change (0 when the schedule
/// never changes).
Metrics compute_metrics(const SimTrace& trace, const control::SetpointSchedule& schedule,
                        double band);

} // namespace qtank::sim
