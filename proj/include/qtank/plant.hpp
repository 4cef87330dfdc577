#pragma once

#include <array>
#include <stdexcept>

#include "qtank/smallmat.hpp"

namespace qtank::plant {

class NonPositiveLevel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Phase { Minus, Plus };

/// Static rig parameters: tank cross sections (cm^2), outlet cross sections
/// (cm^2), level-sensor gain (V/cm) and gravity (cm/s^2).
struct TankGeometry {
    std::array<double, 4> upper_area{};
    std::array<double, 4> outlet_area{};
    double sensor_gain = 0.0;
    double gravity = 0.0;
};

/// One operating point: steady levels (cm), pump voltages (V), pump gains
/// (cm^3/(V s)) and three-way valve ratios in [0, 1].
struct OperatingPoint {
    Phase phase_label = Phase::Minus;
    std::array<double, 4> h0{};
    std::array<double, 2> v0{};
    std::array<double, 2> pump_gain{};
    std::array<double, 2> valve_ratio{};
};

struct PlantState {
    std::array<double, 4> h{}; // absolute levels, cm
};

/// Deviation-variable state space around an operating point, plus the
/// first-order lag time constants of the four tanks.
struct LinearModel {
    smallmat::Matrix a_mat; // 4x4, 1/s
    smallmat::Matrix b_mat; // 4x2, cm/(V s)
    smallmat::Matrix c_mat; // 2x4, V/cm
    std::array<double, 4> time_const{}; // s
};

TankGeometry default_geometry();
OperatingPoint operating_point(Phase phase);

/// Level derivatives dh/dt (cm/s). Negative levels are clamped to zero
/// inside the square roots so integrator overshoot cannot produce NaN.
std::array<double, 4> nonlinear_rhs(const TankGeometry& geom, const OperatingPoint& op,
                                    const PlantState& state, const std::array<double, 2>& v);

/// Outflow conductance (a_i/A_i) * sqrt(2g) for tank index 0..3.
double conductance(const TankGeometry& geom, std::size_t tank);

/// T_i = (A_i/a_i) * sqrt(2 h0_i / g). Throws NonPositiveLevel if any
/// operating level is not strictly positive.
std::array<double, 4> time_constants(const TankGeometry& geom, const OperatingPoint& op);

LinearModel linearize(const TankGeometry& geom, const OperatingPoint& op);

/// Central-difference Jacobian of nonlinear_rhs with respect to the levels,
/// evaluated at (h0, v0). Validation oracle for linearize().
smallmat::Matrix finite_diff_jacobian(const TankGeometry& geom, const OperatingPoint& op,
                                      double eps);

} // namespace qtank::plant
