#include "qtank/plant.hpp"

#include <cmath>

namespace qtank::plant {

TankGeometry default_geometry() {
    TankGeometry g;
    g.upper_area = {28.0, 32.0, 28.0, 32.0};
    g.outlet_area = {0.071, 0.057, 0.071, 0.057};
    g.sensor_gain = 0.5;
    g.gravity = 981.0;
    return g;
}

OperatingPoint operating_point(Phase phase) {
    OperatingPoint op;
    op.phase_label = phase;
    if (phase == Phase::Minus) {
        op.h0 = {12.4, 12.7, 1.8, 1.4};
        op.v0 = {3.00, 3.00};
        op.pump_gain = {3.33, 3.35};
        op.valve_ratio = {0.70, 0.60};
    } else {
        op.h0 = {12.6, 13.0, 4.8, 4.9};
        op.v0 = {3.15, 3.15};
        op.pump_gain = {3.14, 3.29};
        op.valve_ratio = {0.43, 0.34};
    }
    return op;
}

std::array<double, 4> nonlinear_rhs(const TankGeometry& geom, const OperatingPoint& op,
                                    const PlantState& state, const std::array<double, 2>& v) {
    const auto& A = geom.upper_area;
    const auto& a = geom.outlet_area;
    const auto& gam = op.valve_ratio;
    const auto& kp = op.pump_gain;
    const double two_g = 2.0 * geom.gravity;

    std::array<double, 4> outflow{};
    for (std::size_t i = 0; i < 4; ++i) {
        outflow[i] = a[i] * std::sqrt(two_g * std::max(state.h[i], 0.0));
    }

    // tanks 3 and 4 cascade into tanks 1 and 2
    return {
        (-outflow[0] + outflow[2] + gam[0] * kp[0] * v[0]) / A[0],
        (-outflow[1] + outflow[3] + gam[1] * kp[1] * v[1]) / A[1],
        (-outflow[2] + (1.0 - gam[1]) * kp[1] * v[1]) / A[2],
        (-outflow[3] + (1.0 - gam[0]) * kp[0] * v[0]) / A[3],
    };
}

double conductance(const TankGeometry& geom, std::size_t tank) {
    if (tank >= 4) {
        throw std::invalid_argument("conductance: tank index out of range");
    }
    return geom.outlet_area[tank] / geom.upper_area[tank] * std::sqrt(2.0 * geom.gravity);
}

std::array<double, 4> time_constants(const TankGeometry& geom, const OperatingPoint& op) {
    std::array<double, 4> T{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (op.h0[i] <= 0.0) {
            throw NonPositiveLevel("time_constants: h0[" + std::to_string(i + 1) +
                                   "] must be > 0");
        }
        T[i] = geom.upper_area[i] / geom.outlet_area[i] *
               std::sqrt(2.0 * op.h0[i] / geom.gravity);
    }
    return T;
}

LinearModel linearize(const TankGeometry& geom, const OperatingPoint& op) {
    const auto T = time_constants(geom, op);
    const auto& A = geom.upper_area;
    const auto& gam = op.valve_ratio;
    const auto& kp = op.pump_gain;

    LinearModel m;
    m.time_const = T;

    m.a_mat = smallmat::Matrix(4, 4);
    m.a_mat(0, 0) = -1.0 / T[0];
    m.a_mat(0, 2) = A[2] / (A[0] * T[2]);
    m.a_mat(1, 1) = -1.0 / T[1];
    m.a_mat(1, 3) = A[3] / (A[1] * T[3]);
    m.a_mat(2, 2) = -1.0 / T[2];
    m.a_mat(3, 3) = -1.0 / T[3];

    m.b_mat = smallmat::Matrix(4, 2);
    m.b_mat(0, 0) = gam[0] * kp[0] / A[0];
    m.b_mat(1, 1) = gam[1] * kp[1] / A[1];
    m.b_mat(2, 1) = (1.0 - gam[1]) * kp[1] / A[2];
    m.b_mat(3, 0) = (1.0 - gam[0]) * kp[0] / A[3];

    m.c_mat = smallmat::Matrix(2, 4);
    m.c_mat(0, 0) = geom.sensor_gain;
    m.c_mat(1, 1) = geom.sensor_gain;
    return m;
}

smallmat::Matrix finite_diff_jacobian(const TankGeometry& geom, const OperatingPoint& op,
                                      double eps) {
    if (eps <= 0.0) {
        throw std::invalid_argument("finite_diff_jacobian: eps must be > 0");
    }
    smallmat::Matrix jac(4, 4);
    for (std::size_t j = 0; j < 4; ++j) {
        PlantState hi{op.h0};
        PlantState lo{op.h0};
        hi.h[j] += eps;
        lo.h[j] -= eps;
        const auto fp = nonlinear_rhs(geom, op, hi, op.v0);
        const auto fm = nonlinear_rhs(geom, op, lo, op.v0);
        for (std::size_t i = 0; i < 4; ++i) {
            jac(i, j) = (fp[i] - fm[i]) / (2.0 * eps);
        }
    }
    return jac;
}

} // namespace qtank::plant
