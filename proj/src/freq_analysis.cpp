#include "qtank/freq_analysis.hpp"

#include <algorithm>
#include <cmath>

namespace qtank::freq {

namespace {

constexpr double kBoundaryTol = 1e-12;

bool on_valve_boundary(const std::array<double, 2>& gamma) {
    return std::abs(gamma[0] + gamma[1] - 1.0) <= kBoundaryTol;
}

} // namespace

const char* to_string(PhaseClass c) {
    switch (c) {
        case PhaseClass::Minimum: return "minimum";
        case PhaseClass::NonMinimum: return "non-minimum";
        case PhaseClass::Boundary: return "boundary";
    }
    return "?";
}

TransferMatrix transfer_matrix(const plant::LinearModel& model, const plant::OperatingPoint& op,
                               const plant::TankGeometry& geom) {
    const auto& T = model.time_const;
    const auto& kp = op.pump_gain;
    const auto& gam = op.valve_ratio;
    const double kc = geom.sensor_gain;
    const auto& A = geom.upper_area;

    TransferMatrix tm;
    tm.time_const = T;
    tm.gamma = gam;
    tm.c_gain = {T[0] * kp[0] * kc / A[0], T[1] * kp[1] * kc / A[1]};
    tm.num_gain[0][0] = gam[0] * tm.c_gain[0];
    tm.num_gain[1][1] = gam[1] * tm.c_gain[1];
    // cross channels route through the other pump
    tm.num_gain[0][1] = (1.0 - gam[1]) * T[0] * kp[1] * kc / A[0];
    tm.num_gain[1][0] = (1.0 - gam[0]) * T[1] * kp[0] * kc / A[1];
    return tm;
}

Complex2x2 eval_transfer(const TransferMatrix& tm, Complex s) {
    const auto& T = tm.time_const;
    std::array<Complex, 4> lag;
    for (std::size_t i = 0; i < 4; ++i) {
        lag[i] = 1.0 + s * T[i];
        if (std::abs(lag[i]) <= 1e-12 * std::max(1.0, std::abs(s) * T[i])) {
            throw PoleEvaluation("eval_transfer: s coincides with pole -1/T" +
                                 std::to_string(i + 1));
        }
    }
    Complex2x2 g;
    g[0][0] = tm.num_gain[0][0] / lag[0];
    g[0][1] = tm.num_gain[0][1] / (lag[2] * lag[0]);
    g[1][0] = tm.num_gain[1][0] / (lag[3] * lag[1]);
    g[1][1] = tm.num_gain[1][1] / lag[1];
    return g;
}

ZeroAnalysis zero_analysis(const TransferMatrix& tm, const plant::OperatingPoint& op) {
    const auto& gam = op.valve_ratio;
    if (gam[0] <= 0.0 || gam[1] <= 0.0) {
        throw DegenerateValve("zero_analysis: gamma1 * gamma2 = 0");
    }
    const double T3 = tm.time_const[2];
    const double T4 = tm.time_const[3];

    ZeroAnalysis za;
    za.eta = (1.0 - gam[0]) * (1.0 - gam[1]) / (gam[0] * gam[1]);
    const double qa = T3 * T4;
    const double qb = T3 + T4;
    const double qc = 1.0 - za.eta;
    za.zero_poly = smallmat::Polynomial({qa, qb, qc});

    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
        // b > 0 here, so the stable -b-sqrt branch is exact
        const double qroot = -0.5 * (qb + std::sqrt(disc));
        const double r1 = qroot / qa;
        const double r2 = qc / qroot;
        za.zeros = {Complex(std::max(r1, r2), 0.0), Complex(std::min(r1, r2), 0.0)};
        za.complex_pair = false;
    } else {
        const double re = -qb / (2.0 * qa);
        const double im = std::sqrt(-disc) / (2.0 * qa);
        za.zeros = {Complex(re, im), Complex(re, -im)};
        za.complex_pair = true;
    }

    if (on_valve_boundary(gam)) {
        za.classification = PhaseClass::Boundary;
    } else {
        const double max_re = std::max(za.zeros[0].real(), za.zeros[1].real());
        za.classification = max_re > 0.0 ? PhaseClass::NonMinimum : PhaseClass::Minimum;
    }
    return za;
}

PhaseClass classify_by_valve(const std::array<double, 2>& gamma) {
    if (on_valve_boundary(gamma)) return PhaseClass::Boundary;
    return gamma[0] + gamma[1] > 1.0 ? PhaseClass::Minimum : PhaseClass::NonMinimum;
}

std::array<double, 2> zero_direction(const TransferMatrix& tm, double z) {
    const Complex2x2 g = eval_transfer(tm, Complex(z, 0.0));
    const Complex det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    double scale = 0.0;
    for (const auto& row : g) {
        for (const auto& e : row) {
            scale = std::max(scale, std::abs(e));
        }
    }
    if (std::abs(det) > 1e-8 * std::max(1e-300, scale * scale)) {
        throw NotAZero("zero_direction: det G(z) not negligible at z = " + std::to_string(z));
    }

    // both adjugate rows left-annihilate G when det = 0; take the larger one
    const std::array<Complex, 2> row_a{g[1][1], -g[0][1]};
    const std::array<Complex, 2> row_b{-g[1][0], g[0][0]};
    const double na = std::hypot(std::abs(row_a[0]), std::abs(row_a[1]));
    const double nb = std::hypot(std::abs(row_b[0]), std::abs(row_b[1]));
    const auto& row = na >= nb ? row_a : row_b;
    const double norm = std::max(na, nb);
    if (norm == 0.0) {
        throw NotAZero("zero_direction: G(z) vanishes identically");
    }

    std::array<double, 2> psi{row[0].real() / norm, row[1].real() / norm};
    const double lead = std::abs(psi[0]) > 1e-14 ? psi[0] : psi[1];
    if (lead < 0.0) {
        psi[0] = -psi[0];
        psi[1] = -psi[1];
    }
    return psi;
}

RgaResult rga(const plant::OperatingPoint& op) {
    const auto& gam = op.valve_ratio;
    if (on_valve_boundary(gam)) {
        throw SingularDcGain("rga: gamma1 + gamma2 = 1, DC gain singular");
    }
    RgaResult r;
    r.lambda = gam[0] * gam[1] / (gam[0] + gam[1] - 1.0);
    const double lambda_tilde = (1.0 - gam[0]) * (1.0 - gam[1]) / (1.0 - gam[0] - gam[1]);
    if (std::abs(lambda_tilde - (1.0 - r.lambda)) > 1e-9 * std::max(1.0, std::abs(r.lambda))) {
        throw std::logic_error("rga: lambda_tilde != 1 - lambda");
    }
    r.rga_mat = smallmat::Matrix{{r.lambda, 1.0 - r.lambda}, {1.0 - r.lambda, r.lambda}};
    return r;
}

InputGainResult input_gain_nonsingular(const plant::OperatingPoint& op) {
    const auto& gam = op.valve_ratio;
    const auto& kp = op.pump_gain;
    InputGainResult res;
    res.determinant = gam[0] * kp[0] * gam[1] * kp[1] -
                      (1.0 - gam[1]) * kp[1] * (1.0 - gam[0]) * kp[0];
    res.nonsingular = !on_valve_boundary(gam);
    return res;
}

} // namespace qtank::freq
