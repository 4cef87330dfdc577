#pragma once

#include <array>
#include <complex>
#include <stdexcept>

#include "qtank/plant.hpp"
#include "qtank/smallmat.hpp"

namespace qtank::freq {

class PoleEvaluation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateValve : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotAZero : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularDcGain : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PhaseClass { Minimum, NonMinimum, Boundary };

using Complex = std::complex<double>;
using Complex2x2 = std::array<std::array<Complex, 2>, 2>;

/// 2x2 transfer matrix of the linearized process in parametric form.
/// Entry (0,0) is first order with numerator gain num_gain[0][0] and pole
/// -1/T1; entry (0,1) is second order with poles -1/T3, -1/T1; row 1 mirrors
/// this with T2/T4. num_gain carries the gains exact to the state-space
/// realization (the off-diagonal entries carry the other pump's gain);
/// c_gain stores the shorthand c_n = T_n k_n k_c / A_n.
struct TransferMatrix {
    std::array<double, 2> c_gain{};
    std::array<double, 2> gamma{};
    std::array<double, 4> time_const{};
    std::array<std::array<double, 2>, 2> num_gain{};
};

/// Zeros of det G(s): roots of T3 T4 s^2 + (T3 + T4) s + (1 - eta).
struct ZeroAnalysis {
    double eta = 0.0;
    smallmat::Polynomial zero_poly;
    std::array<Complex, 2> zeros{};
    bool complex_pair = false;
    PhaseClass classification = PhaseClass::Minimum;
};

struct RgaResult {
    double lambda = 0.0;
    smallmat::Matrix rga_mat;
};

struct InputGainResult {
    double determinant = 0.0;
    bool nonsingular = false;
};

TransferMatrix transfer_matrix(const plant::LinearModel& model, const plant::OperatingPoint& op,
                               const plant::TankGeometry& geom);

/// Entrywise evaluation of the transfer matrix. Throws PoleEvaluation when s
/// coincides with a pole -1/T_i.
Complex2x2 eval_transfer(const TransferMatrix& tm, Complex s);

ZeroAnalysis zero_analysis(const TransferMatrix& tm, const plant::OperatingPoint& op);

/// Minimum iff gamma1 + gamma2 > 1, NonMinimum iff < 1, Boundary at the sum
/// equal to 1 (tolerance 1e-12 on the sum).
PhaseClass classify_by_valve(const std::array<double, 2>& gamma);

/// Unit-norm left null direction psi with psi^T G(z) = 0, sign-fixed so the
/// first nonzero component is positive. z must satisfy |det G(z)| <= 1e-8
/// relative, else NotAZero.
std::array<double, 2> zero_direction(const TransferMatrix& tm, double z);

RgaResult rga(const plant::OperatingPoint& op);

InputGainResult input_gain_nonsingular(const plant::OperatingPoint& op);

const char* to_string(PhaseClass c);

} // namespace qtank::freq
