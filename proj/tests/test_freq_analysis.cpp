#include <doctest.h>

#include <cmath>

#include "qtank/freq_analysis.hpp"

using namespace qtank;
using plant::Phase;
using freq::PhaseClass;

namespace {

freq::TransferMatrix make_tm(Phase ph) {
    const auto geom = plant::default_geometry();
    const auto op = plant::operating_point(ph);
    return freq::transfer_matrix(plant::linearize(geom, op), op, geom);
}

// independent quadratic-formula oracle for the zero polynomial
std::array<double, 2> quadratic_roots(double a, double b, double c) {
    const double disc = b * b - 4.0 * a * c;
    REQUIRE(disc >= 0.0);
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    return {q / a, c / q};
}

} // namespace

TEST_CASE("transfer gains match the reference transfer functions within 0.15") {
    const auto tm_minus = make_tm(Phase::Minus);
    CHECK(std::abs(tm_minus.num_gain[0][0] - 2.6) <= 0.15);
    CHECK(std::abs(tm_minus.num_gain[1][1] - 2.8) <= 0.15);
    CHECK(std::abs(tm_minus.num_gain[0][1] - 1.5) <= 0.15);
    CHECK(std::abs(tm_minus.num_gain[1][0] - 1.4) <= 0.15);

    const auto tm_plus = make_tm(Phase::Plus);
    CHECK(std::abs(tm_plus.num_gain[0][0] - 1.5) <= 0.15);
    CHECK(std::abs(tm_plus.num_gain[1][1] - 1.6) <= 0.15);
    // shorthand c_n in the c_gain fields
    CHECK(tm_plus.c_gain[0] == doctest::Approx(tm_plus.time_const[0] * 3.14 * 0.5 / 28.0));
}

TEST_CASE("eval_transfer at s = 0 reproduces the DC gain") {
    const auto tm = make_tm(Phase::Minus);
    const auto g = freq::eval_transfer(tm, 0.0);
    CHECK(g[0][0].real() == doctest::Approx(tm.num_gain[0][0]));
    CHECK(g[0][1].real() == doctest::Approx(tm.num_gain[0][1]));
    CHECK(g[1][0].real() == doctest::Approx(tm.num_gain[1][0]));
    CHECK(g[1][1].real() == doctest::Approx(tm.num_gain[1][1]));
    CHECK(std::abs(g[0][0] - 0.7 * tm.c_gain[0]) <= 0.15);
}

TEST_CASE("transfer matrix is strictly proper") {
    const auto tm = make_tm(Phase::Minus);
    const auto g = freq::eval_transfer(tm, 1e9);
    for (const auto& row : g) {
        for (const auto& e : row) CHECK(std::abs(e) <= 1e-6);
    }
}

TEST_CASE("eval_transfer rejects poles") {
    const auto tm = make_tm(Phase::Minus);
    CHECK_THROWS_AS(freq::eval_transfer(tm, freq::Complex(-1.0 / tm.time_const[0], 0.0)),
                    freq::PoleEvaluation);
}

TEST_CASE("DC gain agrees with the state-space route C (-A)^{-1} B") {
    const auto geom = plant::default_geometry();
    for (Phase ph : {Phase::Minus, Phase::Plus}) {
        const auto op = plant::operating_point(ph);
        const auto model = plant::linearize(geom, op);
        const auto tm = freq::transfer_matrix(model, op, geom);
        const auto g0 = freq::eval_transfer(tm, 0.0);
        const auto ss = model.c_mat * smallmat::lin_solve(-model.a_mat, model.b_mat);
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j) {
                CHECK(std::abs(g0[i][j].real() - ss(i, j)) <= 1e-6);
            }
        }
    }
}

TEST_CASE("zero analysis: minimum phase point has two negative real zeros") {
    const auto op = plant::operating_point(Phase::Minus);
    const auto za = freq::zero_analysis(make_tm(Phase::Minus), op);
    CHECK(za.eta == doctest::Approx(0.3 * 0.4 / (0.7 * 0.6)));
    CHECK_FALSE(za.complex_pair);
    CHECK(za.zeros[0].real() < 0.0);
    CHECK(za.zeros[1].real() < 0.0);
    CHECK(za.classification == PhaseClass::Minimum);
    CHECK(za.zeros[0].real() == doctest::Approx(-0.0172).epsilon(0.05));
    CHECK(za.zeros[1].real() == doctest::Approx(-0.0580).epsilon(0.05));

    // quadratic-formula oracle on the same polynomial coefficients
    const auto roots = quadratic_roots(za.zero_poly.coeff(2), za.zero_poly.coeff(1),
                                       za.zero_poly.coeff(0));
    CHECK(za.zeros[0].real() == doctest::Approx(std::max(roots[0], roots[1])).epsilon(1e-12));
    CHECK(za.zeros[1].real() == doctest::Approx(std::min(roots[0], roots[1])).epsilon(1e-12));
}

TEST_CASE("zero analysis: non-minimum phase point has one RHP zero") {
    const auto op = plant::operating_point(Phase::Plus);
    const auto za = freq::zero_analysis(make_tm(Phase::Plus), op);
    CHECK(za.eta == doctest::Approx(0.57 * 0.66 / (0.43 * 0.34)));
    CHECK(za.zeros[0].real() > 0.0);
    CHECK(za.zeros[1].real() < 0.0);
    CHECK(za.zeros[0].real() == doctest::Approx(0.0128).epsilon(0.04));
    CHECK(za.classification == PhaseClass::NonMinimum);
}

TEST_CASE("zeros are roots of det G within 1e-8") {
    for (Phase ph : {Phase::Minus, Phase::Plus}) {
        const auto tm = make_tm(ph);
        const auto za = freq::zero_analysis(tm, plant::operating_point(ph));
        for (const auto& z : za.zeros) {
            const auto g = freq::eval_transfer(tm, z);
            const auto det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            CHECK(std::abs(det) <= 1e-8);
        }
    }
}

TEST_CASE("fully-open valves put the zeros at the upper-tank poles") {
    const auto geom = plant::default_geometry();
    auto op = plant::operating_point(Phase::Minus);
    op.valve_ratio = {1.0, 1.0};
    const auto tm = freq::transfer_matrix(plant::linearize(geom, op), op, geom);
    const auto za = freq::zero_analysis(tm, op);
    CHECK(za.eta == 0.0);
    // zeros come sorted by real part: -1/T4 is the slower (larger) one here
    CHECK(za.zeros[0].real() == doctest::Approx(-1.0 / tm.time_const[3]));
    CHECK(za.zeros[1].real() == doctest::Approx(-1.0 / tm.time_const[2]));
}

TEST_CASE("valve boundary puts a zero at the origin") {
    const auto geom = plant::default_geometry();
    auto op = plant::operating_point(Phase::Minus);
    op.valve_ratio = {0.5, 0.5};
    const auto tm = freq::transfer_matrix(plant::linearize(geom, op), op, geom);
    const auto za = freq::zero_analysis(tm, op);
    CHECK(za.classification == PhaseClass::Boundary);
    CHECK(za.eta == doctest::Approx(1.0));
    CHECK(za.zeros[0].real() == doctest::Approx(0.0).epsilon(1e-15));
    const double other = -(tm.time_const[2] + tm.time_const[3]) /
                         (tm.time_const[2] * tm.time_const[3]);
    CHECK(za.zeros[1].real() == doctest::Approx(other));
}

TEST_CASE("closed valves are degenerate for the zero polynomial") {
    auto op = plant::operating_point(Phase::Minus);
    op.valve_ratio = {0.0, 0.5};
    const auto tm = make_tm(Phase::Minus);
    CHECK_THROWS_AS(freq::zero_analysis(tm, op), freq::DegenerateValve);
}

TEST_CASE("large eta drives one zero to each side of the axis") {
    const auto geom = plant::default_geometry();
    auto op = plant::operating_point(Phase::Minus);
    // (1 - g)^2 / g^2 = 1000 -> g = 1/(1 + sqrt(1000))
    const double g = 1.0 / (1.0 + std::sqrt(1000.0));
    op.valve_ratio = {g, g};
    const auto tm = freq::transfer_matrix(plant::linearize(geom, op), op, geom);
    const auto za = freq::zero_analysis(tm, op);
    CHECK(za.eta == doctest::Approx(1000.0));
    CHECK(za.zeros[0].real() > 0.0);
    CHECK(za.zeros[1].real() < 0.0);
}

TEST_CASE("classify_by_valve on the reference points and the boundary") {
    CHECK(freq::classify_by_valve({0.70, 0.60}) == PhaseClass::Minimum);
    CHECK(freq::classify_by_valve({0.43, 0.34}) == PhaseClass::NonMinimum);
    CHECK(freq::classify_by_valve({0.5, 0.5}) == PhaseClass::Boundary);
    CHECK(freq::classify_by_valve({0.3, 0.7}) == PhaseClass::Boundary);
}

TEST_CASE("valve classification agrees with zero signs on a gamma grid") {
    const auto geom = plant::default_geometry();
    auto op = plant::operating_point(Phase::Minus);
    for (int i = 1; i <= 18; ++i) {
        for (int j = 1; j <= 18; ++j) {
            op.valve_ratio = {0.05 * i, 0.05 * j};
            const auto cls = freq::classify_by_valve(op.valve_ratio);
            if (cls == PhaseClass::Boundary) continue;
            const auto tm = freq::transfer_matrix(plant::linearize(geom, op), op, geom);
            const auto za = freq::zero_analysis(tm, op);
            CHECK(za.classification == cls);
        }
    }
}

TEST_CASE("zero direction annihilates G at the RHP zero") {
    const auto tm = make_tm(Phase::Plus);
    const auto za = freq::zero_analysis(tm, plant::operating_point(Phase::Plus));
    const double z = za.zeros[0].real();
    REQUIRE(z > 0.0);
    const auto psi = freq::zero_direction(tm, z);
    CHECK(std::hypot(psi[0], psi[1]) == doctest::Approx(1.0));
    // the zero is not pinned to a single output
    CHECK(std::abs(psi[0]) > 1e-3);
    CHECK(std::abs(psi[1]) > 1e-3);

    const auto g = freq::eval_transfer(tm, z);
    for (std::size_t col = 0; col < 2; ++col) {
        const auto resid = psi[0] * g[0][col] + psi[1] * g[1][col];
        CHECK(std::abs(resid) <= 1e-8);
    }
}

TEST_CASE("zero direction refuses points that are not zeros") {
    const auto geom = plant::default_geometry();
    auto op = plant::operating_point(Phase::Minus);
    op.valve_ratio = {1.0, 1.0}; // diagonal G, no finite zeros of det
    const auto tm = freq::transfer_matrix(plant::linearize(geom, op), op, geom);
    CHECK_THROWS_AS(freq::zero_direction(tm, -0.01), freq::NotAZero);
    CHECK_THROWS_AS(freq::zero_direction(make_tm(Phase::Minus), 1.0), freq::NotAZero);
}

TEST_CASE("rga at the reference points") {
    const auto rm = freq::rga(plant::operating_point(Phase::Minus));
    CHECK(rm.lambda == doctest::Approx(1.4).epsilon(1e-9));
    const auto rp = freq::rga(plant::operating_point(Phase::Plus));
    CHECK(rp.lambda == doctest::Approx(0.43 * 0.34 / (0.43 + 0.34 - 1.0)).epsilon(1e-12));
    CHECK(rp.lambda == doctest::Approx(-0.6357).epsilon(1e-3));

    auto op = plant::operating_point(Phase::Minus);
    op.valve_ratio = {1.0, 1.0};
    CHECK(freq::rga(op).lambda == doctest::Approx(1.0));
}

TEST_CASE("rga rows and columns sum to one") {
    auto op = plant::operating_point(Phase::Minus);
    for (double g1 : {0.1, 0.35, 0.6, 0.85}) {
        for (double g2 : {0.2, 0.45, 0.7, 0.95}) {
            if (std::abs(g1 + g2 - 1.0) <= 1e-12) continue;
            op.valve_ratio = {g1, g2};
            const auto r = freq::rga(op);
            CHECK(r.rga_mat(0, 0) + r.rga_mat(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(r.rga_mat(0, 0) + r.rga_mat(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("rga rejects the singular valve boundary") {
    auto op = plant::operating_point(Phase::Minus);
    op.valve_ratio = {0.5, 0.5};
    CHECK_THROWS_AS(freq::rga(op), freq::SingularDcGain);
}

TEST_CASE("input gain matrix determinant") {
    auto op = plant::operating_point(Phase::Minus);
    op.valve_ratio = {0.5, 0.5};
    const auto boundary = freq::input_gain_nonsingular(op);
    CHECK(boundary.determinant == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(boundary.nonsingular);

    const auto rm = freq::input_gain_nonsingular(plant::operating_point(Phase::Minus));
    CHECK(rm.determinant == doctest::Approx(3.33 * 3.35 * 0.30).epsilon(1e-9));
    CHECK(rm.nonsingular);

    const auto rp = freq::input_gain_nonsingular(plant::operating_point(Phase::Plus));
    CHECK(rp.determinant == doctest::Approx(3.14 * 3.29 * -0.23).epsilon(1e-9));
    CHECK(rp.nonsingular);
}
