#include <doctest.h>

#include <cmath>

#include "qtank/plant.hpp"

using namespace qtank;
using plant::Phase;

TEST_CASE("geometry and operating points carry the rig values") {
    const auto geom = plant::default_geometry();
    CHECK(geom.upper_area[0] == 28.0);
    CHECK(geom.upper_area[1] == 32.0);
    CHECK(geom.outlet_area[0] == 0.071);
    CHECK(geom.outlet_area[3] == 0.057);
    CHECK(geom.sensor_gain == 0.5);
    CHECK(geom.gravity == 981.0);

    const auto pm = plant::operating_point(Phase::Minus);
    CHECK(pm.valve_ratio[0] == 0.70);
    CHECK(pm.valve_ratio[1] == 0.60);
    CHECK(pm.pump_gain[0] == 3.33);
    CHECK(pm.pump_gain[1] == 3.35);
    CHECK(pm.h0[0] == 12.4);
    CHECK(pm.h0[1] == 12.7);
    CHECK(pm.h0[2] == 1.8);
    CHECK(pm.h0[3] == 1.4);

    const auto pp = plant::operating_point(Phase::Plus);
    CHECK(pp.valve_ratio[0] == 0.43);
    CHECK(pp.valve_ratio[1] == 0.34);
    CHECK(pp.v0[0] == 3.15);
    CHECK(pp.v0[1] == 3.15);
}

TEST_CASE("empty tanks with pumps off do not move") {
    const auto geom = plant::default_geometry();
    const auto op = plant::operating_point(Phase::Minus);
    const auto d = plant::nonlinear_rhs(geom, op, plant::PlantState{{0, 0, 0, 0}}, {0.0, 0.0});
    for (double v : d) CHECK(v == 0.0);
}

TEST_CASE("operating points are near-equilibria of the nonlinear dynamics") {
    const auto geom = plant::default_geometry();
    for (Phase ph : {Phase::Minus, Phase::Plus}) {
        const auto op = plant::operating_point(ph);
        const auto d = plant::nonlinear_rhs(geom, op, plant::PlantState{op.h0}, op.v0);
        for (double v : d) CHECK(std::abs(v) <= 0.02);
    }
    // tank 3 flow balance by hand: (0.4 * 3.35 * 3.0 - 0.071 sqrt(2 * 981 * 1.8)) / 28
    const auto op = plant::operating_point(Phase::Minus);
    const auto d = plant::nonlinear_rhs(geom, op, plant::PlantState{op.h0}, op.v0);
    const double expected = (0.4 * 3.35 * 3.0 - 0.071 * std::sqrt(2.0 * 981.0 * 1.8)) / 28.0;
    CHECK(d[2] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(d[2] == doctest::Approx(-0.00712).epsilon(1e-2));
}

TEST_CASE("single filled tank drains through its own outlet only") {
    const auto geom = plant::default_geometry();
    const auto op = plant::operating_point(Phase::Minus);
    const auto d = plant::nonlinear_rhs(geom, op, plant::PlantState{{1, 0, 0, 0}}, {0.0, 0.0});
    CHECK(d[0] == doctest::Approx(-(0.071 / 28.0) * std::sqrt(1962.0)).epsilon(1e-9));
    CHECK(d[0] == doctest::Approx(-0.1123).epsilon(1e-3));
    CHECK(d[1] == 0.0);
    CHECK(d[2] == 0.0);
    CHECK(d[3] == 0.0);
}

TEST_CASE("negative levels are clamped inside the square root") {
    const auto geom = plant::default_geometry();
    const auto op = plant::operating_point(Phase::Minus);
    const auto d = plant::nonlinear_rhs(geom, op, plant::PlantState{{-0.5, 0, 0, 0}}, {0.0, 0.0});
    CHECK(d[0] == 0.0);
    CHECK(std::isfinite(d[0]));
}

TEST_CASE("conductance") {
    const auto geom = plant::default_geometry();
    CHECK(plant::conductance(geom, 0) == doctest::Approx(0.11232).epsilon(1e-4));
    CHECK(plant::conductance(geom, 1) == doctest::Approx(0.078899).epsilon(1e-4));

    auto zero_outlet = geom;
    zero_outlet.outlet_area[2] = 0.0;
    CHECK(plant::conductance(zero_outlet, 2) == 0.0);
}

TEST_CASE("time constants reproduce the reference table within 1 s") {
    const auto geom = plant::default_geometry();
    const std::array<double, 4> table_minus{62, 90, 23, 30};
    const std::array<double, 4> table_plus{63, 91, 39, 56};

    const auto tm = plant::time_constants(geom, plant::operating_point(Phase::Minus));
    const auto tp = plant::time_constants(geom, plant::operating_point(Phase::Plus));
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(tm[i] - table_minus[i]) <= 1.0);
        CHECK(std::abs(tp[i] - table_plus[i]) <= 1.0);
    }
}

TEST_CASE("time constant formula collapses to 1 s when h0 = g/2 and A = a") {
    plant::TankGeometry geom = plant::default_geometry();
    plant::OperatingPoint op = plant::operating_point(Phase::Minus);
    for (std::size_t i = 0; i < 4; ++i) {
        geom.outlet_area[i] = geom.upper_area[i];
        op.h0[i] = geom.gravity / 2.0;
    }
    for (double T : plant::time_constants(geom, op)) CHECK(T == doctest::Approx(1.0));
}

TEST_CASE("time constants reject non-positive levels") {
    const auto geom = plant::default_geometry();
    auto op = plant::operating_point(Phase::Minus);
    op.h0[2] = 0.0;
    CHECK_THROWS_AS(plant::time_constants(geom, op), plant::NonPositiveLevel);
    CHECK_THROWS_AS(plant::linearize(geom, op), plant::NonPositiveLevel);
}

TEST_CASE("linearize builds the expected sparsity and entries") {
    const auto geom = plant::default_geometry();
    const auto op = plant::operating_point(Phase::Minus);
    const auto m = plant::linearize(geom, op);
    const auto T = m.time_const;

    CHECK(m.a_mat(0, 0) == doctest::Approx(-1.0 / T[0]));
    CHECK(m.a_mat(0, 2) == doctest::Approx(28.0 / (28.0 * T[2])));
    CHECK(m.a_mat(1, 1) == doctest::Approx(-1.0 / T[1]));
    CHECK(m.a_mat(1, 3) == doctest::Approx(32.0 / (32.0 * T[3])));
    CHECK(m.a_mat(2, 2) == doctest::Approx(-1.0 / T[2]));
    CHECK(m.a_mat(3, 3) == doctest::Approx(-1.0 / T[3]));
    CHECK(m.a_mat(0, 0) == doctest::Approx(-1.0 / 62.0).epsilon(2e-2));
    // only the six structural entries are populated
    int nonzeros = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            if (m.a_mat(i, j) != 0.0) ++nonzeros;
        }
    }
    CHECK(nonzeros == 6);

    CHECK(m.b_mat(0, 0) == doctest::Approx(0.7 * 3.33 / 28.0));
    CHECK(m.b_mat(0, 0) == doctest::Approx(0.08325));
    CHECK(m.b_mat(1, 1) == doctest::Approx(0.6 * 3.35 / 32.0));
    CHECK(m.b_mat(2, 1) == doctest::Approx(0.4 * 3.35 / 28.0));
    CHECK(m.b_mat(3, 0) == doctest::Approx(0.3 * 3.33 / 32.0));
    CHECK(m.b_mat(0, 1) == 0.0);
    CHECK(m.b_mat(1, 0) == 0.0);

    CHECK(m.c_mat(0, 0) == 0.5);
    CHECK(m.c_mat(1, 1) == 0.5);
    CHECK(m.c_mat(0, 1) == 0.0);
    CHECK(m.c_mat(1, 2) == 0.0);
}

TEST_CASE("linearized plant is Hurwitz at both operating points") {
    const auto geom = plant::default_geometry();
    for (Phase ph : {Phase::Minus, Phase::Plus}) {
        const auto m = plant::linearize(geom, plant::operating_point(ph));
        CHECK(qtank::smallmat::is_hurwitz(qtank::smallmat::char_poly(m.a_mat)));
    }
}

TEST_CASE("finite differences agree with linearize entrywise") {
    const auto geom = plant::default_geometry();
    for (Phase ph : {Phase::Minus, Phase::Plus}) {
        const auto op = plant::operating_point(ph);
        const auto m = plant::linearize(geom, op);
        const auto jac = plant::finite_diff_jacobian(geom, op, 1e-4);
        CHECK((jac - m.a_mat).max_norm() <= 1e-4);
        // coupling sparsity: tank 3 is independent of tank 1, tank 4 of tank 2
        CHECK(jac(2, 0) == 0.0);
        CHECK(jac(3, 1) == 0.0);
        CHECK(jac(0, 1) == 0.0);
        CHECK(jac(1, 0) == 0.0);
    }
}
